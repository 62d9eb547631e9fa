#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "nlos/geometry.hpp"
#include "nlos/transport.hpp"

namespace nlos {

struct EvalReport {
  double mse_2d = 0.0;
  double chamfer_3d = 0.0;
  double voxel_iou = 0.0;
  double sbr_db = 0.0;
  double snr_db = 0.0;
  uint64_t scene_hash = 0;
  uint64_t seed = 0;

  /// One-line JSON-style key:value record.
  std::string to_line() const;
};

double mse(const PenumbraImage& a, const PenumbraImage& b);
double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Symmetric mean squared nearest-neighbor distance:
/// (1/|P|) sum_p min_q |p-q|^2 + (1/|Q|) sum_q min_p |q-p|^2.
double chamfer(const PointCloud& p, const PointCloud& q);

/// |a AND b| / |a OR b|; 1 when both are empty.
double voxel_iou(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b);

/// 10 log10(mean(signal^2) / mean(background^2)).
double sbr_db(const Eigen::VectorXd& signal, const Eigen::VectorXd& background);

struct SpearmanResult {
  double rho = 0.0;
  double p_one_sided_negative = 1.0;  // P(rho as negative as observed | H0)
  int n = 0;
};

/// Spearman rank correlation with average ranks for ties; the p-value uses
/// the t approximation t = rho sqrt((n-2)/(1-rho^2)).
SpearmanResult spearman(const std::vector<double>& x,
                        const std::vector<double>& y);

/// Regularized incomplete beta function I_x(a, b) (continued fraction).
double incomplete_beta(double a, double b, double x);

}  // namespace nlos
