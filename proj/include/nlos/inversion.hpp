#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "nlos/geometry.hpp"
#include "nlos/transport.hpp"

namespace nlos {

/// Unique minimizer of |A f - y|^2 + lambda |f|^2 via an LDLT
/// factorization of the normal equations. lambda = 0 is allowed only when
/// A^T A is nonsingular; a singular system is reported, not regularized.
Eigen::VectorXd tikhonov_solve(const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& y, double lambda);

struct SolverOptions {
  int num_iter = 2000;
  double eta_z = 1e-1;
  double eta_b = 1e-2;
  double eta_lambda = 1e-3;
  double threshold = 0.5;
  bool estimate_background = true;  // false: background-neglected variant
  uint64_t seed = 0;
};

struct TraceRow {
  int iter = 0;
  double loss = 0.0;
  double lambda = 0.0;
  double b_norm = 0.0;
};

struct InversionState {
  Eigen::VectorXd z;       // K pre-sigmoid occupancy proxies
  Eigen::VectorXd b;       // M background estimate
  double lambda = 1.0;
  Eigen::VectorXd f;       // N current emitter estimate (after positivity)
  int iteration = 0;
};

struct InversionResult {
  Eigen::VectorXd f_hat;        // emitter re-fit under the binarized mask
  Eigen::VectorXd f_last;       // last in-loop iterate
  std::vector<uint8_t> alpha_hat;
  Eigen::VectorXd b_hat;
  double lambda_hat = 0.0;
  std::vector<TraceRow> trace;
  bool diverged = false;
};

struct Gradients {
  Eigen::VectorXd z;
  Eigen::VectorXd b;
  double lambda = 0.0;
};

/// Per-iteration quantities of the alternating scheme at a given state:
/// the sigmoid-relaxed mask A_v = A .* (1 - (1/K) sum_k V_k sigma(z_k)),
/// the ridge solve on the background-subtracted data, the positive part
/// f_i = max(f*, 0), and the loss L = (1/M) |y - A_v f_i - b|^2.
struct IterationEval {
  Eigen::MatrixXd a_v;
  Eigen::VectorXd f_star;
  Eigen::VectorXd f_pos;
  double loss = 0.0;
};

IterationEval evaluate_iteration(const TransportMatrix& transport,
                                 const std::vector<SparseVisibility>& visibility,
                                 const Eigen::VectorXd& y,
                                 const InversionState& state);

/// Analytic gradients of the iteration loss with f fixed at state.f;
/// d/dz and d/db are direct, d/dlambda flows through the closed-form
/// ridge solution via its factorization.
Gradients gradients(const TransportMatrix& transport,
                    const std::vector<SparseVisibility>& visibility,
                    const Eigen::VectorXd& y, const InversionState& state);

/// Alternating minimization over (f, z, b, lambda). Each iteration: relax
/// the binary occupancies through sigmoids, ridge-solve the emitter image,
/// impose positivity, then take gradient steps on b (when estimated), z,
/// and lambda; lambda is projected to >= 1e-8. The returned occupancies
/// are sigma(z) > threshold and f_hat is re-fit against the union-masked
/// transport of that binarization.
InversionResult alternating_minimize(
    const TransportMatrix& transport,
    const std::vector<SparseVisibility>& visibility, const Eigen::VectorXd& y,
    const SolverOptions& opts);

/// Variable-projection objective |[A (A^T A + lambda I)^-1 A^T - I] y|^2.
double vp_objective(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                    double lambda);

/// Orthogonal projector onto range(A); requires full column rank.
Eigen::MatrixXd projection_matrix(const Eigen::MatrixXd& a);

struct LocalizeResult {
  Vec3 translation = Vec3::Zero();
  int index = -1;
  std::vector<double> scores;
};

/// Grid search over candidate translations: voxelize the shifted cloud,
/// mask the transport, and score |H y|^2 with a small-ridge projector.
/// Ties break toward the smallest candidate index.
LocalizeResult localize(const TransportMatrix& transport,
                        const std::vector<SparseVisibility>& visibility,
                        const VoxelGrid& grid, const PointCloud& shape,
                        const std::vector<Vec3>& candidates,
                        const Eigen::VectorXd& y);

struct TvOptions {
  double epsilon = 1e-6;
  double rel_tol = 1e-7;
  int max_iter = 5000;
};

struct TvResult {
  Eigen::VectorXd f;
  std::vector<double> loss_trace;
  bool diverged = false;
};

/// Minimizes |y - A f|^2 + lambda_tv * TV_eps(f)^2 on the emitter pixel
/// grid by projected gradient descent with backtracking; f is kept
/// nonnegative.
TvResult tv_reconstruct(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                        double lambda_tv, int grid_x, int grid_z,
                        const TvOptions& opts = {});

}  // namespace nlos
