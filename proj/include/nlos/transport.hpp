#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "nlos/geometry.hpp"

namespace nlos {

// Dense M x N Lambertian transport. Entry (m, n) maps emitter-pixel
// radiosity to wall-pixel irradiance: g(p_m, x_n) / |x_n - p_m|^2 * dA,
// with the emitter pixel area dA folded in.
struct TransportMatrix {
  Eigen::MatrixXd A;
  int wall_res_x = 0, wall_res_z = 0;
  int emitter_res_x = 0, emitter_res_z = 0;
  uint64_t scene_hash = 0;

  int rows() const { return static_cast<int>(A.rows()); }  // M
  int cols() const { return static_cast<int>(A.cols()); }  // N
};

// Blocked (wall-pixel, emitter-pixel) index pairs for one voxel. The dense
// pinhole-visibility matrix V_k has 1 exactly at these pairs. Sorted by
// (m, n), duplicate-free.
struct SparseVisibility {
  int voxel_index = 0;
  std::vector<std::pair<uint32_t, uint32_t>> blocked;

  size_t byte_size() const {
    return blocked.capacity() * sizeof(blocked[0]) + sizeof(*this);
  }
};

// Linear-irradiance image on the visible wall (or an emitter-plane
// radiosity image; both use the same container). Row-major,
// channel-interleaved, value(m, c) = data[m * channels + c].
struct PenumbraImage {
  int width = 0, height = 0, channels = 1;
  std::vector<double> data;

  int pixels() const { return width * height; }
  double& at(int m, int c) { return data[static_cast<size_t>(m) * channels + c]; }
  double at(int m, int c) const {
    return data[static_cast<size_t>(m) * channels + c];
  }
  Eigen::VectorXd channel(int c) const;
  void set_channel(int c, const Eigen::VectorXd& v);

  static PenumbraImage zero(int width, int height, int channels = 1);
  static PenumbraImage from_vector(const Eigen::VectorXd& v, int width,
                                   int height);
};

/// max(0, cos(p - x, n_x)) * max(0, cos(x - p, n_p)); one-sided surfaces.
double lambert_kernel(const Vec3& p, const Vec3& n_p, const Vec3& x,
                      const Vec3& n_x);

/// Wall normal (0,1,0), emitter normal (0,-1,0), pixel-center sampling.
TransportMatrix build_transport(const SceneConfig& cfg);

/// One SparseVisibility per voxel: pair (m, n) is blocked iff the segment
/// from emitter pixel n to wall pixel m intersects voxel k's box.
std::vector<SparseVisibility> build_visibility(const SceneConfig& cfg,
                                               const VoxelGrid& grid);

Eigen::MatrixXd dense_visibility(const SparseVisibility& vis, int m_pixels,
                                 int n_pixels);

/// Transport with rows/column entries zeroed wherever any active voxel
/// blocks the pair (union occlusion); alpha binary over the grid.
Eigen::MatrixXd masked_transport(const TransportMatrix& transport,
                                 const std::vector<SparseVisibility>& visibility,
                                 const std::vector<uint8_t>& alpha);

/// y[m] = sum_n A[m,n] * [ray (m,n) not blocked by any active voxel] * f[n]
/// + b[m]. Union semantics: overlapping shadows are not double-subtracted.
Eigen::VectorXd render_exact(const TransportMatrix& transport,
                             const std::vector<SparseVisibility>& visibility,
                             const std::vector<uint8_t>& alpha,
                             const Eigen::VectorXd& f, const Eigen::VectorXd& b);

/// y = (A - sum_k alpha_k (A .* V_k)) f + b via sparse blocked-pair
/// iteration; alpha in [0,1]^K.
Eigen::VectorXd render_linearized(const TransportMatrix& transport,
                                  const std::vector<SparseVisibility>& visibility,
                                  const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& f,
                                  const Eigen::VectorXd& b);

struct ComplementarityImages {
  Eigen::VectorXd pinhole;     // rays passing through voxel k only
  Eigen::VectorXd pinspeck;    // rays missing voxel k only
  Eigen::VectorXd unoccluded;  // all rays
};

/// The three renders for a single voxel k, each computed independently;
/// pinhole + pinspeck = unoccluded is the optical complementarity identity.
ComplementarityImages complementarity_check(
    const TransportMatrix& transport,
    const std::vector<SparseVisibility>& visibility, int k,
    const Eigen::VectorXd& f);

/// White Gaussian noise at the requested SNR (dB), clamped at zero,
/// seed-deterministic. +infinity returns the input unchanged.
PenumbraImage add_noise(const PenumbraImage& y, double snr_db, uint64_t seed);

}  // namespace nlos
