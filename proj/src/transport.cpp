#include "nlos/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nlos/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nlos {

Eigen::VectorXd PenumbraImage::channel(int c) const {
  Eigen::VectorXd v(pixels());
  for (int m = 0; m < pixels(); ++m) v[m] = at(m, c);
  return v;
}

void PenumbraImage::set_channel(int c, const Eigen::VectorXd& v) {
  for (int m = 0; m < pixels(); ++m) at(m, c) = v[m];
}

PenumbraImage PenumbraImage::zero(int width, int height, int channels) {
  PenumbraImage img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.data.assign(static_cast<size_t>(width) * height * channels, 0.0);
  return img;
}

PenumbraImage PenumbraImage::from_vector(const Eigen::VectorXd& v, int width,
                                         int height) {
  if (v.size() != static_cast<Eigen::Index>(width) * height)
    throw std::invalid_argument("PenumbraImage::from_vector: size mismatch");
  PenumbraImage img = zero(width, height, 1);
  for (int m = 0; m < img.pixels(); ++m) img.data[m] = v[m];
  return img;
}

double lambert_kernel(const Vec3& p, const Vec3& n_p, const Vec3& x,
                      const Vec3& n_x) {
  const Vec3 d = x - p;
  const double r = d.norm();
  if (r == 0.0)
    throw std::invalid_argument("lambert_kernel: coincident points");
  const double cos_x = (-d).dot(n_x) / r;  // direction x -> p against n_x
  const double cos_p = d.dot(n_p) / r;     // direction p -> x against n_p
  return std::max(0.0, cos_x) * std::max(0.0, cos_p);
}

TransportMatrix build_transport(const SceneConfig& cfg) {
  cfg.validate();
  const int m_pixels = cfg.wall_pixels();
  const int n_pixels = cfg.emitter_pixels();
  const double area = cfg.emitter_pixel_area();
  const Vec3 n_p(0, 1, 0), n_x(0, -1, 0);

  TransportMatrix t;
  t.A.resize(m_pixels, n_pixels);
  t.wall_res_x = cfg.wall_res_x;
  t.wall_res_z = cfg.wall_res_z;
  t.emitter_res_x = cfg.emitter_res_x;
  t.emitter_res_z = cfg.emitter_res_z;
  t.scene_hash = cfg.hash();

  std::vector<Vec3> xs(n_pixels);
  for (int n = 0; n < n_pixels; ++n) xs[n] = emitter_point(cfg, n);

#pragma omp parallel for schedule(static)
  for (int m = 0; m < m_pixels; ++m) {
    const Vec3 p = wall_point(cfg, m);
    for (int n = 0; n < n_pixels; ++n) {
      const Vec3 d = xs[n] - p;
      const double r2 = d.squaredNorm();
      t.A(m, n) = lambert_kernel(p, n_p, xs[n], n_x) / r2 * area;
    }
  }
  return t;
}

namespace {

// Wall-plane footprint of the voxel box seen from emitter point x: the
// perspective projection of a convex box is the convex hull of its
// projected corners, so its axis-aligned bounding box (padded a little for
// rounding) is a safe candidate set for the exact per-pixel segment test.
struct PixelRect {
  int ix0, ix1, iz0, iz1;
  bool full;
};

PixelRect project_footprint(const SceneConfig& cfg, const Vec3& x,
                            const Vec3& center, const Vec3& half) {
  PixelRect rect{0, cfg.wall_res_x - 1, 0, cfg.wall_res_z - 1, true};
  const double top = center.y() + half.y();
  if (x.y() - top < 1e-12 * cfg.emitter_depth) return rect;  // touches plane

  double xmin = 1e300, xmax = -1e300, zmin = 1e300, zmax = -1e300;
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3 c(center.x() + ((corner & 1) ? half.x() : -half.x()),
                 center.y() + ((corner & 2) ? half.y() : -half.y()),
                 center.z() + ((corner & 4) ? half.z() : -half.z()));
    const double s = x.y() / (x.y() - c.y());  // hits y = 0 at x + s (c - x)
    const double px = x.x() + s * (c.x() - x.x());
    const double pz = x.z() + s * (c.z() - x.z());
    xmin = std::min(xmin, px);
    xmax = std::max(xmax, px);
    zmin = std::min(zmin, pz);
    zmax = std::max(zmax, pz);
  }
  const double cell_x = cfg.wall_width / cfg.wall_res_x;
  const double cell_z = cfg.wall_height / cfg.wall_res_z;
  // one-pixel pad absorbs projection rounding; the slab test stays exact
  rect.ix0 = static_cast<int>(
      std::floor((xmin + 0.5 * cfg.wall_width) / cell_x - 1.0));
  rect.ix1 = static_cast<int>(
      std::ceil((xmax + 0.5 * cfg.wall_width) / cell_x + 1.0));
  rect.iz0 = static_cast<int>(
      std::floor((zmin + 0.5 * cfg.wall_height) / cell_z - 1.0));
  rect.iz1 = static_cast<int>(
      std::ceil((zmax + 0.5 * cfg.wall_height) / cell_z + 1.0));
  rect.ix0 = std::max(rect.ix0, 0);
  rect.iz0 = std::max(rect.iz0, 0);
  rect.ix1 = std::min(rect.ix1, cfg.wall_res_x - 1);
  rect.iz1 = std::min(rect.iz1, cfg.wall_res_z - 1);
  rect.full = false;
  return rect;
}

}  // namespace

std::vector<SparseVisibility> build_visibility(const SceneConfig& cfg,
                                               const VoxelGrid& grid) {
  cfg.validate();
  const int n_pixels = cfg.emitter_pixels();
  const int k_count = grid.count();

  std::vector<Vec3> xs(n_pixels);
  for (int n = 0; n < n_pixels; ++n) xs[n] = emitter_point(cfg, n);
  std::vector<Vec3> ps(cfg.wall_pixels());
  for (int m = 0; m < cfg.wall_pixels(); ++m) ps[m] = wall_point(cfg, m);

  std::vector<SparseVisibility> out(k_count);
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < k_count; ++k) {
    out[k].voxel_index = k;
    const Vec3& center = grid.centers[k];
    for (int n = 0; n < n_pixels; ++n) {
      const PixelRect rect =
          project_footprint(cfg, xs[n], center, grid.half_extents);
      for (int iz = rect.iz0; iz <= rect.iz1; ++iz)
        for (int ix = rect.ix0; ix <= rect.ix1; ++ix) {
          const int m = iz * cfg.wall_res_x + ix;
          if (segment_intersects_voxel(xs[n], ps[m], center, grid.half_extents))
            out[k].blocked.emplace_back(static_cast<uint32_t>(m),
                                        static_cast<uint32_t>(n));
        }
    }
    std::sort(out[k].blocked.begin(), out[k].blocked.end());
    out[k].blocked.erase(
        std::unique(out[k].blocked.begin(), out[k].blocked.end()),
        out[k].blocked.end());
  }
  return out;
}

Eigen::MatrixXd dense_visibility(const SparseVisibility& vis, int m_pixels,
                                 int n_pixels) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(m_pixels, n_pixels);
  for (const auto& [m, n] : vis.blocked) v(m, n) = 1.0;
  return v;
}

Eigen::MatrixXd masked_transport(const TransportMatrix& transport,
                                 const std::vector<SparseVisibility>& visibility,
                                 const std::vector<uint8_t>& alpha) {
  if (alpha.size() != visibility.size())
    throw std::invalid_argument("masked_transport: alpha/visibility size mismatch");
  Eigen::MatrixXd a = transport.A;
  for (size_t k = 0; k < alpha.size(); ++k) {
    if (!alpha[k]) continue;
    for (const auto& [m, n] : visibility[k].blocked) a(m, n) = 0.0;
  }
  return a;
}

namespace {

void check_nonnegative(const Eigen::VectorXd& v, const char* name) {
  if ((v.array() < 0.0).any())
    throw std::invalid_argument(std::string("render: negative ") + name);
}

}  // namespace

Eigen::VectorXd render_exact(const TransportMatrix& transport,
                             const std::vector<SparseVisibility>& visibility,
                             const std::vector<uint8_t>& alpha,
                             const Eigen::VectorXd& f, const Eigen::VectorXd& b) {
  const int m_pixels = transport.rows();
  if (f.size() != transport.cols())
    throw std::invalid_argument("render_exact: f size mismatch");
  if (b.size() != m_pixels)
    throw std::invalid_argument("render_exact: b size mismatch");
  if (alpha.size() != visibility.size())
    throw std::invalid_argument("render_exact: alpha size mismatch");
  for (uint8_t a : alpha)
    if (a > 1) throw std::invalid_argument("render_exact: alpha must be binary");
  check_nonnegative(f, "f");
  check_nonnegative(b, "b");

  Eigen::VectorXd y = transport.A * f;
  // union occlusion: subtract each blocked ray once
  std::vector<uint8_t> seen(static_cast<size_t>(m_pixels) * transport.cols(), 0);
  const size_t n_cols = transport.cols();
  for (size_t k = 0; k < alpha.size(); ++k) {
    if (!alpha[k]) continue;
    for (const auto& [m, n] : visibility[k].blocked) {
      uint8_t& flag = seen[static_cast<size_t>(m) * n_cols + n];
      if (flag) continue;
      flag = 1;
      y[m] -= transport.A(m, n) * f[n];
    }
  }
  y += b;
  return y;
}

Eigen::VectorXd render_linearized(const TransportMatrix& transport,
                                  const std::vector<SparseVisibility>& visibility,
                                  const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& f,
                                  const Eigen::VectorXd& b) {
  if (alpha.size() != static_cast<Eigen::Index>(visibility.size()))
    throw std::invalid_argument("render_linearized: alpha size mismatch");
  if ((alpha.array() < 0.0).any() || (alpha.array() > 1.0).any())
    throw std::invalid_argument("render_linearized: alpha outside [0,1]");
  if (f.size() != transport.cols())
    throw std::invalid_argument("render_linearized: f size mismatch");
  if (b.size() != transport.rows())
    throw std::invalid_argument("render_linearized: b size mismatch");
  check_nonnegative(f, "f");
  check_nonnegative(b, "b");

  Eigen::VectorXd y = transport.A * f;
  for (size_t k = 0; k < visibility.size(); ++k) {
    const double a_k = alpha[static_cast<Eigen::Index>(k)];
    if (a_k == 0.0) continue;
    for (const auto& [m, n] : visibility[k].blocked)
      y[m] -= a_k * transport.A(m, n) * f[n];
  }
  y += b;
  return y;
}

ComplementarityImages complementarity_check(
    const TransportMatrix& transport,
    const std::vector<SparseVisibility>& visibility, int k,
    const Eigen::VectorXd& f) {
  if (k < 0 || k >= static_cast<int>(visibility.size()))
    throw std::invalid_argument("complementarity_check: voxel index out of range");
  const int m_pixels = transport.rows();
  const int n_pixels = transport.cols();

  ComplementarityImages out;
  out.unoccluded = transport.A * f;

  out.pinhole = Eigen::VectorXd::Zero(m_pixels);
  for (const auto& [m, n] : visibility[k].blocked)
    out.pinhole[m] += transport.A(m, n) * f[n];

  // pinspeck summed over the complement set directly, not by subtraction
  Eigen::MatrixXd blocked = Eigen::MatrixXd::Zero(m_pixels, n_pixels);
  for (const auto& [m, n] : visibility[k].blocked) blocked(m, n) = 1.0;
  out.pinspeck = Eigen::VectorXd::Zero(m_pixels);
  for (int m = 0; m < m_pixels; ++m) {
    double acc = 0.0;
    for (int n = 0; n < n_pixels; ++n)
      if (blocked(m, n) == 0.0) acc += transport.A(m, n) * f[n];
    out.pinspeck[m] = acc;
  }
  return out;
}

PenumbraImage add_noise(const PenumbraImage& y, double snr_db, uint64_t seed) {
  if (std::isnan(snr_db))
    throw std::invalid_argument("add_noise: snr_db must not be NaN");
  if (std::isinf(snr_db) && snr_db > 0) return y;
  if (std::isinf(snr_db))
    throw std::invalid_argument("add_noise: snr_db must be finite or +inf");

  double power = 0.0;
  for (double v : y.data) power += v * v;
  power /= static_cast<double>(y.data.size());
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));

  Rng rng(substream(seed, /*tag=*/0x6e6f6973ULL));  // "nois"
  PenumbraImage out = y;
  for (double& v : out.data) v = std::max(0.0, v + sigma * rng.normal());
  return out;
}

}  // namespace nlos
