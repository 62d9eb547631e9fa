#include "nlos/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nlos/rng.hpp"

namespace nlos {

void SceneConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("SceneConfig: ") + name +
                                  " must be positive");
  };
  auto at_least_one = [](int v, const char* name) {
    if (v < 1)
      throw std::invalid_argument(std::string("SceneConfig: ") + name +
                                  " must be >= 1");
  };
  positive(wall_width, "wall_width");
  positive(wall_height, "wall_height");
  positive(emitter_depth, "emitter_depth");
  positive(emitter_width, "emitter_width");
  positive(emitter_height, "emitter_height");
  at_least_one(wall_res_x, "wall_res_x");
  at_least_one(wall_res_z, "wall_res_z");
  at_least_one(emitter_res_x, "emitter_res_x");
  at_least_one(emitter_res_z, "emitter_res_z");
  at_least_one(voxel_nx, "voxel_nx");
  at_least_one(voxel_ny, "voxel_ny");
  at_least_one(voxel_nz, "voxel_nz");
}

uint64_t SceneConfig::hash() const {
  // FNV-1a over the canonical text form.
  const std::string text = to_text();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

template <typename T>
void emit(std::ostringstream& out, const char* key, T value) {
  out << key << "=" << value << "\n";
}

}  // namespace

std::string SceneConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  emit(out, "wall_width", wall_width);
  emit(out, "wall_height", wall_height);
  emit(out, "wall_res_x", wall_res_x);
  emit(out, "wall_res_z", wall_res_z);
  emit(out, "emitter_depth", emitter_depth);
  emit(out, "emitter_width", emitter_width);
  emit(out, "emitter_height", emitter_height);
  emit(out, "emitter_res_x", emitter_res_x);
  emit(out, "emitter_res_z", emitter_res_z);
  emit(out, "voxel_nx", voxel_nx);
  emit(out, "voxel_ny", voxel_ny);
  emit(out, "voxel_nz", voxel_nz);
  emit(out, "seed", seed);
  return out.str();
}

SceneConfig SceneConfig::from_text(const std::string& text) {
  SceneConfig cfg;
  std::map<std::string, bool> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // strip whitespace
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("SceneConfig: line " + std::to_string(lineno) +
                                  " is not key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (seen.count(key))
      throw std::invalid_argument("SceneConfig: duplicate key '" + key + "'");
    seen[key] = true;
    try {
      if (key == "wall_width") cfg.wall_width = std::stod(value);
      else if (key == "wall_height") cfg.wall_height = std::stod(value);
      else if (key == "wall_res_x") cfg.wall_res_x = std::stoi(value);
      else if (key == "wall_res_z") cfg.wall_res_z = std::stoi(value);
      else if (key == "emitter_depth") cfg.emitter_depth = std::stod(value);
      else if (key == "emitter_width") cfg.emitter_width = std::stod(value);
      else if (key == "emitter_height") cfg.emitter_height = std::stod(value);
      else if (key == "emitter_res_x") cfg.emitter_res_x = std::stoi(value);
      else if (key == "emitter_res_z") cfg.emitter_res_z = std::stoi(value);
      else if (key == "voxel_nx") cfg.voxel_nx = std::stoi(value);
      else if (key == "voxel_ny") cfg.voxel_ny = std::stoi(value);
      else if (key == "voxel_nz") cfg.voxel_nz = std::stoi(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else
        throw std::invalid_argument("SceneConfig: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("SceneConfig: bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

Vec3 wall_point(const SceneConfig& cfg, int m) {
  const int ix = m % cfg.wall_res_x;
  const int iz = m / cfg.wall_res_x;
  const double x =
      -0.5 * cfg.wall_width + (ix + 0.5) * cfg.wall_width / cfg.wall_res_x;
  const double z =
      -0.5 * cfg.wall_height + (iz + 0.5) * cfg.wall_height / cfg.wall_res_z;
  return Vec3(x, 0.0, z);
}

Vec3 emitter_point(const SceneConfig& cfg, int n) {
  const int ix = n % cfg.emitter_res_x;
  const int iz = n / cfg.emitter_res_x;
  const double x = -0.5 * cfg.emitter_width +
                   (ix + 0.5) * cfg.emitter_width / cfg.emitter_res_x;
  const double z = -0.5 * cfg.emitter_height +
                   (iz + 0.5) * cfg.emitter_height / cfg.emitter_res_z;
  return Vec3(x, cfg.emitter_depth, z);
}

Frustum build_cfov_frustum(const SceneConfig& cfg) {
  cfg.validate();
  Frustum f;
  const double wx = 0.5 * cfg.wall_width, wz = 0.5 * cfg.wall_height;
  const double ex = 0.5 * cfg.emitter_width, ez = 0.5 * cfg.emitter_height;
  const double d = cfg.emitter_depth;
  f.wall_corners = {Vec3(-wx, 0, -wz), Vec3(wx, 0, -wz), Vec3(wx, 0, wz),
                    Vec3(-wx, 0, wz)};
  f.emitter_corners = {Vec3(-ex, d, -ez), Vec3(ex, d, -ez), Vec3(ex, d, ez),
                       Vec3(-ex, d, ez)};
  return f;
}

VoxelGrid make_voxel_grid(const Frustum& frustum, int nx, int ny, int nz) {
  if (nx < 1 || ny < 1 || nz < 1)
    throw std::invalid_argument("make_voxel_grid: counts must be >= 1");
  VoxelGrid grid;
  grid.frustum = frustum;
  grid.nx = nx;
  grid.ny = ny;
  grid.nz = nz;
  grid.centers.resize(static_cast<size_t>(nx) * ny * nz);

  for (int iy = 0; iy < ny; ++iy) {
    const double t = (iy + 0.5) / ny;
    // cross-section rectangle at slab parameter t
    std::array<Vec3, 4> c;
    for (int i = 0; i < 4; ++i)
      c[i] = (1.0 - t) * frustum.wall_corners[i] + t * frustum.emitter_corners[i];
    double xmin = c[0].x(), xmax = c[0].x(), zmin = c[0].z(), zmax = c[0].z();
    for (int i = 1; i < 4; ++i) {
      xmin = std::min(xmin, c[i].x());
      xmax = std::max(xmax, c[i].x());
      zmin = std::min(zmin, c[i].z());
      zmax = std::max(zmax, c[i].z());
    }
    const double y = c[0].y();
    for (int iz = 0; iz < nz; ++iz)
      for (int ix = 0; ix < nx; ++ix) {
        const double x = xmin + (ix + 0.5) * (xmax - xmin) / nx;
        const double z = zmin + (iz + 0.5) * (zmax - zmin) / nz;
        grid.centers[grid.index(ix, iy, iz)] = Vec3(x, y, z);
      }
  }

  // Cell pitch averaged over depth; exact for prism frusta.
  auto span_x = [](const std::array<Vec3, 4>& c) {
    double lo = c[0].x(), hi = c[0].x();
    for (int i = 1; i < 4; ++i) {
      lo = std::min(lo, c[i].x());
      hi = std::max(hi, c[i].x());
    }
    return hi - lo;
  };
  auto span_z = [](const std::array<Vec3, 4>& c) {
    double lo = c[0].z(), hi = c[0].z();
    for (int i = 1; i < 4; ++i) {
      lo = std::min(lo, c[i].z());
      hi = std::max(hi, c[i].z());
    }
    return hi - lo;
  };
  const double wx = span_x(frustum.wall_corners), ex = span_x(frustum.emitter_corners);
  const double wz = span_z(frustum.wall_corners), ez = span_z(frustum.emitter_corners);
  grid.half_extents =
      Vec3(0.25 * (wx + ex) / nx, 0.5 * frustum.depth() / ny, 0.25 * (wz + ez) / nz);
  return grid;
}

bool segment_intersects_voxel(const Vec3& a, const Vec3& b, const Vec3& center,
                              const Vec3& half_extents) {
  if (a == b)
    throw std::invalid_argument("segment_intersects_voxel: degenerate segment");
  double t0 = 0.0, t1 = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double lo = center[i] - half_extents[i];
    const double hi = center[i] + half_extents[i];
    const double d = b[i] - a[i];
    if (d == 0.0) {
      if (a[i] < lo || a[i] > hi) return false;
    } else {
      double u = (lo - a[i]) / d;
      double v = (hi - a[i]) / d;
      if (u > v) std::swap(u, v);
      t0 = std::max(t0, u);
      t1 = std::min(t1, v);
      if (t0 > t1) return false;
    }
  }
  return true;
}

PointCloud normalize_to_unit_cube(const PointCloud& cloud) {
  if (cloud.points.empty())
    throw std::invalid_argument("normalize_to_unit_cube: empty cloud");
  Vec3 lo = cloud.points.front(), hi = cloud.points.front();
  for (const Vec3& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 mid = 0.5 * (lo + hi);
  const double extent = (hi - lo).maxCoeff();
  const double s = extent > 0.0 ? 1.0 / extent : 1.0;
  PointCloud out;
  out.frame = Frame::Normalized;
  out.points.reserve(cloud.points.size());
  for (const Vec3& p : cloud.points) out.points.push_back(s * (p - mid));
  return out;
}

PointCloud translated(const PointCloud& cloud, const Vec3& delta) {
  PointCloud out = cloud;
  for (Vec3& p : out.points) p += delta;
  return out;
}

PointCloud scaled(const PointCloud& cloud, double factor) {
  PointCloud out = cloud;
  for (Vec3& p : out.points) p *= factor;
  return out;
}

std::vector<uint8_t> voxelize_points(const VoxelGrid& grid,
                                     const PointCloud& cloud) {
  std::vector<uint8_t> occ(grid.count(), 0);
  const Frustum& fr = grid.frustum;
  const double y0 = fr.wall_corners[0].y();
  const double depth = fr.depth();
  for (const Vec3& p : cloud.points) {
    const double t = (p.y() - y0) / depth;
    if (t < 0.0 || t >= 1.0) continue;
    const int iy = std::min(static_cast<int>(t * grid.ny), grid.ny - 1);
    // cross-section rect of this slab (recomputed from the frustum)
    const double ts = (iy + 0.5) / grid.ny;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double zmin = xmin, zmax = -xmin;
    for (int i = 0; i < 4; ++i) {
      const Vec3 c =
          (1.0 - ts) * fr.wall_corners[i] + ts * fr.emitter_corners[i];
      xmin = std::min(xmin, c.x());
      xmax = std::max(xmax, c.x());
      zmin = std::min(zmin, c.z());
      zmax = std::max(zmax, c.z());
    }
    if (p.x() < xmin || p.x() >= xmax || p.z() < zmin || p.z() >= zmax) continue;
    const int ix = std::min(
        static_cast<int>((p.x() - xmin) / (xmax - xmin) * grid.nx), grid.nx - 1);
    const int iz = std::min(
        static_cast<int>((p.z() - zmin) / (zmax - zmin) * grid.nz), grid.nz - 1);
    occ[grid.index(ix, iy, iz)] = 1;
  }
  return occ;
}

}  // namespace nlos
