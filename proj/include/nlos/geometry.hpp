#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace nlos {

using Vec3 = Eigen::Vector3d;

// Scene frame: the visible wall lies in the plane y = 0, the emitter plane
// at y = emitter_depth, z up, x lateral. Both rectangles are centered on
// the y axis. Wall pixel m = iz * wall_res_x + ix, emitter pixel
// n = iz * emitter_res_x + ix, pixel centers exactly on their planes.
struct SceneConfig {
  double wall_width = 1.0;
  double wall_height = 1.0;
  int wall_res_x = 64;
  int wall_res_z = 64;
  double emitter_depth = 1.0;
  double emitter_width = 1.0;
  double emitter_height = 1.0;
  int emitter_res_x = 16;
  int emitter_res_z = 16;
  int voxel_nx = 10;
  int voxel_ny = 5;
  int voxel_nz = 10;
  uint64_t seed = 0;

  int wall_pixels() const { return wall_res_x * wall_res_z; }
  int emitter_pixels() const { return emitter_res_x * emitter_res_z; }
  int voxel_count() const { return voxel_nx * voxel_ny * voxel_nz; }
  double emitter_pixel_area() const {
    return (emitter_width / emitter_res_x) * (emitter_height / emitter_res_z);
  }

  /// Throws std::invalid_argument on non-positive extents/resolutions.
  void validate() const;

  uint64_t hash() const;

  /// Flat key=value text, one field per line. Unknown keys are rejected.
  static SceneConfig from_text(const std::string& text);
  std::string to_text() const;
};

Vec3 wall_point(const SceneConfig& cfg, int m);
Vec3 emitter_point(const SceneConfig& cfg, int n);

// Occluding-volume frustum: wall-side face is the camera FOV rectangle at
// y = 0, emitter-side face the emitter rectangle at y = D. Corner i on one
// face joins corner i on the other; order (-x,-z), (+x,-z), (+x,+z), (-x,+z).
struct Frustum {
  std::array<Vec3, 4> wall_corners;
  std::array<Vec3, 4> emitter_corners;

  double depth() const { return emitter_corners[0].y() - wall_corners[0].y(); }
};

Frustum build_cfov_frustum(const SceneConfig& cfg);

struct VoxelGrid {
  Frustum frustum;
  int nx = 0, ny = 0, nz = 0;
  std::vector<Vec3> centers;  // ordered lexicographically by (iy, iz, ix)
  Vec3 half_extents = Vec3::Zero();

  int count() const { return nx * ny * nz; }
  int index(int ix, int iy, int iz) const { return (iy * nz + iz) * nx + ix; }
};

/// Uniform subdivision in slab-interpolated frustum coordinates; a prism
/// frustum reduces to a regular grid.
VoxelGrid make_voxel_grid(const Frustum& frustum, int nx, int ny, int nz);

inline VoxelGrid make_voxel_grid(const SceneConfig& cfg) {
  return make_voxel_grid(build_cfov_frustum(cfg), cfg.voxel_nx, cfg.voxel_ny,
                         cfg.voxel_nz);
}

/// Closed segment a->b against the box center +/- half_extents, exact slab
/// clipping; boundary contact counts as intersection. Throws if a == b.
bool segment_intersects_voxel(const Vec3& a, const Vec3& b, const Vec3& center,
                              const Vec3& half_extents);

enum class Frame { Scene, Normalized };

struct PointCloud {
  std::vector<Vec3> points;
  Frame frame = Frame::Scene;

  size_t size() const { return points.size(); }
};

/// Uniform rescale and recenter so the bounding box fits [-0.5, 0.5]^3.
PointCloud normalize_to_unit_cube(const PointCloud& cloud);

PointCloud translated(const PointCloud& cloud, const Vec3& delta);
PointCloud scaled(const PointCloud& cloud, double factor);

/// Binary occupancy of the grid cells containing at least one point.
/// Points outside the grid are ignored.
std::vector<uint8_t> voxelize_points(const VoxelGrid& grid,
                                     const PointCloud& cloud);

}  // namespace nlos
