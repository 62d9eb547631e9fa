#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlos/geometry.hpp"
#include "nlos/transport.hpp"

namespace nlos {

// Penumbra image container, bit-exact layout:
//   magic "NLSI", version byte 0x01, little-endian u32 width, height,
//   channels, then width*height*channels little-endian f32, row-major,
//   channel-interleaved.
void write_penumbra_image(const std::string& path, const PenumbraImage& img);
PenumbraImage read_penumbra_image(const std::string& path);

/// One "x y z" line per point, decimal floats.
void write_point_cloud(const std::string& path, const PointCloud& cloud);
PointCloud read_point_cloud(const std::string& path);

/// One "ix iy iz value" line per active voxel.
void write_occupancy(const std::string& path, const VoxelGrid& grid,
                     const std::vector<uint8_t>& alpha);
std::vector<uint8_t> read_occupancy(const std::string& path,
                                    const VoxelGrid& grid);

SceneConfig read_scene_config(const std::string& path);
void write_scene_config(const std::string& path, const SceneConfig& cfg);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// FNV-1a over the file bytes.
uint64_t hash_file(const std::string& path);

}  // namespace nlos
