#include "nlos/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nlos {

namespace {

void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("unexpected end of file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(std::istream& in) {
  const uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

}  // namespace

void write_penumbra_image(const std::string& path, const PenumbraImage& img) {
  auto out = open_out(path, std::ios::binary);
  out.write("NLSI", 4);
  out.put(0x01);
  put_u32(out, static_cast<uint32_t>(img.width));
  put_u32(out, static_cast<uint32_t>(img.height));
  put_u32(out, static_cast<uint32_t>(img.channels));
  for (double v : img.data) put_f32(out, static_cast<float>(v));
  if (!out) throw std::runtime_error("write failed: " + path);
}

PenumbraImage read_penumbra_image(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "NLSI", 4) != 0)
    throw std::runtime_error("not an NLSI image: " + path);
  const int version = in.get();
  if (version != 0x01)
    throw std::runtime_error("unsupported NLSI version in " + path);
  PenumbraImage img;
  img.width = static_cast<int>(get_u32(in));
  img.height = static_cast<int>(get_u32(in));
  img.channels = static_cast<int>(get_u32(in));
  if (img.width <= 0 || img.height <= 0 || img.channels <= 0 ||
      (img.channels != 1 && img.channels != 3))
    throw std::runtime_error("bad NLSI header in " + path);
  const size_t count = static_cast<size_t>(img.width) * img.height * img.channels;
  img.data.resize(count);
  for (size_t i = 0; i < count; ++i) img.data[i] = get_f32(in);
  return img;
}

void write_point_cloud(const std::string& path, const PointCloud& cloud) {
  auto out = open_out(path, std::ios::out);
  out.precision(9);
  for (const Vec3& p : cloud.points)
    out << p.x() << " " << p.y() << " " << p.z() << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

PointCloud read_point_cloud(const std::string& path) {
  auto in = open_in(path, std::ios::in);
  PointCloud cloud;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z))
      throw std::runtime_error("bad point line in " + path);
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

void write_occupancy(const std::string& path, const VoxelGrid& grid,
                     const std::vector<uint8_t>& alpha) {
  if (static_cast<int>(alpha.size()) != grid.count())
    throw std::invalid_argument("write_occupancy: alpha size mismatch");
  auto out = open_out(path, std::ios::out);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int iz = 0; iz < grid.nz; ++iz)
      for (int ix = 0; ix < grid.nx; ++ix) {
        const int k = grid.index(ix, iy, iz);
        if (alpha[k]) out << ix << " " << iy << " " << iz << " 1\n";
      }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<uint8_t> read_occupancy(const std::string& path,
                                    const VoxelGrid& grid) {
  auto in = open_in(path, std::ios::in);
  std::vector<uint8_t> alpha(grid.count(), 0);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int ix, iy, iz;
    double value;
    if (!(ls >> ix >> iy >> iz >> value))
      throw std::runtime_error("bad occupancy line in " + path);
    if (ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny || iz < 0 ||
        iz >= grid.nz)
      throw std::runtime_error("occupancy index out of range in " + path);
    alpha[grid.index(ix, iy, iz)] = value != 0.0 ? 1 : 0;
  }
  return alpha;
}

SceneConfig read_scene_config(const std::string& path) {
  return SceneConfig::from_text(read_text_file(path));
}

void write_scene_config(const std::string& path, const SceneConfig& cfg) {
  write_text_file(path, cfg.to_text());
}

std::string read_text_file(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  auto out = open_out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

uint64_t hash_file(const std::string& path) {
  const std::string bytes = read_text_file(path);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace nlos
