#include "uavrecon/ply.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "uavrecon/errors.hpp"

namespace uavrecon {

namespace {

void put_f32_le(std::string& out, float f) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>(bits & 0xffu));
    bits >>= 8;
  }
}

float get_f32_le(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

constexpr std::size_t kRecordBytes = 15;

}  // namespace

void write_ply(const PointCloud& cloud, const std::filesystem::path& path, PlyFormat format) {
  if (cloud.has_colors() && cloud.colors.size() != cloud.points.size()) {
    throw DimensionError("point cloud has " + std::to_string(cloud.colors.size()) + " colors for " +
                         std::to_string(cloud.points.size()) + " points");
  }
  const bool ascii = format == PlyFormat::Ascii;
  std::string out;
  out += "ply\n";
  out += ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
  if (!cloud.frame.empty()) out += "comment frame " + cloud.frame + "\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "end_header\n";

  out.reserve(out.size() + cloud.size() * (ascii ? 48 : kRecordBytes));
  char buf[128];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    const Color8 c = cloud.has_colors() ? cloud.colors[i] : Color8{};
    const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z())};
    if (ascii) {
      const int n = std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %u %u %u\n", xyz[0], xyz[1], xyz[2],
                                  unsigned{c.r}, unsigned{c.g}, unsigned{c.b});
      out.append(buf, static_cast<std::size_t>(n));
    } else {
      for (float f : xyz) put_f32_le(out, f);
      out.push_back(static_cast<char>(c.r));
      out.push_back(static_cast<char>(c.g));
      out.push_back(static_cast<char>(c.b));
    }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(f, line) || line != "ply") throw IoError(path.string() + ": not a PLY file");
  bool ascii = false;
  std::size_t count = 0;
  std::vector<std::string> props;
  PointCloud cloud;
  while (std::getline(f, line)) {
    if (line == "end_header") break;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        ascii = true;
      } else if (fmt != "binary_little_endian") {
        throw IoError(path.string() + ": unsupported PLY format " + fmt);
      }
    } else if (word == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex") throw IoError(path.string() + ": unsupported element " + name);
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(type + " " + name);
    } else if (word == "comment") {
      std::string key;
      ls >> key;
      if (key == "frame") ls >> cloud.frame;
    }
  }
  const std::vector<std::string> expected = {"float x",     "float y",       "float z",
                                             "uchar red",   "uchar green",   "uchar blue"};
  if (props != expected) throw IoError(path.string() + ": unexpected vertex properties");

  cloud.points.resize(count);
  cloud.colors.resize(count);
  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) {
      float x, y, z;
      unsigned r, g, b;
      if (!(f >> x >> y >> z >> r >> g >> b)) throw IoError(path.string() + ": truncated vertex data");
      cloud.points[i] = {x, y, z};
      cloud.colors[i] = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
    }
  } else {
    std::vector<unsigned char> data(count * kRecordBytes);
    f.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (static_cast<std::size_t>(f.gcount()) != data.size()) throw IoError(path.string() + ": truncated vertex data");
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned char* p = data.data() + i * kRecordBytes;
      cloud.points[i] = {get_f32_le(p), get_f32_le(p + 4), get_f32_le(p + 8)};
      cloud.colors[i] = {p[12], p[13], p[14]};
    }
  }
  return cloud;
}

}  // namespace uavrecon
