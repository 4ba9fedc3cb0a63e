#include <cmath>

#include "uavrecon/disparity.hpp"
#include "uavrecon/errors.hpp"
#include "uavrecon/image_io.hpp"

namespace uavrecon {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  std::filesystem::path p = stem;
  p += suffix;
  return p;
}

}  // namespace

DisparityMap::DisparityMap(int w, int h) : width(w), height(h) {
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  disp.assign(n, 0.0);
  valid.assign(n, 0);
}

std::size_t DisparityMap::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid) n += v != 0;
  return n;
}

void write_disparity(const std::filesystem::path& stem, const DisparityMap& map) {
  NetpbmRaster values{map.width, map.height, 1, 65535, {}};
  NetpbmRaster mask{map.width, map.height, 1, 255, {}};
  values.samples.resize(map.disp.size());
  mask.samples.resize(map.disp.size());
  for (std::size_t i = 0; i < map.disp.size(); ++i) {
    const long q = std::lround(map.disp[i] * 256.0);
    if (q < 0 || q > 65535) throw IoError("disparity out of 16-bit range");
    values.samples[i] = static_cast<std::uint16_t>(q);
    mask.samples[i] = map.valid[i] ? 255 : 0;
  }
  write_netpbm(with_suffix(stem, ".pgm"), values);
  write_netpbm(with_suffix(stem, "_mask.pgm"), mask);
}

DisparityMap read_disparity(const std::filesystem::path& stem) {
  const NetpbmRaster values = read_netpbm(with_suffix(stem, ".pgm"));
  const NetpbmRaster mask = read_netpbm(with_suffix(stem, "_mask.pgm"));
  if (values.channels != 1 || mask.channels != 1 || values.width != mask.width ||
      values.height != mask.height) {
    throw IoError("disparity and mask files disagree: " + stem.string());
  }
  DisparityMap map(values.width, values.height);
  for (std::size_t i = 0; i < map.disp.size(); ++i) {
    map.valid[i] = mask.samples[i] != 0;
    map.disp[i] = map.valid[i] ? values.samples[i] / 256.0 : 0.0;
  }
  return map;
}

}  // namespace uavrecon
