#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "uavrecon/image.hpp"

namespace uavrecon {

/// Raw netpbm raster as stored on disk.
struct NetpbmRaster {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 for P5, 3 for P6
  int maxval = 255;
  std::vector<std::uint16_t> samples;  // row-major, interleaved channels
};

NetpbmRaster read_netpbm(const std::filesystem::path& path);
/// Writes P5 (channels == 1) or P6 (channels == 3). Samples above 255 are
/// written big-endian as two bytes, per the netpbm convention.
void write_netpbm(const std::filesystem::path& path, const NetpbmRaster& raster);

ImageGray read_pgm(const std::filesystem::path& path);
/// Reads P5 or P6; gray input is replicated into three channels.
ImageRgb read_color_frame(const std::filesystem::path& path);

/// Values are clamped to [0, 1] and rounded to 8 bits.
void write_pgm(const std::filesystem::path& path, const ImageGray& img);
void write_ppm(const std::filesystem::path& path, const ImageRgb& img);

}  // namespace uavrecon
