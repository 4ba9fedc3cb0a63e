#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace uavrecon {

/// Per-pixel horizontal disparity with a validity mask. Invalid pixels hold 0.
struct DisparityMap {
  int width = 0;
  int height = 0;
  std::vector<double> disp;
  std::vector<std::uint8_t> valid;

  DisparityMap() = default;
  DisparityMap(int w, int h);

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
  double at(int x, int y) const { return disp[index(x, y)]; }
  bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }
  void set(int x, int y, double d) {
    disp[index(x, y)] = d;
    valid[index(x, y)] = 1;
  }
  void invalidate(int x, int y) {
    disp[index(x, y)] = 0.0;
    valid[index(x, y)] = 0;
  }
  std::size_t valid_count() const;

  friend bool operator==(const DisparityMap&, const DisparityMap&) = default;
};

/// Writes `stem`.pgm (16-bit, value = round(disp * 256)) and `stem`_mask.pgm
/// (8-bit, 255 = valid).
void write_disparity(const std::filesystem::path& stem, const DisparityMap& map);
DisparityMap read_disparity(const std::filesystem::path& stem);

}  // namespace uavrecon
