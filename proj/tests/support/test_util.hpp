#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "uavrecon/image.hpp"

namespace testutil {

inline uavrecon::ImageGray random_gray(int w, int h, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  uavrecon::ImageGray img(w, h);
  for (double& v : img.data()) v = u(rng);
  return img;
}

inline uavrecon::ImageRgb random_rgb(int w, int h, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  uavrecon::ImageRgb img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img(x, y) = {u(rng), u(rng), u(rng)};
  }
  return img;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("uavrecon_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
