#pragma once

#include <vector>

#include "uavrecon/image.hpp"

namespace uavrecon {

struct HarrisParams {
  double k = 0.04;
  double window_sigma = 1.5;  // pixels
  /// Absolute floor on R.
  double threshold = 0.0;
  /// Effective threshold is max(threshold, relative_threshold * max R).
  double relative_threshold = 1e-6;
  int grid_cols = 30;
  int grid_rows = 30;
  int max_per_cell = 4;

  void validate() const;
  int window_radius() const;
  /// Distance from the image edge inside which no corner is reported.
  int border_margin() const { return window_radius() + 1; }
};

struct Corner {
  int u = 0;
  int v = 0;
  double response = 0.0;
  friend bool operator==(const Corner&, const Corner&) = default;
};

/// Harris response R = det(M) - k tr(M)^2 for every pixel, where M is the
/// Gaussian-windowed structure tensor of central-difference gradients.
/// Row-major, width x height.
std::vector<double> harris_response(const ImageGray& img, const HarrisParams& p);

/// Corners are strict 3x3 maxima of R above the threshold, bucketed into a
/// grid_cols x grid_rows grid keeping the strongest max_per_cell per cell.
/// Sorted by descending response, ties in raster order.
std::vector<Corner> harris_detect(const ImageGray& img, const HarrisParams& p);

}  // namespace uavrecon
