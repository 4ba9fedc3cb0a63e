#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uavrecon/harris.hpp"
#include "uavrecon/image.hpp"

namespace uavrecon {

struct MatchParams {
  int patch_radius = 5;
  int search_radius = 48;  // full-res pixels, square window half-width
  double max_cost = 0.5;   // ZSSD, unit intensities

  void validate() const;
};

/// A match is kept only if the best cost outside this radius of the winner
/// exceeds kRatioGate times the winning cost.
inline constexpr double kRatioGate = 1.2;
inline constexpr double kRatioExclusionRadius = 2.0;

struct Correspondence {
  int u1 = 0;
  int v1 = 0;
  int u2 = 0;
  int v2 = 0;
  double cost = 0.0;
  std::size_t corner_index = 0;  // index into the source corner list
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;
  int frame1 = 0;
  int frame2 = 0;
};

/// Mean of the (2r + 1)^2 patch centred at (u, v).
double patch_mean(const ImageGray& img, int u, int v, int r);

/// Zero-mean sum of squared differences between the patches centred at
/// (u1, v1) in `a` and (u2, v2) in `b`. Throws std::out_of_range when either
/// patch leaves its image.
double zssd_cost(const ImageGray& a, int u1, int v1, const ImageGray& b, int u2, int v2, int r);

/// For each corner, scans every pixel of the search window at the same
/// location in img2 and keeps the ZSSD minimiser if it passes both the
/// max_cost and ratio gates. Ties go to the earliest candidate in raster order.
CorrespondenceSet match_corners(const ImageGray& img1, std::span<const Corner> corners1,
                                const ImageGray& img2, const MatchParams& p);

}  // namespace uavrecon
