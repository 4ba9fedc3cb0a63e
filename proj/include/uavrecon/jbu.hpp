#pragma once

#include "uavrecon/disparity.hpp"
#include "uavrecon/image.hpp"

namespace uavrecon {

inline constexpr int kMaxJbuRadius = 31;

struct JbuParams {
  double sigma_spatial = 7.5;    // low-res pixels
  double sigma_range = 15.0 / 255.0;
  int radius = 5;                // low-res pixels, half-width of the support
  int scale = 2;                 // integer upsampling factor per axis

  void validate() const;
};

/// Joint bilateral upsampling of `low` to the guide's resolution.
///
/// Output pixel p has low-res footprint p / scale. Its value is the
/// normalized sum over valid low-res pixels q in the (2 radius + 1)^2 window
/// around the nearest low-res pixel, weighted by a spatial Gaussian of the
/// footprint distance and a range Gaussian of |guide(p) - guide(q * scale)|.
/// Disparity units are left unchanged. Pixels whose weights sum to zero are
/// invalid.
DisparityMap jbu_upsample(const DisparityMap& low, const ImageGray& guide, const JbuParams& p);

}  // namespace uavrecon
