#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "uavrecon/harris.hpp"
#include "uavrecon/icp.hpp"
#include "uavrecon/image.hpp"
#include "uavrecon/jbu.hpp"
#include "uavrecon/matching.hpp"
#include "uavrecon/stereo.hpp"

namespace uavrecon {

struct PipelineConfig {
  int pair_gap = 10;      // frames between left and right of a virtual pair
  int pair_stride = 10;   // frames between successive pairs
  int low_res_w = 320;
  int low_res_h = 180;
  double baseline = 0.5;    // meters
  double frame_rate = 60.0;  // Hz
  double min_disparity = 2.0;  // full-resolution pixels
  int min_correspondences = 8;
  int max_pose_failures = 3;  // consecutive pose failures tolerated

  /// JBU spatial sigma in full-resolution pixels; divided by the upsampling
  /// factor to obtain the low-res sigma.
  double jbu_sigma_spatial_full = 15.0;

  Intrinsics camera{800.0, 800.0, 319.5, 179.5, 0.0, 0.0, 0.0};
  BpParams bp;
  JbuParams jbu;  // sigma_spatial and scale are derived per run
  HarrisParams harris;
  MatchParams match;
  IcpParams icp;  // icp.max_iterations = 0 disables refinement

  void validate() const;
  JbuParams jbu_for_scale(int scale) const;
};

/// Parses `key = value` lines ('#' starts a comment) over the defaults.
/// Unknown keys, duplicate keys and malformed values throw ConfigError.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
/// Every key with its current value, one per line, in a stable order.
std::string format_config(const PipelineConfig& cfg);
std::vector<std::string> config_keys();

}  // namespace uavrecon
