#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "uavrecon/rigid_transform.hpp"

namespace uavrecon {

struct TrajectorySample {
  int frame_index = 0;
  RigidTransform pose;  // camera -> world
  double speed = 0.0;   // m/s
  double cumulative_distance = 0.0;  // m
  double turn_angle = 0.0;           // degrees, in [0, 180]
};

/// Speed, travelled distance and heading change along camera-to-world poses
/// spaced `frame_dt` seconds apart. Frame indices default to 0, 1, 2, ...
std::vector<TrajectorySample> trajectory_metrics(std::span<const RigidTransform> poses, double frame_dt,
                                                 std::span<const int> frame_indices = {});

/// One line per sample: frame_index tx ty tz r00 .. r22 speed distance turn,
/// space separated, 9 significant digits.
void write_trajectory(const std::filesystem::path& path, std::span<const TrajectorySample> samples);
std::vector<TrajectorySample> read_trajectory(const std::filesystem::path& path);

}  // namespace uavrecon
