#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavrecon/disparity.hpp"
#include "uavrecon/image.hpp"

namespace uavrecon {

struct StereoRig {
  Intrinsics intr;
  double baseline = 0.5;  // meters

  void validate() const;
};

struct Color8 {
  std::uint8_t r = 255;
  std::uint8_t g = 255;
  std::uint8_t b = 255;
  friend bool operator==(const Color8&, const Color8&) = default;
};

/// Points in meters, optionally colored, tagged with the frame they live in.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Color8> colors;  // empty or one per point
  std::string frame;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
};

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Triangulates every valid pixel with d >= min_disp:
///   z = f_du B / d,  x = (u - u0) z / f_du,  y = (v - v0) z / f_dv.
/// `color`, when given, must match the map's size.
PointCloud disparity_to_points(const DisparityMap& disp, const ImageRgb* color,
                               const StereoRig& rig, double min_disp, std::string frame = {});

/// Single-pixel form of the triangulation above.
Eigen::Vector3d triangulate_pixel(double u, double v, double d, const StereoRig& rig);

/// Pinhole projection (distortion terms ignored). Throws DegenerateError for z <= 0.
Pixel project_point(const Eigen::Vector3d& p, const Intrinsics& intr);

/// Disparity a point at depth z would have on the rig: f_du B / z.
double depth_to_disparity(double z, const StereoRig& rig);

}  // namespace uavrecon
