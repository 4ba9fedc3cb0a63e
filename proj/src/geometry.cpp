#include "uavrecon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uavrecon/errors.hpp"

namespace uavrecon {

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void StereoRig::validate() const {
  intr.validate();
  if (!(baseline > 0.0)) throw std::invalid_argument("stereo baseline must be > 0");
}

Eigen::Vector3d triangulate_pixel(double u, double v, double d, const StereoRig& rig) {
  const double z = rig.intr.f_du * rig.baseline / d;
  return {(u - rig.intr.u0) * z / rig.intr.f_du, (v - rig.intr.v0) * z / rig.intr.f_dv, z};
}

PointCloud disparity_to_points(const DisparityMap& disp, const ImageRgb* color,
                               const StereoRig& rig, double min_disp, std::string frame) {
  if (!(min_disp > 0.0)) throw std::invalid_argument("min_disp must be positive");
  rig.validate();
  if (color && (color->width() != disp.width || color->height() != disp.height)) {
    throw DimensionError("color image does not match disparity map");
  }
  PointCloud cloud;
  cloud.frame = std::move(frame);
  for (int v = 0; v < disp.height; ++v) {
    for (int u = 0; u < disp.width; ++u) {
      if (!disp.is_valid(u, v)) continue;
      const double d = disp.at(u, v);
      if (d < min_disp) continue;
      cloud.points.push_back(triangulate_pixel(u, v, d, rig));
      if (color) {
        const Rgb& c = (*color)(u, v);
        cloud.colors.push_back({to_byte(c.r), to_byte(c.g), to_byte(c.b)});
      }
    }
  }
  return cloud;
}

Pixel project_point(const Eigen::Vector3d& p, const Intrinsics& intr) {
  if (!(p.z() > 0.0)) throw DegenerateError("point is behind the camera");
  return {intr.f_du * p.x() / p.z() + intr.u0, intr.f_dv * p.y() / p.z() + intr.v0};
}

double depth_to_disparity(double z, const StereoRig& rig) { return rig.intr.f_du * rig.baseline / z; }

}  // namespace uavrecon
