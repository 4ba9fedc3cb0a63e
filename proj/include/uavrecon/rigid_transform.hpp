#pragma once

#include <span>

#include <Eigen/Core>

namespace uavrecon {

/// p' = R p + T. Solver outputs map world coordinates to camera coordinates.
struct RigidTransform {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d T = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }
  /// Rotation of `angle` radians about `axis` (normalised internally).
  static RigidTransform from_axis_angle(const Eigen::Vector3d& axis, double angle,
                                        const Eigen::Vector3d& t = Eigen::Vector3d::Zero());

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return R * p + T; }
  RigidTransform inverse() const;
  /// (*this) after `rhs`: x -> this(rhs(x)).
  RigidTransform operator*(const RigidTransform& rhs) const;

  /// Checks R^T R = I and det R = +1 within `tol`.
  bool is_valid(double tol = 1e-9) const;
};

/// Geodesic angle between two rotations, radians.
double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

/// Nearest rotation to an arbitrary 3x3 matrix (SVD projection onto SO(3)).
Eigen::Matrix3d project_to_rotation(const Eigen::Matrix3d& m);

/// Least-squares rigid transform taking `src` onto `dst` (centroid
/// subtraction + correlation-matrix SVD, reflection-corrected).
RigidTransform fit_rigid(std::span<const Eigen::Vector3d> src, std::span<const Eigen::Vector3d> dst);

}  // namespace uavrecon
