#include "uavrecon/rigid_transform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "uavrecon/errors.hpp"

namespace uavrecon {

RigidTransform RigidTransform::from_axis_angle(const Eigen::Vector3d& axis, double angle,
                                               const Eigen::Vector3d& t) {
  RigidTransform out;
  out.R = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  out.T = t;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.R = R.transpose();
  out.T = -(out.R * T);
  return out;
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.R = R * rhs.R;
  out.T = R * rhs.T + T;
  return out;
}

bool RigidTransform::is_valid(double tol) const {
  if (!R.allFinite() || !T.allFinite()) return false;
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return Eigen::AngleAxisd(a.transpose() * b).angle();
}

Eigen::Matrix3d project_to_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

RigidTransform fit_rigid(std::span<const Eigen::Vector3d> src, std::span<const Eigen::Vector3d> dst) {
  if (src.size() != dst.size() || src.empty()) {
    throw std::invalid_argument("fit_rigid needs two equally sized, non-empty point sets");
  }
  Eigen::Vector3d cs = Eigen::Vector3d::Zero();
  Eigen::Vector3d cd = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= static_cast<double>(src.size());
  cd /= static_cast<double>(dst.size());
  Eigen::Matrix3d corr = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) corr += (dst[i] - cd) * (src[i] - cs).transpose();

  RigidTransform out;
  out.R = project_to_rotation(corr);
  out.T = cd - out.R * cs;
  return out;
}

}  // namespace uavrecon
