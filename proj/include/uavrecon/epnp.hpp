#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "uavrecon/geometry.hpp"
#include "uavrecon/image.hpp"
#include "uavrecon/rigid_transform.hpp"

namespace uavrecon {

struct PnpProblem {
  std::vector<Eigen::Vector3d> world_points;
  std::vector<Pixel> image_points;
  Intrinsics intr;  // distortion terms are ignored
};

/// Four control points in the world frame and, per input point, the
/// barycentric weights that reproduce it (each row sums to 1).
struct ControlPoints {
  std::array<Eigen::Vector3d, 4> world;
  std::vector<Eigen::Vector4d> alphas;
};

/// Centroid plus one point along each principal axis of the scatter, offset
/// by that axis' RMS extent. Throws DegenerateError when the points are
/// collinear (or coincident) or coplanar.
ControlPoints choose_control_points(std::span<const Eigen::Vector3d> world_points);

struct PnpSolution {
  RigidTransform pose;         // world -> camera
  double reprojection_error = 0.0;  // mean, pixels
  int null_space_dim = 0;      // hypothesis that won
};

/// EPnP. Candidates for null-space dimensions 1..4 are each refined by
/// Gauss-Newton on the control-point distances, aligned to the world control
/// points, and ranked by mean reprojection error. With exactly four points
/// the three-point (Grunert) solutions for the first three join the ranking.
/// Throws std::invalid_argument (n < 4 or mismatched sizes), DegenerateError,
/// or SolveError when every candidate puts a point behind the camera.
PnpSolution epnp_solve_detailed(const PnpProblem& prob);
RigidTransform epnp_solve(const PnpProblem& prob);

double mean_reprojection_error(const PnpProblem& prob, const RigidTransform& pose);

/// Gauss-Newton on the summed squared reprojection error, starting from
/// `init`. A step is kept only if it lowers the error; iteration stops after
/// `iterations` steps, on a rejected step, or once the update is negligible.
RigidTransform refine_pose(const PnpProblem& prob, const RigidTransform& init, int iterations = 10);

/// Rig-centre pose from the two virtual-stereo cameras: mean translation and
/// normalised quaternion mean. Throws DegenerateError for rotations ~180
/// degrees apart.
RigidTransform average_poses(const RigidTransform& left, const RigidTransform& right);

}  // namespace uavrecon
