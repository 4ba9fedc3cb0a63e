#pragma once

#include <vector>

#include "uavrecon/geometry.hpp"
#include "uavrecon/rigid_transform.hpp"

namespace uavrecon {

struct IcpParams {
  int max_iterations = 20;
  double max_pair_distance = 1.0;  // meters
  double convergence_eps = 1e-4;   // meters of RMS change
  int subsample_stride = 4;

  void validate() const;
};

struct IcpResult {
  RigidTransform transform;  // source -> target
  double rms = 0.0;          // after the final update
  int iterations_used = 0;
  bool converged = false;
  std::size_t pairs = 0;     // correspondences in the final iteration
  /// RMS of each iteration's correspondences before its update, followed by
  /// the final RMS.
  std::vector<double> rms_history;
};

/// Point-to-point ICP. Correspondences come from a uniform hash grid over the
/// target with cell size max_pair_distance; pairs farther apart are dropped.
/// Throws SolveError when an iteration finds no correspondences.
IcpResult icp_register(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                       const IcpParams& p);

}  // namespace uavrecon
