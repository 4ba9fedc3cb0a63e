#include "uavrecon/icp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "uavrecon/errors.hpp"
#include "uavrecon/spatial_hash.hpp"

namespace uavrecon {

namespace {

double rms_of(const RigidTransform& t, const std::vector<Eigen::Vector3d>& src,
              const std::vector<Eigen::Vector3d>& dst) {
  double sum = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) sum += (t.apply(src[i]) - dst[i]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(src.size()));
}

}  // namespace

void IcpParams::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("icp max_iterations must be >= 1");
  if (!(max_pair_distance > 0.0)) throw std::invalid_argument("icp max_pair_distance must be > 0");
  if (!(convergence_eps > 0.0)) throw std::invalid_argument("icp convergence_eps must be > 0");
  if (subsample_stride < 1) throw std::invalid_argument("icp subsample_stride must be >= 1");
}

IcpResult icp_register(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                       const IcpParams& p) {
  p.validate();
  if (source.empty() || target.empty()) throw std::invalid_argument("ICP needs two non-empty clouds");
  if (!init.is_valid(1e-6)) throw std::invalid_argument("ICP initial transform is not rigid");

  const SpatialHashGrid grid(target.points, p.max_pair_distance);
  std::vector<Eigen::Vector3d> sampled;
  for (std::size_t i = 0; i < source.points.size(); i += static_cast<std::size_t>(p.subsample_stride)) {
    sampled.push_back(source.points[i]);
  }

  IcpResult result;
  result.transform = init;
  std::vector<Eigen::Vector3d> src;
  std::vector<Eigen::Vector3d> dst;
  for (int it = 1; it <= p.max_iterations; ++it) {
    src.clear();
    dst.clear();
    for (const auto& s : sampled) {
      const auto hit = grid.nearest(result.transform.apply(s), p.max_pair_distance);
      if (!hit) continue;
      src.push_back(s);
      dst.push_back(target.points[hit->index]);
    }
    if (src.empty()) {
      throw SolveError("ICP found no correspondences within " + std::to_string(p.max_pair_distance) +
                       " m at iteration " + std::to_string(it));
    }
    const double before = rms_of(result.transform, src, dst);
    result.rms_history.push_back(before);

    // Refitting from the raw source points is the composition of the
    // incremental update with the current estimate.
    result.transform = fit_rigid(src, dst);
    result.rms = rms_of(result.transform, src, dst);
    result.iterations_used = it;
    result.pairs = src.size();
    if (std::abs(before - result.rms) < p.convergence_eps) {
      result.converged = true;
      break;
    }
  }
  result.rms_history.push_back(result.rms);
  return result;
}

}  // namespace uavrecon
