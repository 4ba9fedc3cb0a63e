#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "uavrecon/errors.hpp"
#include "uavrecon/icp.hpp"
#include "uavrecon/spatial_hash.hpp"

using namespace uavrecon;

namespace {

// Random points with a minimum spacing, so nearest neighbours are unambiguous.
PointCloud spread_cloud(int n, double extent, double min_gap, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, extent);
  PointCloud c;
  while (static_cast<int>(c.size()) < n) {
    const Eigen::Vector3d p(u(rng), u(rng), u(rng));
    bool ok = true;
    for (const auto& q : c.points) ok = ok && (p - q).norm() >= min_gap;
    if (ok) c.points.push_back(p);
  }
  return c;
}

PointCloud transformed(const PointCloud& c, const RigidTransform& t) {
  PointCloud out;
  for (const auto& p : c.points) out.points.push_back(t.apply(p));
  return out;
}

IcpParams tight() {
  IcpParams p;
  p.max_iterations = 100;
  p.convergence_eps = 1e-12;
  p.subsample_stride = 1;
  p.max_pair_distance = 1.0;
  return p;
}

}  // namespace

TEST(FitRigid, RecoversExactTransform) {
  std::mt19937 rng(1);
  const PointCloud src = spread_cloud(30, 5.0, 0.0, rng);
  const RigidTransform t = RigidTransform::from_axis_angle({1, -2, 0.5}, 0.7, {3, -1, 2});
  const PointCloud dst = transformed(src, t);
  const RigidTransform fit = fit_rigid(src.points, dst.points);
  EXPECT_LT(rotation_angle_between(fit.R, t.R), 1e-10);
  EXPECT_LT((fit.T - t.T).norm(), 1e-10);
}

TEST(FitRigid, PlanarMirrorDoesNotProduceReflection) {
  const std::vector<Eigen::Vector3d> src = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  std::vector<Eigen::Vector3d> dst;
  for (const auto& p : src) dst.emplace_back(-p.x(), p.y(), p.z());
  EXPECT_TRUE(fit_rigid(src, dst).is_valid());
}

TEST(SpatialHash, NearestMatchesBruteForce) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 800; ++i) pts.emplace_back(u(rng), u(rng), 0.3 * u(rng));
  pts.push_back(pts[17]);  // exact duplicate: the lower index must win
  const double cell = 0.6;
  const SpatialHashGrid grid(pts, cell);
  for (int q = 0; q < 500; ++q) {
    const Eigen::Vector3d query = q == 0 ? pts[17] : Eigen::Vector3d(u(rng), u(rng), 0.3 * u(rng));
    const double radius = q % 2 ? cell : 0.25;
    std::optional<std::uint32_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::uint32_t i = 0; i < pts.size(); ++i) {
      const double d = (pts[i] - query).squaredNorm();
      if (d <= radius * radius && d < best_d) {
        best_d = d;
        best = i;
      }
    }
    const auto hit = grid.nearest(query, radius);
    ASSERT_EQ(hit.has_value(), best.has_value()) << q;
    if (hit) {
      EXPECT_EQ(hit->index, *best);
      EXPECT_DOUBLE_EQ(hit->squared_distance, best_d);
    }
  }
}

TEST(Icp, SelfRegistrationIsIdentity) {
  std::mt19937 rng(3);
  const PointCloud c = spread_cloud(200, 6.0, 0.2, rng);
  const IcpResult r = icp_register(c, c, RigidTransform::identity(), IcpParams{});
  EXPECT_LT((r.transform.R - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_LT(r.transform.T.norm(), 1e-12);
  EXPECT_NEAR(r.rms, 0.0, 1e-12);
  EXPECT_EQ(r.iterations_used, 1);
  EXPECT_TRUE(r.converged);
}

TEST(Icp, RecoversFiveDegreeRotationAndShift) {
  std::mt19937 rng(4);
  const PointCloud src = spread_cloud(300, 4.0, 0.5, rng);
  const Eigen::Vector3d centre(2.0, 2.0, 2.0);
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(5.0 * std::numbers::pi / 180.0, Eigen::Vector3d(0.3, 0.2, 1.0).normalized())
                                  .toRotationMatrix();
  RigidTransform truth;
  truth.R = rot;
  truth.T = centre - rot * centre + Eigen::Vector3d(0.2, 0.0, 0.0);
  const PointCloud dst = transformed(src, truth);
  const IcpResult r = icp_register(src, dst, RigidTransform::identity(), tight());
  EXPECT_TRUE(r.converged);
  EXPECT_LT(rotation_angle_between(r.transform.R, truth.R), 1e-6);
  EXPECT_LT((r.transform.T - truth.T).norm(), 1e-6);
  EXPECT_LE(r.iterations_used, 100);
  EXPECT_TRUE(r.transform.is_valid());
}

TEST(Icp, RmsIsNonIncreasing) {
  std::mt19937 rng(5);
  const PointCloud src = spread_cloud(300, 4.0, 0.5, rng);
  const RigidTransform truth = RigidTransform::from_axis_angle({0, 0, 1}, 0.06, {0.15, -0.1, 0.05});
  const IcpResult r = icp_register(src, transformed(src, truth), RigidTransform::identity(), tight());
  ASSERT_GE(r.rms_history.size(), 2u);
  for (std::size_t i = 1; i < r.rms_history.size(); ++i) EXPECT_LE(r.rms_history[i], r.rms_history[i - 1] + 1e-12);
}

TEST(Icp, UndoesInitialOffsetWhenRegisteringToItself) {
  std::mt19937 rng(6);
  const PointCloud c = spread_cloud(300, 4.0, 0.5, rng);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Vector3d t = Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized() * 0.2;
    const RigidTransform init = RigidTransform::from_axis_angle({n(rng), n(rng), n(rng)}, 0.05, t);
    const IcpResult r = icp_register(c, c, init, tight());
    EXPECT_LT((r.transform.R - Eigen::Matrix3d::Identity()).norm(), 1e-6);
    EXPECT_LT(r.transform.T.norm(), 1e-6);
  }
}

TEST(Icp, DisjointCloudsFail) {
  std::mt19937 rng(7);
  const PointCloud a = spread_cloud(50, 1.0, 0.0, rng);
  const PointCloud b = transformed(a, RigidTransform::from_axis_angle({0, 0, 1}, 0.0, {100, 0, 0}));
  IcpParams p;
  p.max_pair_distance = 0.5;
  EXPECT_THROW(icp_register(a, b, RigidTransform::identity(), p), SolveError);
}

TEST(Icp, RejectsEmptyCloudsAndBadParams) {
  PointCloud a;
  a.points.push_back({0, 0, 0});
  EXPECT_THROW(icp_register(a, PointCloud{}, RigidTransform::identity(), IcpParams{}), std::invalid_argument);
  IcpParams p;
  p.max_pair_distance = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
