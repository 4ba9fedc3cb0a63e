#include "uavrecon/epnp.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "uavrecon/errors.hpp"

namespace uavrecon {

namespace {

using Vector12d = Eigen::Matrix<double, 12, 1>;
using Matrix12d = Eigen::Matrix<double, 12, 12>;
using Matrix6x10d = Eigen::Matrix<double, 6, 10>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

constexpr std::array<std::array<int, 2>, 6> kPairs = {{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// Relative spread below which the scatter is treated as rank deficient.
constexpr double kDegenerateRatio = 1e-6;

Eigen::Vector3d control_point(const Vector12d& x, int j) { return x.segment<3>(3 * j); }

// Rows: the six control-point pairs. Columns: coefficients of the products
// b11 b12 b22 b13 b23 b33 b14 b24 b34 b44 in |x_a - x_b|^2, x = sum b_k v_k.
Matrix6x10d distance_coefficients(const std::array<Vector12d, 4>& v) {
  Matrix6x10d L;
  for (int row = 0; row < 6; ++row) {
    const auto [a, b] = kPairs[static_cast<std::size_t>(row)];
    std::array<Eigen::Vector3d, 4> dv;
    for (int k = 0; k < 4; ++k) {
      dv[static_cast<std::size_t>(k)] = control_point(v[static_cast<std::size_t>(k)], a) -
                                        control_point(v[static_cast<std::size_t>(k)], b);
    }
    L(row, 0) = dv[0].dot(dv[0]);
    L(row, 1) = 2.0 * dv[0].dot(dv[1]);
    L(row, 2) = dv[1].dot(dv[1]);
    L(row, 3) = 2.0 * dv[0].dot(dv[2]);
    L(row, 4) = 2.0 * dv[1].dot(dv[2]);
    L(row, 5) = dv[2].dot(dv[2]);
    L(row, 6) = 2.0 * dv[0].dot(dv[3]);
    L(row, 7) = 2.0 * dv[1].dot(dv[3]);
    L(row, 8) = 2.0 * dv[2].dot(dv[3]);
    L(row, 9) = dv[3].dot(dv[3]);
  }
  return L;
}

Eigen::Matrix<double, 10, 1> products(const Eigen::Vector4d& b) {
  Eigen::Matrix<double, 10, 1> p;
  p << b(0) * b(0), b(0) * b(1), b(1) * b(1), b(0) * b(2), b(1) * b(2), b(2) * b(2),
      b(0) * b(3), b(1) * b(3), b(2) * b(3), b(3) * b(3);
  return p;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Vector6d& rhs) {
  return A.colPivHouseholderQr().solve(rhs);
}

// Approximate betas from a subset of the product columns, as in the
// reference EPnP formulation.
Eigen::Vector4d betas_n1(const std::array<Vector12d, 4>& v, const std::array<Eigen::Vector3d, 4>& cw) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& [a, b] : kPairs) {
    num += (cw[static_cast<std::size_t>(a)] - cw[static_cast<std::size_t>(b)]).norm();
    den += (control_point(v[0], a) - control_point(v[0], b)).norm();
  }
  return {den > 0.0 ? num / den : 0.0, 0.0, 0.0, 0.0};
}

Eigen::Vector4d betas_n2(const Matrix6x10d& L, const Vector6d& rho) {
  Eigen::MatrixXd A(6, 3);
  A << L.col(0), L.col(1), L.col(2);
  const Eigen::VectorXd s = least_squares(A, rho);
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  b(0) = std::sqrt(std::abs(s(0)));
  b(1) = std::sqrt(std::abs(s(2)));
  if (s(1) < 0.0) b(0) = -b(0);
  return b;
}

Eigen::Vector4d betas_n3(const Matrix6x10d& L, const Vector6d& rho) {
  Eigen::MatrixXd A(6, 5);
  A << L.col(0), L.col(1), L.col(2), L.col(3), L.col(4);
  const Eigen::VectorXd s = least_squares(A, rho);
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  b(0) = std::sqrt(std::abs(s(0)));
  b(1) = std::sqrt(std::abs(s(2)));
  if (s(1) < 0.0) b(0) = -b(0);
  b(2) = b(0) != 0.0 ? s(3) / b(0) : 0.0;
  return b;
}

Eigen::Vector4d betas_n4(const Matrix6x10d& L, const Vector6d& rho) {
  Eigen::MatrixXd A(6, 4);
  A << L.col(0), L.col(1), L.col(3), L.col(6);
  const Eigen::VectorXd s = least_squares(A, rho);
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  b(0) = std::sqrt(std::abs(s(0)));
  if (b(0) != 0.0) {
    const double sign = s(0) < 0.0 ? -1.0 : 1.0;
    b(1) = sign * s(1) / b(0);
    b(2) = sign * s(2) / b(0);
    b(3) = sign * s(3) / b(0);
  }
  return b;
}

// Gauss-Newton on the six squared-distance residuals, over the first `dims`
// betas.
Eigen::Vector4d refine_betas(const Matrix6x10d& L, const Vector6d& rho, Eigen::Vector4d b, int dims) {
  constexpr int kIterations = 10;
  for (int it = 0; it < kIterations; ++it) {
    const Vector6d r = rho - L * products(b);
    Eigen::Matrix<double, 6, 4> J;
    for (int row = 0; row < 6; ++row) {
      const auto l = L.row(row);
      J(row, 0) = 2 * l(0) * b(0) + l(1) * b(1) + l(3) * b(2) + l(6) * b(3);
      J(row, 1) = l(1) * b(0) + 2 * l(2) * b(1) + l(4) * b(2) + l(7) * b(3);
      J(row, 2) = l(3) * b(0) + l(4) * b(1) + 2 * l(5) * b(2) + l(8) * b(3);
      J(row, 3) = l(6) * b(0) + l(7) * b(1) + l(8) * b(2) + 2 * l(9) * b(3);
    }
    const Eigen::MatrixXd Jd = J.leftCols(dims);
    const Eigen::VectorXd step = Jd.colPivHouseholderQr().solve(r);
    if (!step.allFinite()) break;
    b.head(dims) += step;
    if (step.norm() <= 1e-15 * (1.0 + b.norm())) break;
  }
  return b;
}

// Real roots of c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0 from the companion
// matrix, each polished by a few Newton steps.
std::vector<double> quartic_real_roots(const std::array<double, 5>& c) {
  std::vector<double> roots;
  if (std::abs(c[4]) < 1e-300) return roots;
  Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 4; ++i) comp(0, i) = -c[static_cast<std::size_t>(3 - i)] / c[4];
  comp(1, 0) = comp(2, 1) = comp(3, 2) = 1.0;
  const Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
  auto f = [&](double x) { return (((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0]; };
  auto df = [&](double x) { return ((4.0 * c[4] * x + 3.0 * c[3]) * x + 2.0 * c[2]) * x + c[1]; };
  for (int i = 0; i < 4; ++i) {
    const std::complex<double> z = es.eigenvalues()(i);
    if (std::abs(z.imag()) > 1e-6 * (1.0 + std::abs(z.real()))) continue;
    double x = z.real();
    for (int it = 0; it < 5; ++it) {
      const double d = df(x);
      if (d == 0.0) break;
      x -= f(x) / d;
    }
    roots.push_back(x);
  }
  return roots;
}

// Grunert's three-point solution: camera-frame positions of world points
// 0, 1, 2 along their viewing rays, up to four candidates.
std::vector<RigidTransform> three_point_poses(const PnpProblem& prob) {
  std::array<Eigen::Vector3d, 3> ray;
  for (std::size_t i = 0; i < 3; ++i) {
    ray[i] = Eigen::Vector3d((prob.image_points[i].u - prob.intr.u0) / prob.intr.f_du,
                             (prob.image_points[i].v - prob.intr.v0) / prob.intr.f_dv, 1.0)
                 .normalized();
  }
  const auto& w = prob.world_points;
  const double a2 = (w[1] - w[2]).squaredNorm();
  const double b2 = (w[0] - w[2]).squaredNorm();
  const double c2 = (w[0] - w[1]).squaredNorm();
  const double ca = ray[1].dot(ray[2]);
  const double cb = ray[0].dot(ray[2]);
  const double cg = ray[0].dot(ray[1]);
  const double amc = (a2 - c2) / b2;
  const double apc = (a2 + c2) / b2;
  const std::array<double, 5> coef = {
      (1.0 + amc) * (1.0 + amc) - 4.0 * a2 / b2 * cg * cg,
      4.0 * (-amc * (1.0 + amc) * cb + 2.0 * a2 / b2 * cg * cg * cb - (1.0 - apc) * ca * cg),
      2.0 * (amc * amc - 1.0 + 2.0 * amc * amc * cb * cb + 2.0 * (b2 - c2) / b2 * ca * ca -
             4.0 * apc * ca * cb * cg + 2.0 * (b2 - a2) / b2 * cg * cg),
      4.0 * (amc * (1.0 - amc) * cb - (1.0 - apc) * ca * cg + 2.0 * c2 / b2 * ca * ca * cb),
      (amc - 1.0) * (amc - 1.0) - 4.0 * c2 / b2 * ca * ca};

  std::vector<RigidTransform> poses;
  const std::vector<Eigen::Vector3d> world3(w.begin(), w.begin() + 3);
  for (const double v : quartic_real_roots(coef)) {
    const double den = 2.0 * (cg - v * ca);
    if (std::abs(den) < 1e-12) continue;
    const double u = ((amc - 1.0) * v * v - 2.0 * amc * cb * v + 1.0 + amc) / den;
    const double q = 1.0 + u * u - 2.0 * u * cg;
    if (!(q > 0.0) || u <= 0.0 || v <= 0.0) continue;
    const double s1 = std::sqrt(c2 / q);
    const std::vector<Eigen::Vector3d> cam = {s1 * ray[0], u * s1 * ray[1], v * s1 * ray[2]};
    poses.push_back(fit_rigid(world3, cam));
  }
  return poses;
}

}  // namespace

ControlPoints choose_control_points(std::span<const Eigen::Vector3d> pw) {
  if (pw.size() < 4) throw std::invalid_argument("control points need at least 4 world points");
  const double n = static_cast<double>(pw.size());
  ControlPoints out;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pw) centroid += p;
  centroid /= n;

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : pw) scatter += (p - centroid) * (p - centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const Eigen::Vector3d lambda = eig.eigenvalues().cwiseMax(0.0);  // ascending
  const double largest = std::sqrt(lambda(2));
  if (!(largest > 0.0) || std::sqrt(lambda(1)) <= kDegenerateRatio * largest) {
    throw DegenerateError("world points are collinear or coincident");
  }
  if (std::sqrt(lambda(0)) <= kDegenerateRatio * largest) {
    throw DegenerateError("world points are coplanar");
  }

  out.world[0] = centroid;
  for (int k = 0; k < 3; ++k) {
    // Principal axes in descending order of spread.
    out.world[static_cast<std::size_t>(k + 1)] =
        centroid + std::sqrt(lambda(2 - k) / n) * eig.eigenvectors().col(2 - k);
  }

  Eigen::Matrix3d basis;
  for (int k = 0; k < 3; ++k) basis.col(k) = out.world[static_cast<std::size_t>(k + 1)] - centroid;
  const Eigen::Matrix3d inv = basis.inverse();
  out.alphas.reserve(pw.size());
  for (const auto& p : pw) {
    const Eigen::Vector3d a = inv * (p - centroid);
    out.alphas.emplace_back(1.0 - a.sum(), a(0), a(1), a(2));
  }
  return out;
}

double mean_reprojection_error(const PnpProblem& prob, const RigidTransform& pose) {
  double total = 0.0;
  for (std::size_t i = 0; i < prob.world_points.size(); ++i) {
    const Pixel px = project_point(pose.apply(prob.world_points[i]), prob.intr);
    total += std::hypot(px.u - prob.image_points[i].u, px.v - prob.image_points[i].v);
  }
  return total / static_cast<double>(prob.world_points.size());
}

namespace {

double squared_reprojection_error(const PnpProblem& prob, const RigidTransform& pose) {
  double total = 0.0;
  for (std::size_t i = 0; i < prob.world_points.size(); ++i) {
    const Eigen::Vector3d c = pose.apply(prob.world_points[i]);
    if (!(c.z() > 0.0)) return std::numeric_limits<double>::infinity();
    const double du = prob.intr.f_du * c.x() / c.z() + prob.intr.u0 - prob.image_points[i].u;
    const double dv = prob.intr.f_dv * c.y() / c.z() + prob.intr.v0 - prob.image_points[i].v;
    total += du * du + dv * dv;
  }
  return total;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace

RigidTransform refine_pose(const PnpProblem& prob, const RigidTransform& init, int iterations) {
  if (prob.world_points.size() != prob.image_points.size()) {
    throw std::invalid_argument("pose refinement: point lists differ in length");
  }
  if (prob.world_points.size() < 3) throw std::invalid_argument("pose refinement needs at least 3 points");
  const Intrinsics& k = prob.intr;
  RigidTransform pose = init;
  double error = squared_reprojection_error(prob, pose);
  for (int it = 0; it < iterations; ++it) {
    Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    for (std::size_t i = 0; i < prob.world_points.size(); ++i) {
      const Eigen::Vector3d c = pose.apply(prob.world_points[i]);
      const double iz = 1.0 / c.z();
      const Eigen::Vector2d r(k.f_du * c.x() * iz + k.u0 - prob.image_points[i].u,
                              k.f_dv * c.y() * iz + k.v0 - prob.image_points[i].v);
      Eigen::Matrix<double, 2, 3> jp;
      jp << k.f_du * iz, 0.0, -k.f_du * c.x() * iz * iz, 0.0, k.f_dv * iz, -k.f_dv * c.y() * iz * iz;
      // Left-multiplied perturbation: c' = exp([w]) c + t.
      Eigen::Matrix<double, 3, 6> jc;
      jc.leftCols<3>() = -skew(c);
      jc.rightCols<3>().setIdentity();
      const Eigen::Matrix<double, 2, 6> j = jp * jc;
      h.noalias() += j.transpose() * j;
      g.noalias() += j.transpose() * r;
    }
    const Eigen::Matrix<double, 6, 1> step = -h.ldlt().solve(g);
    if (!step.allFinite()) break;
    const Eigen::Vector3d w = step.head<3>();
    const double angle = w.norm();
    const Eigen::Matrix3d dr =
        angle > 0.0 ? Eigen::AngleAxisd(angle, w / angle).toRotationMatrix() : Eigen::Matrix3d::Identity();
    RigidTransform next;
    next.R = project_to_rotation(dr * pose.R);
    next.T = dr * pose.T + step.tail<3>();
    const double next_error = squared_reprojection_error(prob, next);
    if (!(next_error < error)) break;
    pose = next;
    error = next_error;
    if (step.norm() < 1e-12) break;
  }
  return pose;
}

PnpSolution epnp_solve_detailed(const PnpProblem& prob) {
  const std::size_t n = prob.world_points.size();
  if (n != prob.image_points.size()) throw std::invalid_argument("EPnP: point lists differ in length");
  if (n < 4) throw std::invalid_argument("EPnP needs at least 4 correspondences, got " + std::to_string(n));
  prob.intr.validate();
  for (std::size_t i = 0; i < n; ++i) {
    if (!prob.world_points[i].allFinite() || !std::isfinite(prob.image_points[i].u) ||
        !std::isfinite(prob.image_points[i].v)) {
      throw std::invalid_argument("EPnP: non-finite input");
    }
  }

  const ControlPoints cp = choose_control_points(prob.world_points);

  // Two rows per correspondence after eliminating the projective depth,
  // written in normalised image coordinates.
  Matrix12d mtm = Matrix12d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (prob.image_points[i].u - prob.intr.u0) / prob.intr.f_du;
    const double y = (prob.image_points[i].v - prob.intr.v0) / prob.intr.f_dv;
    Eigen::Matrix<double, 2, 12> rows = Eigen::Matrix<double, 2, 12>::Zero();
    for (int j = 0; j < 4; ++j) {
      const double a = cp.alphas[i](j);
      rows(0, 3 * j) = a;
      rows(0, 3 * j + 2) = -a * x;
      rows(1, 3 * j + 1) = a;
      rows(1, 3 * j + 2) = -a * y;
    }
    mtm.noalias() += rows.transpose() * rows;
  }
  Eigen::SelfAdjointEigenSolver<Matrix12d> eig(mtm);
  std::array<Vector12d, 4> v;
  for (int k = 0; k < 4; ++k) v[static_cast<std::size_t>(k)] = eig.eigenvectors().col(k);

  const Matrix6x10d L = distance_coefficients(v);
  Vector6d rho;
  for (int row = 0; row < 6; ++row) {
    const auto [a, b] = kPairs[static_cast<std::size_t>(row)];
    rho(row) = (cp.world[static_cast<std::size_t>(a)] - cp.world[static_cast<std::size_t>(b)]).squaredNorm();
  }

  const std::array<Eigen::Vector4d, 4> initial = {betas_n1(v, cp.world), betas_n2(L, rho),
                                                  betas_n3(L, rho), betas_n4(L, rho)};
  PnpSolution best;
  best.reprojection_error = std::numeric_limits<double>::infinity();
  for (int dim = 1; dim <= 4; ++dim) {
    const Eigen::Vector4d b = refine_betas(L, rho, initial[static_cast<std::size_t>(dim - 1)], 4);
    if (!b.allFinite()) continue;
    Vector12d x = Vector12d::Zero();
    for (int k = 0; k < 4; ++k) x += b(k) * v[static_cast<std::size_t>(k)];

    double depth_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < 4; ++j) depth_sum += cp.alphas[i](j) * x(3 * j + 2);
    }
    if (depth_sum < 0.0) x = -x;

    std::array<Eigen::Vector3d, 4> cc;
    for (int j = 0; j < 4; ++j) cc[static_cast<std::size_t>(j)] = control_point(x, j);
    const RigidTransform pose = fit_rigid(cp.world, cc);

    bool in_front = true;
    for (const auto& p : prob.world_points) {
      if (!(pose.apply(p).z() > 0.0)) {
        in_front = false;
        break;
      }
    }
    if (!in_front) continue;
    const double err = mean_reprojection_error(prob, pose);
    if (err < best.reprojection_error) {
      best = {pose, err, dim};
    }
  }
  // With exactly four points the null space is four-dimensional and the
  // distance system has too few equations for the linearized betas, so
  // three-point candidates checked against the fourth point join the ranking.
  if (n == 4) {
    for (const RigidTransform& pose : three_point_poses(prob)) {
      bool in_front = true;
      for (const auto& p : prob.world_points) in_front = in_front && pose.apply(p).z() > 0.0;
      if (!in_front) continue;
      const double err = mean_reprojection_error(prob, pose);
      if (err < best.reprojection_error) best = {pose, err, 4};
    }
  }
  if (best.null_space_dim == 0) throw SolveError("EPnP: every candidate places points behind the camera");
  return best;
}

RigidTransform epnp_solve(const PnpProblem& prob) { return epnp_solve_detailed(prob).pose; }

RigidTransform average_poses(const RigidTransform& left, const RigidTransform& right) {
  const Eigen::Quaterniond ql(left.R);
  Eigen::Quaterniond qr(right.R);
  double dot = ql.coeffs().dot(qr.coeffs());
  if (std::abs(dot) < 1e-6) throw DegenerateError("rotations are antipodal; average is ambiguous");
  if (dot < 0.0) qr.coeffs() = -qr.coeffs();
  Eigen::Quaterniond mean;
  mean.coeffs() = ql.coeffs() + qr.coeffs();
  mean.normalize();
  RigidTransform out;
  out.R = project_to_rotation(mean.toRotationMatrix());
  out.T = 0.5 * (left.T + right.T);
  return out;
}

}  // namespace uavrecon
