#include "uavrecon/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace uavrecon {

namespace {

bool patch_inside(const ImageGray& img, int u, int v, int r) {
  return u - r >= 0 && v - r >= 0 && u + r < img.width() && v + r < img.height();
}

constexpr int kLanes = 8;

struct Candidate {
  int u;
  int v;
  double cost;
};


using Lanes = Eigen::Array<double, kLanes, 1>;

// Sums the ZSSD of kLanes candidates (u0 .. u0+kLanes-1, v) row by row,
// stopping once every partial sum exceeds `limit`. Returns false in that case.
bool accumulate_block(const ImageGray& img2, int w2, int u0, int v, int r, const std::vector<double>& centred,
                      const double* mb, double limit, double* out) {
  const Lanes mean = Eigen::Map<const Lanes>(mb);
  Lanes sum = Lanes::Zero();
  for (int dy = -r, k = 0; dy <= r; ++dy) {
    const double* row = &img2.data()[static_cast<std::size_t>((v + dy) * w2 + u0)];
    for (int dx = -r; dx <= r; ++dx, ++k) {
      const Lanes t = centred[static_cast<std::size_t>(k)] - (Eigen::Map<const Lanes>(row + dx) - mean);
      sum += t * t;
    }
    if ((sum > limit).all()) return false;
  }
  Eigen::Map<Lanes> dst(out);
  dst = sum;
  return true;
}

// patch_mean for kLanes horizontally adjacent centres, same summation order.
void patch_means(const ImageGray& img, int u0, int v, int r, double* out) {
  Lanes sum = Lanes::Zero();
  const int w = img.width();
  for (int y = v - r; y <= v + r; ++y) {
    const double* row = &img.data()[static_cast<std::size_t>(y * w + u0)];
    for (int x = -r; x <= r; ++x) sum += Eigen::Map<const Lanes>(row + x);
  }
  const int side = 2 * r + 1;
  Eigen::Map<Lanes> dst(out);
  dst = sum / static_cast<double>(side * side);
}

bool accumulate_tail(const ImageGray& img2, int w2, int u0, int v, int r, int n, const std::vector<double>& centred,
                     const double* mb, double limit, double* out) {
  for (int l = 0; l < n; ++l) {
    out[l] = 0.0;
    for (int dy = -r, k = 0; dy <= r; ++dy) {
      const double* row = &img2.data()[static_cast<std::size_t>((v + dy) * w2 + u0 + l)];
      for (int dx = -r; dx <= r; ++dx, ++k) {
        const double t = centred[static_cast<std::size_t>(k)] - (row[dx] - mb[l]);
        out[l] += t * t;
      }
      if (out[l] > limit) break;
    }
  }
  bool alive = false;
  for (int l = 0; l < n; ++l) alive |= out[l] <= limit;
  return alive;
}

}  // namespace

void MatchParams::validate() const {
  if (patch_radius < 1) throw std::invalid_argument("match patch_radius must be >= 1");
  if (search_radius < 1) throw std::invalid_argument("match search_radius must be >= 1");
  if (!(max_cost >= 0.0)) throw std::invalid_argument("match max_cost must be >= 0");
}

double patch_mean(const ImageGray& img, int u, int v, int r) {
  double sum = 0.0;
  for (int y = v - r; y <= v + r; ++y) {
    for (int x = u - r; x <= u + r; ++x) sum += img(x, y);
  }
  const int side = 2 * r + 1;
  return sum / (side * side);
}

double zssd_cost(const ImageGray& a, int u1, int v1, const ImageGray& b, int u2, int v2, int r) {
  if (!patch_inside(a, u1, v1, r) || !patch_inside(b, u2, v2, r)) {
    throw std::out_of_range("ZSSD patch leaves the image at (" + std::to_string(u1) + "," +
                            std::to_string(v1) + ") / (" + std::to_string(u2) + "," +
                            std::to_string(v2) + ")");
  }
  const double ma = patch_mean(a, u1, v1, r);
  const double mb = patch_mean(b, u2, v2, r);
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double t = (a(u1 + dx, v1 + dy) - ma) - (b(u2 + dx, v2 + dy) - mb);
      sum += t * t;
    }
  }
  return sum;
}

CorrespondenceSet match_corners(const ImageGray& img1, std::span<const Corner> corners1,
                                const ImageGray& img2, const MatchParams& p) {
  p.validate();
  CorrespondenceSet out;
  const int r = p.patch_radius;
  const int side = 2 * r + 1;
  if (corners1.empty() || img2.width() < side || img2.height() < side) return out;

  // Patch means of img2, computed exactly as zssd_cost does so that the
  // accumulated costs below are bit-identical to zssd_cost.
  const int w2 = img2.width();
  std::vector<double> mean2(img2.data().size(), 0.0);
  for (int v = r; v + r < img2.height(); ++v) {
    int u = r;
    for (; u + kLanes - 1 + r < w2; u += kLanes) patch_means(img2, u, v, r, &mean2[static_cast<std::size_t>(v * w2 + u)]);
    for (; u + r < w2; ++u) mean2[static_cast<std::size_t>(v * w2 + u)] = patch_mean(img2, u, v, r);
  }

  std::vector<double> centred(static_cast<std::size_t>(side * side));
  std::vector<Candidate> kept;
  const double excl2 = kRatioExclusionRadius * kRatioExclusionRadius;
  int last_du = 0;
  int last_dv = 0;

  for (std::size_t ci = 0; ci < corners1.size(); ++ci) {
    const Corner& c = corners1[ci];
    if (!patch_inside(img1, c.u, c.v, r)) continue;
    const double ma = patch_mean(img1, c.u, c.v, r);
    for (int dy = -r, k = 0; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx, ++k) centred[static_cast<std::size_t>(k)] = img1(c.u + dx, c.v + dy) - ma;
    }

    const int u_lo = std::max(c.u - p.search_radius, r);
    const int u_hi = std::min(c.u + p.search_radius, w2 - 1 - r);
    const int v_lo = std::max(c.v - p.search_radius, r);
    const int v_hi = std::min(c.v + p.search_radius, img2.height() - 1 - r);

    // Any candidate costing more than kRatioGate * min(best, max_cost) can
    // neither win nor change the ratio-gate outcome, so its sum is abandoned.
    // Runs of kLanes horizontally adjacent candidates are accumulated together;
    // each candidate still sums its patch in zssd_cost order.
    kept.clear();
    double best = std::numeric_limits<double>::infinity();
    double limit = kRatioGate * p.max_cost;
    // Costs near the previous match's displacement give an early, valid
    // upper bound on the best cost.
    for (int sy = -1; sy <= 1; ++sy) {
      for (int sx = -1; sx <= 1; ++sx) {
        const int u = c.u + last_du + sx;
        const int v = c.v + last_dv + sy;
        if (u < u_lo || u > u_hi || v < v_lo || v > v_hi) continue;
        limit = std::min(limit, kRatioGate * zssd_cost(img1, c.u, c.v, img2, u, v, r));
      }
    }
    for (int v = v_lo; v <= v_hi; ++v) {
      for (int u0 = u_lo; u0 <= u_hi; u0 += kLanes) {
        const int n = std::min(kLanes, u_hi - u0 + 1);
        const double* mb = &mean2[static_cast<std::size_t>(v * w2 + u0)];
        double sum[kLanes] = {};
        const bool alive = n == kLanes ? accumulate_block(img2, w2, u0, v, r, centred, mb, limit, sum)
                                       : accumulate_tail(img2, w2, u0, v, r, n, centred, mb, limit, sum);
        if (!alive) continue;
        for (int l = 0; l < n; ++l) {
          if (sum[l] > limit) continue;
          kept.push_back({u0 + l, v, sum[l]});
          if (sum[l] < best) {
            best = sum[l];
            limit = kRatioGate * std::min(best, p.max_cost);
          }
        }
      }
    }
    if (kept.empty() || !(best <= p.max_cost)) continue;

    const Candidate* winner = nullptr;
    for (const auto& k : kept) {
      if (k.cost == best) {
        winner = &k;
        break;
      }
    }
    double second = std::numeric_limits<double>::infinity();
    for (const auto& k : kept) {
      const double du = k.u - winner->u;
      const double dv = k.v - winner->v;
      if (du * du + dv * dv > excl2) second = std::min(second, k.cost);
    }
    if (!(second > kRatioGate * best)) continue;
    out.pairs.push_back({c.u, c.v, winner->u, winner->v, best, ci});
    last_du = winner->u - c.u;
    last_dv = winner->v - c.v;
  }
  return out;
}

}  // namespace uavrecon
