#include "uavrecon/spatial_hash.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace uavrecon {

namespace {

// 21 bits per axis, offset so that negative cells stay distinct.
constexpr std::int64_t kAxisBits = 21;
constexpr std::int64_t kAxisOffset = std::int64_t{1} << (kAxisBits - 1);
constexpr std::int64_t kAxisMask = (std::int64_t{1} << kAxisBits) - 1;

}  // namespace

SpatialHashGrid::SpatialHashGrid(std::span<const Eigen::Vector3d> points, double cell_size)
    : points_(points), cell_(cell_size) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("grid cell size must be positive");
  std::vector<std::int64_t> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = cell_of(points[i]);
    keys[i] = key(c[0], c[1], c[2]);
  }
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0u);
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (keys[a] != keys[b]) return keys[a] < keys[b];
                     return points[a].x() < points[b].x();
                   });
  sorted_x_.resize(order_.size());
  for (std::size_t k = 0; k < order_.size(); ++k) sorted_x_[k] = points[order_[k]].x();
  cells_.reserve(points.size());
  for (std::uint32_t i = 0; i < order_.size();) {
    std::uint32_t j = i;
    const std::int64_t k = keys[order_[i]];
    while (j < order_.size() && keys[order_[j]] == k) ++j;
    cells_.emplace(k, Range{i, j});
    i = j;
  }
}

std::int64_t SpatialHashGrid::key(std::int64_t ix, std::int64_t iy, std::int64_t iz) const {
  return (((ix + kAxisOffset) & kAxisMask) << (2 * kAxisBits)) |
         (((iy + kAxisOffset) & kAxisMask) << kAxisBits) | ((iz + kAxisOffset) & kAxisMask);
}

std::array<std::int64_t, 3> SpatialHashGrid::cell_of(const Eigen::Vector3d& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
          static_cast<std::int64_t>(std::floor(p.y() / cell_)),
          static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

std::optional<SpatialHashGrid::Hit> SpatialHashGrid::nearest(const Eigen::Vector3d& q,
                                                             double max_distance) const {
  const auto c = cell_of(q);
  std::optional<Hit> best;
  // Points farther than `bound` (squared) cannot win; ties at the bound still can.
  double bound = max_distance * max_distance;
  const auto consider = [&](std::uint32_t idx, double d2) {
    if (d2 > bound) return;
    if (!best || d2 < best->squared_distance || (d2 == best->squared_distance && idx < best->index)) {
      best = Hit{idx, d2};
      bound = d2;
    }
  };
  // Squared distance from q to the slab of cell offset `d` along one axis.
  const auto gap2 = [&](double coord, std::int64_t cell, std::int64_t d) {
    if (d == 0) return 0.0;
    const double edge = d < 0 ? static_cast<double>(cell) * cell_ : static_cast<double>(cell + 1) * cell_;
    const double g = coord - edge;
    return g * g;
  };

  for (std::int64_t dx = -1; dx <= 1; ++dx) {
    const double gx = gap2(q.x(), c[0], dx);
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      const double gy = gx + gap2(q.y(), c[1], dy);
      for (std::int64_t dz = -1; dz <= 1; ++dz) {
        if (gy + gap2(q.z(), c[2], dz) > bound) continue;
        const auto it = cells_.find(key(c[0] + dx, c[1] + dy, c[2] + dz));
        if (it == cells_.end()) continue;
        const auto first = sorted_x_.begin() + it->second.begin;
        const auto last = sorted_x_.begin() + it->second.end;
        const auto split = static_cast<std::uint32_t>(std::lower_bound(first, last, q.x()) - sorted_x_.begin());
        for (std::uint32_t k = split; k < it->second.end; ++k) {
          const double ex = sorted_x_[k] - q.x();
          if (ex * ex > bound) break;
          consider(order_[k], (points_[order_[k]] - q).squaredNorm());
        }
        for (std::uint32_t k = split; k-- > it->second.begin;) {
          const double ex = sorted_x_[k] - q.x();
          if (ex * ex > bound) break;
          consider(order_[k], (points_[order_[k]] - q).squaredNorm());
        }
      }
    }
  }
  return best;
}

}  // namespace uavrecon
