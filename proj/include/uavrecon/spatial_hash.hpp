#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace uavrecon {

/// Uniform grid over 3D points for fixed-radius nearest-neighbour queries.
/// Cells are cubes of side `cell_size`; queries inspect the 27 cells around
/// the query point, so any neighbour within `cell_size` is found.
class SpatialHashGrid {
 public:
  SpatialHashGrid(std::span<const Eigen::Vector3d> points, double cell_size);

  struct Hit {
    std::uint32_t index;
    double squared_distance;
  };

  /// Nearest point within `max_distance` (<= cell size); ties go to the lower index.
  std::optional<Hit> nearest(const Eigen::Vector3d& q, double max_distance) const;

  double cell_size() const { return cell_; }

 private:
  struct Range {
    std::uint32_t begin;
    std::uint32_t end;
  };

  std::int64_t key(std::int64_t ix, std::int64_t iy, std::int64_t iz) const;
  std::array<std::int64_t, 3> cell_of(const Eigen::Vector3d& p) const;

  std::span<const Eigen::Vector3d> points_;
  double cell_;
  std::vector<std::uint32_t> order_;  // point indices grouped by cell, x ascending within a cell
  std::vector<double> sorted_x_;      // x of points_[order_[k]]
  std::unordered_map<std::int64_t, Range> cells_;
};

}  // namespace uavrecon
