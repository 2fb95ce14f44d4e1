#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "ndf4d/lattice.hpp"
#include "ndf4d/types.hpp"

namespace ndf4d {

/// Exact nearest-neighbor search over a fixed point set, bucketed into a
/// uniform grid of cubic cells. The grid only prunes; results equal a brute
/// force scan.
class PointIndex {
 public:
  PointIndex() = default;
  PointIndex(std::span<const Point3> points, double cell_size);

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  double cell_size() const { return cell_size_; }

  struct Hit {
    std::size_t index = 0;
    double distance = std::numeric_limits<double>::infinity();
  };

  /// Nearest stored point; nullopt when the index is empty.
  std::optional<Hit> nearest(const Point3& p) const;
  /// Distance to the nearest stored point (+inf when empty).
  double nearest_distance(const Point3& p) const;
  /// True iff some stored point lies within `radius` (inclusive).
  bool any_within(const Point3& p, double radius) const;

 private:
  struct Range {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
  };

  template <typename Visit>
  void visit_shell(const LatticeIndex& center, int ring, Visit&& visit) const;

  std::vector<Point3> points_;            // sorted by cell
  std::vector<std::uint32_t> original_;   // sorted position -> input index
  std::unordered_map<LatticeIndex, Range, LatticeIndexHash> cells_;
  double cell_size_ = 1.0;
  LatticeIndex min_cell_;
  LatticeIndex max_cell_;
};

}  // namespace ndf4d
