#include "ndf4d/point_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ndf4d/errors.hpp"

namespace ndf4d {

PointIndex::PointIndex(std::span<const Point3> points, double cell_size) : cell_size_(cell_size) {
  if (!(cell_size > 0)) throw DataError("point index cell size must be positive");
  if (points.size() > std::numeric_limits<std::uint32_t>::max()) throw DataError("point set too large");
  std::vector<LatticeIndex> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) keys[i] = voxel_of(points[i], cell_size_);
  std::vector<std::uint32_t> order(points.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });

  points_.reserve(points.size());
  original_.reserve(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto src = order[i];
    points_.push_back(points[src]);
    original_.push_back(src);
    const LatticeIndex& key = keys[src];
    auto [it, inserted] = cells_.try_emplace(key, Range{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i)});
    it->second.end = static_cast<std::uint32_t>(i + 1);
    if (i == 0) {
      min_cell_ = max_cell_ = key;
    } else {
      min_cell_ = {std::min(min_cell_.x, key.x), std::min(min_cell_.y, key.y), std::min(min_cell_.z, key.z)};
      max_cell_ = {std::max(max_cell_.x, key.x), std::max(max_cell_.y, key.y), std::max(max_cell_.z, key.z)};
    }
  }
}

template <typename Visit>
void PointIndex::visit_shell(const LatticeIndex& c, int r, Visit&& visit) const {
  auto visit_cell = [&](int x, int y, int z) {
    if (x < min_cell_.x || x > max_cell_.x || y < min_cell_.y || y > max_cell_.y || z < min_cell_.z ||
        z > max_cell_.z) {
      return;
    }
    auto it = cells_.find({x, y, z});
    if (it == cells_.end()) return;
    for (std::uint32_t i = it->second.begin; i < it->second.end; ++i) visit(i);
  };
  if (r == 0) {
    visit_cell(c.x, c.y, c.z);
    return;
  }
  for (int dz = -r; dz <= r; ++dz) {
    for (int dy = -r; dy <= r; ++dy) {
      const bool on_face = (std::abs(dz) == r || std::abs(dy) == r);
      if (on_face) {
        for (int dx = -r; dx <= r; ++dx) visit_cell(c.x + dx, c.y + dy, c.z + dz);
      } else {
        visit_cell(c.x - r, c.y + dy, c.z + dz);
        visit_cell(c.x + r, c.y + dy, c.z + dz);
      }
    }
  }
}

std::optional<PointIndex::Hit> PointIndex::nearest(const Point3& p) const {
  if (points_.empty()) return std::nullopt;
  const LatticeIndex center = voxel_of(p, cell_size_);
  // Beyond this ring every occupied cell has been visited.
  const int max_ring = std::max({std::abs(center.x - min_cell_.x), std::abs(center.x - max_cell_.x),
                                 std::abs(center.y - min_cell_.y), std::abs(center.y - max_cell_.y),
                                 std::abs(center.z - min_cell_.z), std::abs(center.z - max_cell_.z)});
  double best_sq = std::numeric_limits<double>::infinity();
  std::uint32_t best = 0;
  for (int r = 0; r <= max_ring; ++r) {
    visit_shell(center, r, [&](std::uint32_t i) {
      const double d = (points_[i] - p).squaredNorm();
      if (d < best_sq || (d == best_sq && original_[i] < original_[best])) {
        best_sq = d;
        best = i;
      }
    });
    // Cells in ring r + 1 are at least r * cell_size away from p.
    const double covered = r * cell_size_;
    if (best_sq <= covered * covered) break;
  }
  return Hit{original_[best], std::sqrt(best_sq)};
}

double PointIndex::nearest_distance(const Point3& p) const {
  const auto hit = nearest(p);
  return hit ? hit->distance : std::numeric_limits<double>::infinity();
}

bool PointIndex::any_within(const Point3& p, double radius) const {
  if (points_.empty()) return false;
  const LatticeIndex center = voxel_of(p, cell_size_);
  const int rings = static_cast<int>(std::ceil(radius / cell_size_));
  for (int dz = -rings; dz <= rings; ++dz) {
    for (int dy = -rings; dy <= rings; ++dy) {
      for (int dx = -rings; dx <= rings; ++dx) {
        auto it = cells_.find(center.offset(dx, dy, dz));
        if (it == cells_.end()) continue;
        for (std::uint32_t i = it->second.begin; i < it->second.end; ++i) {
          if ((points_[i] - p).norm() <= radius) return true;
        }
      }
    }
  }
  return false;
}

}  // namespace ndf4d
