#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>

#include "ndf4d/types.hpp"

namespace ndf4d {

/// Integer lattice coordinate (voxel or vertex index at some spacing).
struct LatticeIndex {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;

  friend bool operator==(const LatticeIndex&, const LatticeIndex&) = default;
  friend auto operator<=>(const LatticeIndex& a, const LatticeIndex& b) {
    if (auto c = a.z <=> b.z; c != 0) return c;
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
  LatticeIndex offset(int dx, int dy, int dz) const { return {x + dx, y + dy, z + dz}; }
};

struct LatticeIndexHash {
  std::size_t operator()(const LatticeIndex& k) const noexcept {
    // Teschner et al. spatial hash primes.
    const auto h = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.x)) * 73856093ULL) ^
                   (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.y)) * 19349663ULL) ^
                   (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.z)) * 83492791ULL);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

/// Voxel containing p at spacing `size`: floor(p / size) per axis.
inline LatticeIndex voxel_of(const Point3& p, double size) {
  return {static_cast<std::int32_t>(std::floor(p.x() / size)),
          static_cast<std::int32_t>(std::floor(p.y() / size)),
          static_cast<std::int32_t>(std::floor(p.z() / size))};
}

inline Point3 lattice_point(const LatticeIndex& k, double size) {
  return {k.x * size, k.y * size, k.z * size};
}

}  // namespace ndf4d
