#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "ndf4d/config.hpp"
#include "ndf4d/lattice.hpp"
#include "ndf4d/optimizer.hpp"
#include "ndf4d/types.hpp"

namespace ndf4d {

inline constexpr int kMaxLevels = 8;

/// Corner vertex of a voxel at one resolution level (0 = finest).
struct VertexKey {
  std::int32_t level = 0;
  LatticeIndex index;

  friend bool operator==(const VertexKey&, const VertexKey&) = default;
};

struct VertexKeyHash {
  std::size_t operator()(const VertexKey& k) const noexcept {
    return LatticeIndexHash{}(k.index) ^ (static_cast<std::size_t>(k.level) * 0x9E3779B97F4A7C15ULL);
  }
};

struct StencilEntry {
  VertexKey key;
  std::int32_t vertex = -1;  // -1: vertex not allocated, contributes nothing
  double weight = 0.0;

  bool present() const { return vertex >= 0; }
};

/// The 8 trilinear corners per level touched by one interpolation.
struct Stencil {
  std::array<StencilEntry, 8 * kMaxLevels> entries;
  int size = 0;

  const StencilEntry* begin() const { return entries.data(); }
  const StencilEntry* end() const { return entries.data() + size; }
};

/// Multi-resolution sparse voxel grid with one D-dim feature per allocated
/// corner vertex. Interpolated features are summed over levels.
class FeatureGrid {
 public:
  FeatureGrid() = default;
  FeatureGrid(int levels, int feature_dim, double finest_voxel_size, double level_scale_factor);

  /// Allocates the 8 corners of the containing voxel at every level for every
  /// scan endpoint and sample position, marks endpoint voxels occupied and
  /// draws features uniformly in [-1e-4, 1e-4] from cfg.seed.
  static FeatureGrid allocate(const ScanSequence& seq, std::span<const Point3> sample_positions,
                              const MapConfig& cfg);

  int levels() const { return levels_; }
  int feature_dim() const { return feature_dim_; }
  double voxel_size(int level) const { return voxel_sizes_[static_cast<std::size_t>(level)]; }
  std::size_t vertex_count() const { return keys_.size(); }

  /// Ensures all 8 corners of p's voxel exist at every level. Parameters
  /// are (re)sized by reset_params() or initialize_features() afterwards.
  void touch(const Point3& p);
  void touch_voxel(int level, const LatticeIndex& voxel);
  void mark_occupied(const Point3& p);

  /// Sizes the parameter block to the vertex count with zero features.
  void reset_params();
  /// reset_params() then uniform features in [-scale, scale], vertex order.
  void initialize_features(std::uint64_t seed, double scale = 1e-4);

  /// Appends a vertex key; returns its index. Throws if the key exists.
  std::int32_t add_vertex(const VertexKey& key);
  void add_occupied(const LatticeIndex& voxel) { occupancy_.insert(voxel); }

  std::optional<std::int32_t> find(const VertexKey& key) const;
  const VertexKey& key(std::int32_t vertex) const { return keys_[static_cast<std::size_t>(vertex)]; }
  const std::vector<VertexKey>& keys() const { return keys_; }

  /// Sum over levels of the trilinear interpolation at p. Absent corners
  /// contribute zero but still appear in the stencil.
  Eigen::VectorXd interpolate(const Point3& p, Stencil* stencil = nullptr) const;
  void interpolate_into(const Point3& p, double* out, Stencil& stencil) const;

  /// grad[v] += weight * upstream for each present stencil vertex.
  void scatter_grad(const Stencil& stencil, std::span<const double> upstream);

  /// Finest-level voxels containing at least one scan endpoint.
  const std::unordered_set<LatticeIndex, LatticeIndexHash>& occupancy() const { return occupancy_; }

  ParamBlock& params() { return params_; }
  const ParamBlock& params() const { return params_; }
  Eigen::Ref<const Eigen::VectorXd> feature(std::int32_t vertex) const { return params_.value.col(vertex); }

  void apply_adam(const Adam& adam) { adam.apply(params_); }

 private:
  std::int32_t insert_vertex(const VertexKey& key);

  int levels_ = 0;
  int feature_dim_ = 0;
  std::vector<double> voxel_sizes_;
  std::unordered_map<VertexKey, std::int32_t, VertexKeyHash> index_;
  std::vector<VertexKey> keys_;
  ParamBlock params_;  // feature_dim x vertex_count, column per vertex
  std::unordered_set<LatticeIndex, LatticeIndexHash> occupancy_;
};

}  // namespace ndf4d
