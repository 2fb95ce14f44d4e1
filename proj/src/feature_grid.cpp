#include "ndf4d/feature_grid.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "ndf4d/errors.hpp"

namespace ndf4d {

FeatureGrid::FeatureGrid(int levels, int feature_dim, double finest_voxel_size, double level_scale_factor)
    : levels_(levels), feature_dim_(feature_dim) {
  if (levels < 1 || levels > kMaxLevels) throw ConfigError("feature grid level count out of range");
  if (feature_dim < 1) throw ConfigError("feature dimension must be positive");
  for (int l = 0; l < levels; ++l) {
    voxel_sizes_.push_back(finest_voxel_size * std::pow(level_scale_factor, l));
  }
  params_.resize(feature_dim_, 0);
}

FeatureGrid FeatureGrid::allocate(const ScanSequence& seq, std::span<const Point3> sample_positions,
                                  const MapConfig& cfg) {
  FeatureGrid grid(cfg.levels, cfg.feature_dim, cfg.finest_voxel_size, cfg.level_scale_factor);

  // Deduplicate at voxel granularity first; corner insertion happens once per
  // distinct voxel, in order of first appearance.
  std::vector<std::unordered_set<LatticeIndex, LatticeIndexHash>> seen(static_cast<std::size_t>(grid.levels_));
  auto visit = [&](const Point3& p) {
    for (int l = 0; l < grid.levels_; ++l) {
      const LatticeIndex voxel = voxel_of(p, grid.voxel_size(l));
      if (seen[static_cast<std::size_t>(l)].insert(voxel).second) grid.touch_voxel(l, voxel);
    }
  };
  for (const auto& scan : seq.scans()) {
    for (const auto& p : scan.points_world) {
      visit(p);
      grid.mark_occupied(p);
    }
  }
  for (const auto& p : sample_positions) visit(p);
  grid.initialize_features(cfg.seed);
  return grid;
}

std::int32_t FeatureGrid::insert_vertex(const VertexKey& key) {
  auto [it, inserted] = index_.try_emplace(key, static_cast<std::int32_t>(keys_.size()));
  if (inserted) keys_.push_back(key);
  return it->second;
}

std::int32_t FeatureGrid::add_vertex(const VertexKey& key) {
  if (key.level < 0 || key.level >= levels_) throw DataError("vertex level out of range");
  if (index_.contains(key)) throw DataError("duplicate vertex key");
  return insert_vertex(key);
}

void FeatureGrid::touch_voxel(int level, const LatticeIndex& voxel) {
  for (int c = 0; c < 8; ++c) {
    insert_vertex({level, voxel.offset(c & 1, (c >> 1) & 1, (c >> 2) & 1)});
  }
}

void FeatureGrid::touch(const Point3& p) {
  for (int l = 0; l < levels_; ++l) touch_voxel(l, voxel_of(p, voxel_size(l)));
}

void FeatureGrid::mark_occupied(const Point3& p) { occupancy_.insert(voxel_of(p, voxel_size(0))); }

void FeatureGrid::reset_params() { params_.resize(feature_dim_, static_cast<Eigen::Index>(keys_.size())); }

void FeatureGrid::initialize_features(std::uint64_t seed, double scale) {
  reset_params();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (Eigen::Index v = 0; v < params_.value.cols(); ++v) {
    for (Eigen::Index d = 0; d < params_.value.rows(); ++d) params_.value(d, v) = dist(rng);
  }
}

std::optional<std::int32_t> FeatureGrid::find(const VertexKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void FeatureGrid::interpolate_into(const Point3& p, double* out, Stencil& stencil) const {
  for (int d = 0; d < feature_dim_; ++d) out[d] = 0.0;
  stencil.size = 0;
  for (int l = 0; l < levels_; ++l) {
    const double h = voxel_size(l);
    const Vec3 u = p / h;
    const Vec3 base = u.array().floor();
    const Vec3 frac = u - base;
    const LatticeIndex voxel{static_cast<std::int32_t>(base.x()), static_cast<std::int32_t>(base.y()),
                             static_cast<std::int32_t>(base.z())};
    for (int c = 0; c < 8; ++c) {
      const int dx = c & 1;
      const int dy = (c >> 1) & 1;
      const int dz = (c >> 2) & 1;
      const double w = (dx ? frac.x() : 1.0 - frac.x()) * (dy ? frac.y() : 1.0 - frac.y()) *
                       (dz ? frac.z() : 1.0 - frac.z());
      StencilEntry& e = stencil.entries[static_cast<std::size_t>(stencil.size++)];
      e.key = {l, voxel.offset(dx, dy, dz)};
      e.weight = w;
      auto it = index_.find(e.key);
      e.vertex = (it == index_.end()) ? -1 : it->second;
      if (e.vertex >= 0) {
        const double* f = params_.value.col(e.vertex).data();
        for (int d = 0; d < feature_dim_; ++d) out[d] += w * f[d];
      }
    }
  }
}

Eigen::VectorXd FeatureGrid::interpolate(const Point3& p, Stencil* stencil) const {
  Eigen::VectorXd out(feature_dim_);
  Stencil local;
  interpolate_into(p, out.data(), stencil ? *stencil : local);
  return out;
}

void FeatureGrid::scatter_grad(const Stencil& stencil, std::span<const double> upstream) {
  for (const auto& e : stencil) {
    if (!e.present()) continue;
    double* g = params_.grad.col(e.vertex).data();
    for (int d = 0; d < feature_dim_; ++d) g[d] += e.weight * upstream[static_cast<std::size_t>(d)];
  }
}

}  // namespace ndf4d
