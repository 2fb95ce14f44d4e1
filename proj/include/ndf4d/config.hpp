#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ndf4d {

/// All tunables of the mapper. Defaults are the outdoor LiDAR settings:
/// 2 levels, 8-dim features, 32 temporal bases, 2x64 decoder, 5 surface and
/// 15 free samples per ray, loss weights 0.02 / 0.25 / 0.2, 0.5 m truncation,
/// 15 m dense radius, 0.3 m finest voxels and a 0.16 m dynamic threshold.
struct MapConfig {
  int levels = 2;
  int feature_dim = 8;
  int basis_count = 32;
  double finest_voxel_size = 0.3;
  double level_scale_factor = 2.0;
  int mlp_hidden_layers = 2;
  int mlp_hidden_width = 64;
  double truncation = 0.5;
  double r_dense = 15.0;
  int surface_samples = 5;
  int free_samples = 15;
  double lambda_eikonal = 0.02;
  double lambda_free = 0.25;
  double lambda_certain = 0.2;
  double d_static = 0.16;
  double learning_rate = 0.01;
  int train_steps = 20000;
  int batch_size = 4096;
  // Unset means derived: start = coarsest voxel size, end = finest / 4.
  std::optional<double> eps_start;
  std::optional<double> eps_end;
  double eps_decay_fraction = 0.7;
  std::uint64_t seed = 42;

  double voxel_size(int level) const;  // level 0 = finest
  double coarsest_voxel_size() const { return voxel_size(levels - 1); }
  double resolved_eps_start() const;
  double resolved_eps_end() const;

  /// Throws ConfigError on any out-of-range value.
  void validate() const;

  /// Applies one `key = value` assignment. Unknown keys throw ConfigError.
  void set(std::string_view key, std::string_view value);

  /// Serializes every key as `key = value` lines; parse_config(to_text())
  /// reproduces the config exactly.
  std::string to_text() const;

  static std::vector<std::string> keys();
};

/// Parses the flat `key = value` format (# comments, blank lines ignored)
/// on top of `base`.
MapConfig parse_config(std::string_view text, MapConfig base = {});
MapConfig load_config(const std::string& path, MapConfig base = {});

/// Applies `key=value` overrides in order.
void apply_overrides(MapConfig& cfg, const std::vector<std::string>& overrides);

/// Splits "key = value" / "key=value"; returns false if there is no '='.
bool split_assignment(std::string_view line, std::string& key, std::string& value);

}  // namespace ndf4d
