#include "ndf4d/config.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ndf4d/errors.hpp"

namespace ndf4d {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value '" + std::string(text) + "' for key '" + std::string(key) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw ConfigError("non-finite value for key '" + std::string(key) + "'");
    }
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using Setter = std::function<void(MapConfig&, std::string_view, std::string_view)>;
using Getter = std::function<std::string(const MapConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

template <typename T>
Field make_field(T MapConfig::*member) {
  return {[member](MapConfig& c, std::string_view key, std::string_view v) {
            c.*member = parse_number<T>(key, v);
          },
          [member](const MapConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

Field make_optional_field(std::optional<double> MapConfig::*member) {
  return {[member](MapConfig& c, std::string_view key, std::string_view v) {
            if (v == "auto") {
              c.*member = std::nullopt;
            } else {
              c.*member = parse_number<double>(key, v);
            }
          },
          [member](const MapConfig& c) {
            return (c.*member) ? format_double(*(c.*member)) : std::string("auto");
          }};
}

// Ordered so to_text() output is stable.
const std::vector<std::pair<std::string, Field>>& field_table() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"levels", make_field(&MapConfig::levels)},
      {"feature_dim", make_field(&MapConfig::feature_dim)},
      {"basis_count", make_field(&MapConfig::basis_count)},
      {"finest_voxel_size", make_field(&MapConfig::finest_voxel_size)},
      {"level_scale_factor", make_field(&MapConfig::level_scale_factor)},
      {"mlp_hidden_layers", make_field(&MapConfig::mlp_hidden_layers)},
      {"mlp_hidden_width", make_field(&MapConfig::mlp_hidden_width)},
      {"truncation", make_field(&MapConfig::truncation)},
      {"r_dense", make_field(&MapConfig::r_dense)},
      {"surface_samples", make_field(&MapConfig::surface_samples)},
      {"free_samples", make_field(&MapConfig::free_samples)},
      {"lambda_eikonal", make_field(&MapConfig::lambda_eikonal)},
      {"lambda_free", make_field(&MapConfig::lambda_free)},
      {"lambda_certain", make_field(&MapConfig::lambda_certain)},
      {"d_static", make_field(&MapConfig::d_static)},
      {"learning_rate", make_field(&MapConfig::learning_rate)},
      {"train_steps", make_field(&MapConfig::train_steps)},
      {"batch_size", make_field(&MapConfig::batch_size)},
      {"eps_start", make_optional_field(&MapConfig::eps_start)},
      {"eps_end", make_optional_field(&MapConfig::eps_end)},
      {"eps_decay_fraction", make_field(&MapConfig::eps_decay_fraction)},
      {"seed", make_field(&MapConfig::seed)},
  };
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& [name, field] : field_table()) {
    if (name == key) return &field;
  }
  return nullptr;
}

}  // namespace

double MapConfig::voxel_size(int level) const {
  return finest_voxel_size * std::pow(level_scale_factor, level);
}

double MapConfig::resolved_eps_start() const {
  return eps_start ? *eps_start : coarsest_voxel_size();
}

double MapConfig::resolved_eps_end() const {
  return eps_end ? *eps_end : finest_voxel_size / 4.0;
}

void MapConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid configuration: ") + what);
  };
  require(levels >= 1 && levels <= 8, "levels must be in [1, 8]");
  require(feature_dim >= 1, "feature_dim must be positive");
  require(basis_count >= 2, "basis_count must be >= 2");
  require(finest_voxel_size > 0, "finest_voxel_size must be positive");
  require(level_scale_factor > 1, "level_scale_factor must be > 1");
  require(mlp_hidden_layers >= 1, "mlp_hidden_layers must be positive");
  require(mlp_hidden_width >= 1, "mlp_hidden_width must be positive");
  require(truncation > 0, "truncation must be positive");
  require(r_dense > 0, "r_dense must be positive");
  require(surface_samples >= 1, "surface_samples must be positive");
  require(free_samples >= 1, "free_samples must be positive");
  require(lambda_eikonal >= 0 && lambda_free >= 0 && lambda_certain >= 0,
          "loss weights must be non-negative");
  require(d_static > 0, "d_static must be positive");
  require(learning_rate > 0, "learning_rate must be positive");
  require(train_steps >= 1, "train_steps must be positive");
  require(batch_size >= 1, "batch_size must be positive");
  require(resolved_eps_end() > 0, "eps_end must be positive");
  require(resolved_eps_start() >= resolved_eps_end(), "eps_start must be >= eps_end");
  require(eps_decay_fraction > 0 && eps_decay_fraction <= 1, "eps_decay_fraction must be in (0, 1]");
}

void MapConfig::set(std::string_view key, std::string_view value) {
  const Field* field = find_field(key);
  if (field == nullptr) {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
  field->set(*this, key, value);
}

std::string MapConfig::to_text() const {
  std::ostringstream out;
  for (const auto& [name, field] : field_table()) {
    out << name << " = " << field.get(*this) << '\n';
  }
  return out.str();
}

std::vector<std::string> MapConfig::keys() {
  std::vector<std::string> out;
  for (const auto& entry : field_table()) out.push_back(entry.first);
  return out;
}

bool split_assignment(std::string_view line, std::string& key, std::string& value) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) return false;
  key = std::string(trim(line.substr(0, eq)));
  value = std::string(trim(line.substr(eq + 1)));
  return !key.empty();
}

MapConfig parse_config(std::string_view text, MapConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = (nl == std::string_view::npos) ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    std::string key;
    std::string value;
    if (!split_assignment(line, key, value)) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      base.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

MapConfig load_config(const std::string& path, MapConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

void apply_overrides(MapConfig& cfg, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    std::string key;
    std::string value;
    if (!split_assignment(item, key, value)) {
      throw ConfigError("override '" + item + "' is not of the form key=value");
    }
    cfg.set(key, value);
  }
}

}  // namespace ndf4d
