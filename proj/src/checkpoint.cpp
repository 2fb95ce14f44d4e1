#include "ndf4d/checkpoint.hpp"

#include <algorithm>
#include <cstring>

#include "ndf4d/binary.hpp"
#include "ndf4d/errors.hpp"
#include "ndf4d/io.hpp"

namespace ndf4d {

namespace {
constexpr std::uint8_t kFeaturePrecisionBytes = 8;
}

std::string serialize_checkpoint(const FieldModel& model) {
  ByteWriter out;
  out.put_bytes(std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic)));
  out.put<std::uint32_t>(kCheckpointVersion);

  const std::string cfg_text = model.config().to_text();
  out.put<std::uint32_t>(static_cast<std::uint32_t>(cfg_text.size()));
  out.put_bytes(cfg_text);

  const auto& basis = model.basis();
  const auto& grid = model.grid();
  const auto& mlp = model.mlp();
  out.put<std::uint32_t>(static_cast<std::uint32_t>(basis.frames()));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(basis.basis_count()));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(grid.feature_dim()));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(grid.levels()));
  out.put<std::uint8_t>(kFeaturePrecisionBytes);

  for (int t = 0; t < basis.frames(); ++t) {
    for (int k = 0; k < basis.basis_count(); ++k) out.put<double>(basis.value(t, k));
  }

  for (int level = 0; level < grid.levels(); ++level) {
    std::uint64_t count = 0;
    for (const auto& key : grid.keys()) count += (key.level == level);
    out.put<std::uint64_t>(count);
    for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
      const auto& key = grid.keys()[v];
      if (key.level != level) continue;
      out.put<std::int32_t>(key.index.x);
      out.put<std::int32_t>(key.index.y);
      out.put<std::int32_t>(key.index.z);
      const auto feature = grid.feature(static_cast<std::int32_t>(v));
      for (Eigen::Index d = 0; d < feature.size(); ++d) out.put<double>(feature(d));
    }
  }

  std::vector<LatticeIndex> occupied(grid.occupancy().begin(), grid.occupancy().end());
  std::sort(occupied.begin(), occupied.end());
  out.put<std::uint64_t>(occupied.size());
  for (const auto& k : occupied) {
    out.put<std::int32_t>(k.x);
    out.put<std::int32_t>(k.y);
    out.put<std::int32_t>(k.z);
  }

  out.put<std::uint32_t>(static_cast<std::uint32_t>(mlp.layers().size()));
  for (const auto& layer : mlp.layers()) {
    const auto& w = layer.weight.value;
    out.put<std::uint32_t>(static_cast<std::uint32_t>(w.rows()));
    out.put<std::uint32_t>(static_cast<std::uint32_t>(w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out.put<double>(w(r, c));
    }
    for (Eigen::Index r = 0; r < w.rows(); ++r) out.put<double>(layer.bias.value(r, 0));
  }
  return out.take();
}

FieldModel deserialize_checkpoint(std::string_view bytes) {
  ByteReader in(bytes);
  if (in.get_bytes(sizeof(kCheckpointMagic)) != std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  if (const auto version = in.get<std::uint32_t>(); version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto cfg_len = in.get<std::uint32_t>();
  const MapConfig cfg = parse_config(in.get_bytes(cfg_len));

  const int frames = static_cast<int>(in.get<std::uint32_t>());
  const int basis_count = static_cast<int>(in.get<std::uint32_t>());
  const int dim = static_cast<int>(in.get<std::uint32_t>());
  const int levels = static_cast<int>(in.get<std::uint32_t>());
  if (in.get<std::uint8_t>() != kFeaturePrecisionBytes) throw FormatError("unsupported feature precision");
  if (dim != cfg.feature_dim || levels != cfg.levels || basis_count != cfg.basis_count) {
    throw FormatError("checkpoint header disagrees with its configuration");
  }

  Eigen::MatrixXd basis_values(frames, basis_count);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < basis_count; ++k) basis_values(t, k) = in.get<double>();
  }
  BasisTable basis;
  basis.set_values(basis_values);

  FeatureGrid grid(levels, dim, cfg.finest_voxel_size, cfg.level_scale_factor);
  std::vector<double> features;
  for (int level = 0; level < levels; ++level) {
    const auto count = in.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < count; ++i) {
      LatticeIndex idx;
      idx.x = in.get<std::int32_t>();
      idx.y = in.get<std::int32_t>();
      idx.z = in.get<std::int32_t>();
      grid.add_vertex({level, idx});
      for (int d = 0; d < dim; ++d) features.push_back(in.get<double>());
    }
  }
  grid.reset_params();
  std::memcpy(grid.params().value.data(), features.data(), features.size() * sizeof(double));

  const auto occupied = in.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < occupied; ++i) {
    LatticeIndex idx;
    idx.x = in.get<std::int32_t>();
    idx.y = in.get<std::int32_t>();
    idx.z = in.get<std::int32_t>();
    grid.add_occupied(idx);
  }

  const auto layer_count = in.get<std::uint32_t>();
  if (layer_count != static_cast<std::uint32_t>(cfg.mlp_hidden_layers + 1)) {
    throw FormatError("checkpoint decoder depth disagrees with configuration");
  }
  std::vector<int> hidden(static_cast<std::size_t>(cfg.mlp_hidden_layers), cfg.mlp_hidden_width);
  Mlp mlp(dim, hidden, basis_count);
  for (auto& layer : mlp.layers()) {
    auto& w = layer.weight.value;
    const auto rows = in.get<std::uint32_t>();
    const auto cols = in.get<std::uint32_t>();
    if (rows != w.rows() || cols != w.cols()) throw FormatError("checkpoint decoder layer shape mismatch");
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = in.get<double>();
    }
    for (Eigen::Index r = 0; r < w.rows(); ++r) layer.bias.value(r, 0) = in.get<double>();
  }
  if (!in.at_end()) throw FormatError("trailing bytes after checkpoint");
  return FieldModel(std::move(grid), std::move(mlp), std::move(basis), cfg);
}

void save_checkpoint(const FieldModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model);
  write_file_atomic(path, [&](std::ostream& out) { out.write(bytes.data(), static_cast<std::streamsize>(bytes.size())); });
}

FieldModel load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

}  // namespace ndf4d
