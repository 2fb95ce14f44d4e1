#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ndf4d/field.hpp"

namespace ndf4d {

inline constexpr char kCheckpointMagic[8] = {'N', 'D', 'F', '4', 'D', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Little-endian checkpoint: magic, version, config text, N/K/D/L, basis
/// table, grid (per level: vertex count then key + feature records), the
/// occupancy set, then decoder layers. Optimizer state is not stored.
std::string serialize_checkpoint(const FieldModel& model);
FieldModel deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const FieldModel& model, const std::filesystem::path& path);
FieldModel load_checkpoint(const std::filesystem::path& path);

}  // namespace ndf4d
