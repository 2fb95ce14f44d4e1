#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ndf4d/types.hpp"

namespace ndf4d {

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  double area() const;
  double triangle_area(std::size_t i) const;
};

enum class PlyEncoding { kAscii, kBinaryLittleEndian };

/// Vertices as float32 x/y/z, faces as `list uchar int vertex_indices`.
/// A mesh without triangles still declares a 0-face element.
void export_ply(const TriangleMesh& mesh, const std::filesystem::path& path, PlyEncoding encoding);

/// Reads ascii or binary_little_endian PLY. Extra vertex properties are
/// skipped; a missing face element yields a point cloud.
TriangleMesh read_ply(const std::filesystem::path& path);

void export_point_cloud_ply(const std::vector<Point3>& points, const std::filesystem::path& path,
                            PlyEncoding encoding);

}  // namespace ndf4d
