#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ndf4d/types.hpp"

namespace ndf4d {

struct ScanLoadResult {
  std::vector<Point3> points;  // sensor frame, file order
  std::size_t rejected = 0;    // records with a non-finite coordinate
};

/// Reads a KITTI velodyne .bin (little-endian float32 x, y, z, intensity).
/// Intensity is dropped. Throws FormatError if the size is not a multiple of
/// 16 bytes, DataError if the file cannot be read.
ScanLoadResult load_scan_bin(const std::filesystem::path& path);
void write_scan_bin(const std::filesystem::path& path, const std::vector<Point3>& points);

/// Reads `count` poses (12 reals per line, row-major 3x4). Rotations within
/// 1e-3 of orthonormal are re-orthonormalized; anything else is an error
/// naming the line.
std::vector<Pose> load_poses_kitti(const std::filesystem::path& path, std::size_t count);
std::vector<Pose> parse_poses_kitti(std::istream& in, std::size_t count);
void write_poses_kitti(const std::filesystem::path& path, const std::vector<Pose>& poses);

/// Transforms each scan into the world frame; origin = pose translation.
ScanSequence assemble_sequence(const std::vector<std::vector<Point3>>& raw_scans,
                               const std::vector<Pose>& poses);

/// One little-endian u32 per label: 0 static, 1 dynamic.
void write_labels(const std::filesystem::path& path, const std::vector<PointLabel>& labels);
std::vector<PointLabel> read_labels(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer,
                       bool binary = true);

std::string read_file(const std::filesystem::path& path);

/// KITTI-style dataset directory: velodyne/NNNNNN.bin, poses.txt and
/// optionally labels/NNNNNN.label.
struct DatasetLayout {
  std::filesystem::path root;

  std::filesystem::path scan_path(FrameIndex t) const;
  std::filesystem::path label_path(FrameIndex t) const;
  std::filesystem::path poses_path() const { return root / "poses.txt"; }
  std::filesystem::path gt_static_path() const { return root / "gt_static.ply"; }
  std::size_t count_scans() const;
};

struct LoadedDataset {
  ScanSequence sequence;
  std::size_t rejected_points = 0;
};

LoadedDataset load_dataset(const DatasetLayout& layout);

}  // namespace ndf4d
