#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "ndf4d/field.hpp"
#include "ndf4d/lattice.hpp"
#include "ndf4d/ply.hpp"
#include "ndf4d/types.hpp"

namespace ndf4d {

/// Evaluates a scalar field at a batch of points; out.size() == points.size().
using BatchField = std::function<void(std::span<const Point3> points, std::span<double> out)>;

/// Static map (w_0) or the full field at one frame.
struct FieldSelection {
  bool is_static = true;
  FrameIndex frame = 0;

  static FieldSelection static_map() { return {}; }
  static FieldSelection at_frame(FrameIndex t) { return {false, t}; }
};

BatchField make_field_sampler(const FieldModel& model, FieldSelection selection, int workers = 0);

/// Set of voxels at a fixed spacing restricting where surfaces are extracted.
class OccupancyMask {
 public:
  OccupancyMask() = default;
  OccupancyMask(double voxel_size, std::unordered_set<LatticeIndex, LatticeIndexHash> voxels);

  /// Occupied finest-level voxels of the grid, grown by `dilation` voxels
  /// (26-neighbourhood).
  static OccupancyMask from_grid(const FeatureGrid& grid, int dilation = 1);

  bool empty() const { return voxels_.empty(); }
  double voxel_size() const { return voxel_size_; }
  const std::unordered_set<LatticeIndex, LatticeIndexHash>& voxels() const { return voxels_; }

  /// Points on a shared voxel face count as inside if either voxel is.
  bool contains(const Point3& p) const;
  /// Axis-aligned bounds of all voxels; requires !empty().
  void bounds(Point3& lo, Point3& hi) const;

 private:
  double voxel_size_ = 1.0;
  std::unordered_set<LatticeIndex, LatticeIndexHash> voxels_;
};

/// Marching cubes at iso-value 0 on the lattice {k * cell_size} restricted to
/// the mask. A cell is triangulated only if all 8 corners lie in the mask.
/// Triangles come out in ascending lattice order, vertices shared per edge.
TriangleMesh marching_cubes(const BatchField& field, const OccupancyMask& mask, double cell_size);

TriangleMesh extract_mesh(const FieldModel& model, FieldSelection selection, double cell_size, int workers = 0);

enum class SliceAxis { kX, kY, kZ };

SliceAxis parse_slice_axis(const std::string& name);
char axis_name(SliceAxis axis);

/// Regular 2D grid of clamped field values on the plane axis = coordinate.
/// For axis z the in-plane axes (u, v) are (x, y); for y they are (x, z);
/// for x they are (y, z). values is row-major: values[r * cols + c] is at
/// u = origin_u + c * cell_size, v = origin_v + r * cell_size.
struct SliceGrid {
  SliceAxis axis = SliceAxis::kZ;
  double coordinate = 0.0;
  double cell_size = 0.0;
  double clamp = 0.0;
  double origin_u = 0.0;
  double origin_v = 0.0;
  int cols = 0;
  int rows = 0;
  std::vector<double> values;

  Point3 position(int row, int col) const;
};

/// Covers the mask's bounding rectangle in the slice plane with lattice
/// nodes; values clamped to [-clamp, clamp].
SliceGrid compute_slice(const BatchField& field, const OccupancyMask& mask, SliceAxis axis, double coordinate,
                        double cell_size, double clamp);

SliceGrid export_slice(const FieldModel& model, SliceAxis axis, double coordinate, FieldSelection selection,
                       double cell_size, double clamp, const std::filesystem::path& path, int workers = 0);

void write_slice_csv(const SliceGrid& grid, const std::filesystem::path& path);
SliceGrid read_slice_csv(const std::filesystem::path& path);

}  // namespace ndf4d
