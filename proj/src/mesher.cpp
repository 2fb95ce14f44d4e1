#include "ndf4d/mesher.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ndf4d/errors.hpp"
#include "ndf4d/io.hpp"
#include "ndf4d/marching_cubes_tables.hpp"
#include "ndf4d/parallel.hpp"

namespace ndf4d {

namespace {

constexpr std::size_t kSamplerChunk = 4096;
constexpr double kDegenerateArea = 1e-12;

// Shortest text that parses back to the same double.
void put_number(std::ostream& out, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  out.write(buf, res.ptr - buf);
}
constexpr double kBoundaryTol = 1e-9;

// Candidate integer cells for coordinate f along one axis: floor(f), plus the
// lower neighbour when f sits on a boundary.
int boundary_candidates(double f, std::int32_t out[2]) {
  const double r = std::round(f);
  if (std::abs(f - r) <= kBoundaryTol) {
    out[0] = static_cast<std::int32_t>(r) - 1;
    out[1] = static_cast<std::int32_t>(r);
    return 2;
  }
  out[0] = static_cast<std::int32_t>(std::floor(f));
  return 1;
}

struct EdgeKey {
  LatticeIndex origin;
  int axis = 0;
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& k) const noexcept {
    return LatticeIndexHash{}(k.origin) * 3 + static_cast<std::size_t>(k.axis);
  }
};

// (u, v) axes spanning the slice plane.
std::pair<int, int> plane_axes(SliceAxis axis) {
  switch (axis) {
    case SliceAxis::kX: return {1, 2};
    case SliceAxis::kY: return {0, 2};
    case SliceAxis::kZ: return {0, 1};
  }
  return {0, 1};
}

int axis_index(SliceAxis axis) { return axis == SliceAxis::kX ? 0 : axis == SliceAxis::kY ? 1 : 2; }

}  // namespace

BatchField make_field_sampler(const FieldModel& model, FieldSelection selection, int workers) {
  return [&model, selection, workers](std::span<const Point3> points, std::span<double> out) {
    const std::size_t chunks = (points.size() + kSamplerChunk - 1) / kSamplerChunk;
    parallel_for(chunks, workers, [&](std::size_t c) {
      const std::size_t begin = c * kSamplerChunk;
      const std::size_t count = std::min(kSamplerChunk, points.size() - begin);
      const auto sub = points.subspan(begin, count);
      const auto values = selection.is_static ? model.query_static_batch(sub) : model.query_batch(sub, selection.frame);
      std::copy(values.begin(), values.end(), out.begin() + static_cast<std::ptrdiff_t>(begin));
    });
  };
}

OccupancyMask::OccupancyMask(double voxel_size, std::unordered_set<LatticeIndex, LatticeIndexHash> voxels)
    : voxel_size_(voxel_size), voxels_(std::move(voxels)) {
  if (!(voxel_size > 0.0)) throw ConfigError("mask voxel size must be positive");
}

OccupancyMask OccupancyMask::from_grid(const FeatureGrid& grid, int dilation) {
  std::unordered_set<LatticeIndex, LatticeIndexHash> voxels;
  for (const auto& v : grid.occupancy()) {
    for (int dz = -dilation; dz <= dilation; ++dz) {
      for (int dy = -dilation; dy <= dilation; ++dy) {
        for (int dx = -dilation; dx <= dilation; ++dx) voxels.insert(v.offset(dx, dy, dz));
      }
    }
  }
  return OccupancyMask(grid.voxel_size(0), std::move(voxels));
}

bool OccupancyMask::contains(const Point3& p) const {
  std::int32_t xs[2], ys[2], zs[2];
  const int nx = boundary_candidates(p.x() / voxel_size_, xs);
  const int ny = boundary_candidates(p.y() / voxel_size_, ys);
  const int nz = boundary_candidates(p.z() / voxel_size_, zs);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < nz; ++k) {
        if (voxels_.count({xs[i], ys[j], zs[k]})) return true;
      }
    }
  }
  return false;
}

void OccupancyMask::bounds(Point3& lo, Point3& hi) const {
  LatticeIndex mn = *voxels_.begin();
  LatticeIndex mx = mn;
  for (const auto& v : voxels_) {
    mn = {std::min(mn.x, v.x), std::min(mn.y, v.y), std::min(mn.z, v.z)};
    mx = {std::max(mx.x, v.x), std::max(mx.y, v.y), std::max(mx.z, v.z)};
  }
  lo = lattice_point(mn, voxel_size_);
  hi = lattice_point(mx.offset(1, 1, 1), voxel_size_);
}

TriangleMesh marching_cubes(const BatchField& field, const OccupancyMask& mask, double cell_size) {
  if (!(cell_size > 0.0)) throw ConfigError("cell size must be positive");
  TriangleMesh mesh;
  if (mask.empty()) return mesh;

  // Lattice nodes inside the mask, in ascending (z, y, x) order.
  const double h = mask.voxel_size();
  std::unordered_set<LatticeIndex, LatticeIndexHash> node_set;
  for (const auto& v : mask.voxels()) {
    std::int32_t lo[3], hi[3];
    const std::int32_t vc[3] = {v.x, v.y, v.z};
    for (int a = 0; a < 3; ++a) {
      lo[a] = static_cast<std::int32_t>(std::ceil(vc[a] * h / cell_size - kBoundaryTol));
      hi[a] = static_cast<std::int32_t>(std::floor((vc[a] + 1) * h / cell_size + kBoundaryTol));
    }
    for (std::int32_t z = lo[2]; z <= hi[2]; ++z) {
      for (std::int32_t y = lo[1]; y <= hi[1]; ++y) {
        for (std::int32_t x = lo[0]; x <= hi[0]; ++x) node_set.insert({x, y, z});
      }
    }
  }
  std::vector<LatticeIndex> nodes;
  nodes.reserve(node_set.size());
  for (const auto& n : node_set) {
    if (mask.contains(lattice_point(n, cell_size))) nodes.push_back(n);
  }
  node_set.clear();
  std::sort(nodes.begin(), nodes.end());

  std::vector<Point3> positions(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) positions[i] = lattice_point(nodes[i], cell_size);
  std::vector<double> values(nodes.size());
  field(positions, values);

  std::unordered_map<LatticeIndex, std::uint32_t, LatticeIndexHash> node_index;
  node_index.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) node_index.emplace(nodes[i], static_cast<std::uint32_t>(i));

  std::unordered_map<EdgeKey, std::uint32_t, EdgeKeyHash> edge_vertex;
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  for (const auto& base : nodes) {
    std::array<std::uint32_t, 8> corner;
    bool complete = true;
    for (int c = 0; c < 8 && complete; ++c) {
      const auto& o = mc::kCorners[static_cast<std::size_t>(c)];
      const auto it = node_index.find(base.offset(o[0], o[1], o[2]));
      if (it == node_index.end()) {
        complete = false;
      } else {
        corner[static_cast<std::size_t>(c)] = it->second;
      }
    }
    if (!complete) continue;

    int cube = 0;
    for (int c = 0; c < 8; ++c) {
      if (values[corner[static_cast<std::size_t>(c)]] < 0.0) cube |= 1 << c;
    }
    if (cube == 0 || cube == 255) continue;

    auto edge_vertex_id = [&](int e) {
      auto a = static_cast<std::size_t>(mc::kEdges[static_cast<std::size_t>(e)][0]);
      auto b = static_cast<std::size_t>(mc::kEdges[static_cast<std::size_t>(e)][1]);
      const auto& oa = mc::kCorners[a];
      const auto& ob = mc::kCorners[b];
      int axis = 0;
      while (oa[static_cast<std::size_t>(axis)] == ob[static_cast<std::size_t>(axis)]) ++axis;
      if (oa[static_cast<std::size_t>(axis)] > ob[static_cast<std::size_t>(axis)]) std::swap(a, b);
      const EdgeKey key{nodes[corner[a]], axis};
      const auto found = edge_vertex.find(key);
      if (found != edge_vertex.end()) return found->second;
      const double va = values[corner[a]];
      const double vb = values[corner[b]];
      const double t = va / (va - vb);
      const Point3& pa = positions[corner[a]];
      const Point3& pb = positions[corner[b]];
      const auto id = static_cast<std::uint32_t>(vertices.size());
      vertices.push_back(pa + t * (pb - pa));
      edge_vertex.emplace(key, id);
      return id;
    };

    const auto& row = mc::kTriangleTable[cube];
    for (int i = 0; i + 2 < 16 && row[i] >= 0; i += 3) {
      // Reversed so normals point towards positive (free) space.
      const std::array<std::uint32_t, 3> tri = {edge_vertex_id(row[i]), edge_vertex_id(row[i + 2]),
                                                edge_vertex_id(row[i + 1])};
      const Vec3 n = (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
      if (0.5 * n.norm() <= kDegenerateArea) continue;
      triangles.push_back(tri);
    }
  }

  // Drop vertices only referenced by skipped degenerate triangles.
  std::vector<std::int64_t> remap(vertices.size(), -1);
  for (auto& tri : triangles) {
    for (auto& idx : tri) {
      if (remap[idx] < 0) {
        remap[idx] = static_cast<std::int64_t>(mesh.vertices.size());
        mesh.vertices.push_back(vertices[idx]);
      }
      idx = static_cast<std::uint32_t>(remap[idx]);
    }
  }
  mesh.triangles = std::move(triangles);
  return mesh;
}

TriangleMesh extract_mesh(const FieldModel& model, FieldSelection selection, double cell_size, int workers) {
  return marching_cubes(make_field_sampler(model, selection, workers), OccupancyMask::from_grid(model.grid()),
                        cell_size);
}

SliceAxis parse_slice_axis(const std::string& name) {
  if (name == "x") return SliceAxis::kX;
  if (name == "y") return SliceAxis::kY;
  if (name == "z") return SliceAxis::kZ;
  throw ConfigError("slice axis must be x, y or z, got '" + name + "'");
}

char axis_name(SliceAxis axis) { return axis == SliceAxis::kX ? 'x' : axis == SliceAxis::kY ? 'y' : 'z'; }

Point3 SliceGrid::position(int row, int col) const {
  const auto [u, v] = plane_axes(axis);
  Point3 p;
  p[axis_index(axis)] = coordinate;
  p[u] = origin_u + col * cell_size;
  p[v] = origin_v + row * cell_size;
  return p;
}

SliceGrid compute_slice(const BatchField& field, const OccupancyMask& mask, SliceAxis axis, double coordinate,
                        double cell_size, double clamp) {
  if (!(clamp > 0.0)) throw ConfigError("slice clamp must be positive");
  if (!(cell_size > 0.0)) throw ConfigError("cell size must be positive");
  SliceGrid grid;
  grid.axis = axis;
  grid.coordinate = coordinate;
  grid.cell_size = cell_size;
  grid.clamp = clamp;
  if (mask.empty()) return grid;

  Point3 lo, hi;
  mask.bounds(lo, hi);
  const auto [u, v] = plane_axes(axis);
  const auto iu0 = static_cast<std::int64_t>(std::floor(lo[u] / cell_size + kBoundaryTol));
  const auto iu1 = static_cast<std::int64_t>(std::ceil(hi[u] / cell_size - kBoundaryTol));
  const auto iv0 = static_cast<std::int64_t>(std::floor(lo[v] / cell_size + kBoundaryTol));
  const auto iv1 = static_cast<std::int64_t>(std::ceil(hi[v] / cell_size - kBoundaryTol));
  grid.origin_u = static_cast<double>(iu0) * cell_size;
  grid.origin_v = static_cast<double>(iv0) * cell_size;
  grid.cols = static_cast<int>(iu1 - iu0 + 1);
  grid.rows = static_cast<int>(iv1 - iv0 + 1);

  std::vector<Point3> points;
  points.reserve(static_cast<std::size_t>(grid.rows) * static_cast<std::size_t>(grid.cols));
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      Point3 p;
      p[axis_index(axis)] = coordinate;
      p[u] = static_cast<double>(iu0 + c) * cell_size;
      p[v] = static_cast<double>(iv0 + r) * cell_size;
      points.push_back(p);
    }
  }
  grid.values.resize(points.size());
  field(points, grid.values);
  for (auto& value : grid.values) value = std::clamp(value, -clamp, clamp);
  return grid;
}

SliceGrid export_slice(const FieldModel& model, SliceAxis axis, double coordinate, FieldSelection selection,
                       double cell_size, double clamp, const std::filesystem::path& path, int workers) {
  SliceGrid grid = compute_slice(make_field_sampler(model, selection, workers), OccupancyMask::from_grid(model.grid()),
                                 axis, coordinate, cell_size, clamp);
  write_slice_csv(grid, path);
  return grid;
}

void write_slice_csv(const SliceGrid& grid, const std::filesystem::path& path) {
  write_file_atomic(
      path,
      [&](std::ostream& out) {
        out << "axis,coordinate,cell_size,clamp,origin_u,origin_v,cols,rows\n";
        out << axis_name(grid.axis);
        for (double x : {grid.coordinate, grid.cell_size, grid.clamp, grid.origin_u, grid.origin_v}) {
          out << ',';
          put_number(out, x);
        }
        out << ',' << grid.cols << ',' << grid.rows << '\n';
        for (int r = 0; r < grid.rows; ++r) {
          for (int c = 0; c < grid.cols; ++c) {
            if (c) out << ',';
            put_number(out, grid.values[static_cast<std::size_t>(r) * static_cast<std::size_t>(grid.cols) +
                                        static_cast<std::size_t>(c)]);
          }
          out << '\n';
        }
      },
      false);
}

SliceGrid read_slice_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "axis,coordinate,cell_size,clamp,origin_u,origin_v,cols,rows") {
    throw FormatError("bad slice header in " + path.string());
  }
  if (!std::getline(in, line)) throw FormatError("missing slice metadata in " + path.string());
  for (auto& ch : line) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream meta(line);
  SliceGrid grid;
  std::string axis;
  meta >> axis >> grid.coordinate >> grid.cell_size >> grid.clamp >> grid.origin_u >> grid.origin_v >> grid.cols >>
      grid.rows;
  if (!meta || grid.cols < 0 || grid.rows < 0) throw FormatError("bad slice metadata in " + path.string());
  grid.axis = parse_slice_axis(axis);
  for (int r = 0; r < grid.rows; ++r) {
    if (!std::getline(in, line)) throw FormatError("truncated slice grid in " + path.string());
    std::istringstream row(line);
    std::string cell;
    int count = 0;
    while (std::getline(row, cell, ',')) {
      grid.values.push_back(std::stod(cell));
      ++count;
    }
    if (count != grid.cols) throw FormatError("slice row width mismatch in " + path.string());
  }
  return grid;
}

}  // namespace ndf4d
