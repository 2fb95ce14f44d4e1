#include "ndf4d/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ndf4d/errors.hpp"

namespace ndf4d {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; big-endian hosts are unsupported");

namespace fs = std::filesystem;

ScanLoadResult load_scan_bin(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open scan file: " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size % (4 * sizeof(float)) != 0) {
    throw FormatError("scan file " + path.string() + " has size " + std::to_string(size) +
                      ", not a multiple of 16 bytes");
  }
  in.seekg(0);
  std::vector<float> buffer(size / sizeof(float));
  if (size > 0 && !in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(size))) {
    throw DataError("failed to read scan file: " + path.string());
  }

  ScanLoadResult result;
  const std::size_t records = buffer.size() / 4;
  result.points.reserve(records);
  for (std::size_t i = 0; i < records; ++i) {
    const Point3 p(buffer[4 * i], buffer[4 * i + 1], buffer[4 * i + 2]);
    if (!p.allFinite()) {
      ++result.rejected;
      continue;
    }
    result.points.push_back(p);
  }
  return result;
}

void write_scan_bin(const fs::path& path, const std::vector<Point3>& points) {
  std::vector<float> buffer;
  buffer.reserve(points.size() * 4);
  for (const auto& p : points) {
    buffer.push_back(static_cast<float>(p.x()));
    buffer.push_back(static_cast<float>(p.y()));
    buffer.push_back(static_cast<float>(p.z()));
    buffer.push_back(0.0f);
  }
  write_file_atomic(path, [&](std::ostream& out) {
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  });
}

std::vector<Pose> parse_poses_kitti(std::istream& in, std::size_t count) {
  std::vector<Pose> poses;
  poses.reserve(count);
  std::string line;
  std::size_t line_no = 0;
  while (poses.size() < count && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    double v[12];
    for (double& x : v) {
      if (!(fields >> x)) {
        throw FormatError("pose line " + std::to_string(line_no) + ": expected 12 numbers");
      }
    }
    Mat3 r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    const Vec3 t(v[3], v[7], v[11]);
    Mat3 fixed;
    if (!t.allFinite() || !orthonormalize(r, 1e-3, fixed)) {
      throw DataError("pose line " + std::to_string(line_no) + ": rotation is not a proper rotation");
    }
    poses.push_back(Pose::from_parts(fixed, t));
  }
  if (poses.size() < count) {
    throw DataError("pose file has " + std::to_string(poses.size()) + " poses, expected " +
                    std::to_string(count));
  }
  return poses;
}

std::vector<Pose> load_poses_kitti(const fs::path& path, std::size_t count) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pose file: " + path.string());
  return parse_poses_kitti(in, count);
}

void write_poses_kitti(const fs::path& path, const std::vector<Pose>& poses) {
  write_file_atomic(
      path,
      [&](std::ostream& out) {
        out << std::setprecision(17);
        for (const auto& pose : poses) {
          for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) out << pose.rotation(r, c) << ' ';
            out << pose.translation(r) << (r == 2 ? '\n' : ' ');
          }
        }
      },
      false);
}

ScanSequence assemble_sequence(const std::vector<std::vector<Point3>>& raw_scans,
                               const std::vector<Pose>& poses) {
  if (raw_scans.size() != poses.size()) {
    throw DataError("scan count " + std::to_string(raw_scans.size()) + " does not match pose count " +
                    std::to_string(poses.size()));
  }
  std::vector<Scan> scans(raw_scans.size());
  for (std::size_t i = 0; i < raw_scans.size(); ++i) {
    Scan& scan = scans[i];
    scan.frame = static_cast<FrameIndex>(i);
    scan.origin = poses[i].translation;
    scan.points_world.reserve(raw_scans[i].size());
    for (const auto& p : raw_scans[i]) scan.points_world.push_back(poses[i].apply(p));
  }
  return ScanSequence(std::move(scans));
}

void write_labels(const fs::path& path, const std::vector<PointLabel>& labels) {
  std::vector<std::uint32_t> raw(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) raw[i] = static_cast<std::uint32_t>(labels[i]);
  write_file_atomic(path, [&](std::ostream& out) {
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));
  });
}

std::vector<PointLabel> read_labels(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() % sizeof(std::uint32_t) != 0) {
    throw FormatError("label file " + path.string() + " size is not a multiple of 4");
  }
  std::vector<PointLabel> labels(bytes.size() / sizeof(std::uint32_t));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::uint32_t v;
    std::memcpy(&v, bytes.data() + i * sizeof(v), sizeof(v));
    if (v > 1) {
      throw FormatError("label file " + path.string() + ": invalid label " + std::to_string(v));
    }
    labels[i] = static_cast<PointLabel>(v);
  }
  return labels;
}

void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& writer,
                       bool binary) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    writer(out);
    out.flush();
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {
std::string frame_name(FrameIndex t, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d%s", t, ext);
  return buf;
}
}  // namespace

fs::path DatasetLayout::scan_path(FrameIndex t) const { return root / "velodyne" / frame_name(t, ".bin"); }

fs::path DatasetLayout::label_path(FrameIndex t) const { return root / "labels" / frame_name(t, ".label"); }

std::size_t DatasetLayout::count_scans() const {
  std::size_t n = 0;
  while (fs::exists(scan_path(static_cast<FrameIndex>(n)))) ++n;
  return n;
}

LoadedDataset load_dataset(const DatasetLayout& layout) {
  const std::size_t n = layout.count_scans();
  if (n == 0) throw DataError("no scans found under " + (layout.root / "velodyne").string());
  const auto poses = load_poses_kitti(layout.poses_path(), n);
  std::vector<std::vector<Point3>> raw(n);
  LoadedDataset out;
  for (std::size_t i = 0; i < n; ++i) {
    auto loaded = load_scan_bin(layout.scan_path(static_cast<FrameIndex>(i)));
    out.rejected_points += loaded.rejected;
    raw[i] = std::move(loaded.points);
  }
  out.sequence = assemble_sequence(raw, poses);
  return out;
}

}  // namespace ndf4d
