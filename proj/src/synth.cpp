#include "ndf4d/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "ndf4d/config.hpp"
#include "ndf4d/errors.hpp"
#include "ndf4d/io.hpp"
#include "ndf4d/parallel.hpp"
#include "ndf4d/ply.hpp"
#include "ndf4d/point_index.hpp"

namespace ndf4d {

namespace {

constexpr double kHitTolerance = 1e-7;
constexpr int kMaxTraceSteps = 20000;

double box_sdf(const Point3& p, const Point3& center, const Vec3& half) {
  const Vec3 q = (p - center).cwiseAbs() - half;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

Vec3 parse_vec3(std::istringstream& in, const std::string& what) {
  Vec3 v;
  if (!(in >> v.x() >> v.y() >> v.z())) throw ConfigError("scene: expected three numbers for " + what);
  return v;
}

Mover parse_mover(const std::string& value) {
  std::istringstream in(value);
  std::string shape;
  in >> shape;
  Mover m;
  if (shape == "sphere") {
    m.shape = Mover::Shape::kSphere;
    if (!(in >> m.radius) || !(m.radius > 0.0)) throw ConfigError("scene: sphere needs a positive radius");
  } else if (shape == "box") {
    m.shape = Mover::Shape::kBox;
    m.half_extents = parse_vec3(in, "box half extents");
    if (!(m.half_extents.minCoeff() > 0.0)) throw ConfigError("scene: box half extents must be positive");
  } else {
    throw ConfigError("scene: unknown mover shape '" + shape + "'");
  }
  std::string word;
  while (in >> word) {
    if (word == "start") {
      m.start = parse_vec3(in, "start");
    } else if (word == "velocity") {
      m.velocity = parse_vec3(in, "velocity");
    } else if (word == "active") {
      if (!(in >> m.active_begin >> m.active_end) || m.active_end < m.active_begin) {
        throw ConfigError("scene: active needs two frame indices, begin <= end");
      }
    } else {
      throw ConfigError("scene: unexpected mover token '" + word + "'");
    }
  }
  return m;
}

std::string format_vec(const Vec3& v) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", v.x(), v.y(), v.z());
  return buf;
}

std::uint64_t frame_seed(std::uint64_t seed, FrameIndex t) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(t), 0x5C3Eu};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

double Mover::sdf(const Point3& p, FrameIndex t) const {
  const Point3 c = center(t);
  return shape == Shape::kSphere ? (p - c).norm() - radius : box_sdf(p, c, half_extents);
}

double Mover::swept_sdf(const Point3& p, int frames) const {
  double best = std::numeric_limits<double>::infinity();
  const FrameIndex first = std::max(0, active_begin);
  const FrameIndex last = std::min(frames - 1, active_end);
  for (FrameIndex t = first; t <= last; ++t) best = std::min(best, sdf(p, t));
  return best;
}

Point3 SceneSpec::sensor_position(FrameIndex t) const {
  if (frames <= 1) return sensor_start;
  const double a = static_cast<double>(t) / static_cast<double>(frames - 1);
  return sensor_start + a * (sensor_end - sensor_start);
}

Pose SceneSpec::sensor_pose(FrameIndex t) const {
  Pose pose;
  const double yaw = sensor_yaw_rate * static_cast<double>(t);
  pose.rotation << std::cos(yaw), -std::sin(yaw), 0.0, std::sin(yaw), std::cos(yaw), 0.0, 0.0, 0.0, 1.0;
  pose.translation = sensor_position(t);
  return pose;
}

void SceneSpec::validate() const {
  if (!(room_max.array() > room_min.array()).all()) throw ConfigError("scene: room_max must exceed room_min");
  if (frames < 1) throw ConfigError("scene: frames must be >= 1");
  if (azimuth_rays < 1 || elevation_rays < 1) throw ConfigError("scene: ray counts must be >= 1");
  if (!(max_range > 0.0)) throw ConfigError("scene: max_range must be positive");
  if (range_noise < 0.0) throw ConfigError("scene: range_noise must be >= 0");
  if (!(gt_spacing > 0.0) || !(gt_max_distance > 0.0)) throw ConfigError("scene: GT sampling must be positive");
  for (FrameIndex t = 0; t < frames; ++t) {
    if (room_sdf(*this, sensor_position(t)) <= 0.0) {
      throw ConfigError("scene: sensor leaves the room at frame " + std::to_string(t));
    }
    for (const auto& m : movers) {
      if (!m.present(t)) continue;
      const Vec3 half = m.shape == Mover::Shape::kSphere ? Vec3::Constant(m.radius) : m.half_extents;
      const Point3 c = m.center(t);
      if (!((c - half).array() >= room_min.array()).all() || !((c + half).array() <= room_max.array()).all()) {
        throw ConfigError("scene: mover leaves the room at frame " + std::to_string(t));
      }
      if (m.sdf(sensor_position(t), t) <= 0.0) {
        throw ConfigError("scene: sensor inside a mover at frame " + std::to_string(t));
      }
    }
  }
}

SceneSpec default_scene_spec() {
  SceneSpec spec;
  Mover sphere;
  sphere.shape = Mover::Shape::kSphere;
  sphere.radius = 0.5;
  sphere.start = {3.0, 5.5, 2.0};
  sphere.velocity = {0.1, 0.0, 0.0};
  sphere.active_begin = 10;
  sphere.active_end = 50;
  spec.movers.push_back(sphere);
  return spec;
}

SceneSpec static_variant(SceneSpec spec) {
  spec.movers.clear();
  return spec;
}

SceneSpec parse_scene_spec(const std::string& text, const SceneSpec& base) {
  SceneSpec spec = base;
  bool movers_replaced = false;
  std::istringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string key, value;
    if (!split_assignment(line, key, value)) {
      throw ConfigError("scene line " + std::to_string(number) + ": expected key = value");
    }
    std::istringstream in(value);
    auto scalar = [&](auto& target) {
      if (!(in >> target)) throw ConfigError("scene line " + std::to_string(number) + ": bad value for " + key);
    };
    if (key == "room_min") {
      spec.room_min = parse_vec3(in, key);
    } else if (key == "room_max") {
      spec.room_max = parse_vec3(in, key);
    } else if (key == "sensor_start") {
      spec.sensor_start = parse_vec3(in, key);
    } else if (key == "sensor_end") {
      spec.sensor_end = parse_vec3(in, key);
    } else if (key == "sensor_yaw_rate") {
      scalar(spec.sensor_yaw_rate);
    } else if (key == "azimuth_rays") {
      scalar(spec.azimuth_rays);
    } else if (key == "elevation_rays") {
      scalar(spec.elevation_rays);
    } else if (key == "elevation_min_deg") {
      scalar(spec.elevation_min_deg);
    } else if (key == "elevation_max_deg") {
      scalar(spec.elevation_max_deg);
    } else if (key == "max_range") {
      scalar(spec.max_range);
    } else if (key == "range_noise") {
      scalar(spec.range_noise);
    } else if (key == "frames") {
      scalar(spec.frames);
    } else if (key == "seed") {
      scalar(spec.seed);
    } else if (key == "gt_spacing") {
      scalar(spec.gt_spacing);
    } else if (key == "gt_max_distance") {
      scalar(spec.gt_max_distance);
    } else if (key == "mover") {
      if (!movers_replaced) spec.movers.clear();
      movers_replaced = true;
      spec.movers.push_back(parse_mover(value));
    } else if (key == "movers" && value == "none") {
      spec.movers.clear();
      movers_replaced = true;
    } else {
      throw ConfigError("scene line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

SceneSpec load_scene_spec(const std::filesystem::path& path, const SceneSpec& base) {
  return parse_scene_spec(read_file(path), base);
}

std::string scene_spec_to_text(const SceneSpec& spec) {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  out << "room_min = " << format_vec(spec.room_min) << "\n";
  out << "room_max = " << format_vec(spec.room_max) << "\n";
  out << "frames = " << spec.frames << "\n";
  out << "sensor_start = " << format_vec(spec.sensor_start) << "\n";
  out << "sensor_end = " << format_vec(spec.sensor_end) << "\n";
  out << "sensor_yaw_rate = " << num(spec.sensor_yaw_rate) << "\n";
  out << "azimuth_rays = " << spec.azimuth_rays << "\n";
  out << "elevation_rays = " << spec.elevation_rays << "\n";
  out << "elevation_min_deg = " << num(spec.elevation_min_deg) << "\n";
  out << "elevation_max_deg = " << num(spec.elevation_max_deg) << "\n";
  out << "max_range = " << num(spec.max_range) << "\n";
  out << "range_noise = " << num(spec.range_noise) << "\n";
  out << "seed = " << spec.seed << "\n";
  out << "gt_spacing = " << num(spec.gt_spacing) << "\n";
  out << "gt_max_distance = " << num(spec.gt_max_distance) << "\n";
  if (spec.movers.empty()) out << "movers = none\n";
  for (const auto& m : spec.movers) {
    out << "mover = ";
    if (m.shape == Mover::Shape::kSphere) {
      out << "sphere " << num(m.radius);
    } else {
      out << "box " << format_vec(m.half_extents);
    }
    out << " start " << format_vec(m.start) << " velocity " << format_vec(m.velocity) << " active "
        << m.active_begin << ' ' << m.active_end << "\n";
  }
  return out.str();
}

double room_sdf(const SceneSpec& spec, const Point3& p) {
  return std::min((p - spec.room_min).minCoeff(), (spec.room_max - p).minCoeff());
}

double oracle_static_sdf(const SceneSpec& spec, const Point3& p) { return room_sdf(spec, p); }

double oracle_sdf(const SceneSpec& spec, const Point3& p, FrameIndex t) {
  double d = room_sdf(spec, p);
  for (const auto& m : spec.movers) {
    if (m.present(t)) d = std::min(d, m.sdf(p, t));
  }
  return d;
}

double trace_ray(const SceneSpec& spec, const Point3& origin, const Vec3& dir, FrameIndex t, bool* hit_dynamic) {
  double s = 0.0;
  for (int step = 0; step < kMaxTraceSteps && s <= spec.max_range; ++step) {
    const Point3 p = origin + s * dir;
    const double room = room_sdf(spec, p);
    double mover = std::numeric_limits<double>::infinity();
    for (const auto& m : spec.movers) {
      if (m.present(t)) mover = std::min(mover, m.sdf(p, t));
    }
    const double d = std::min(room, mover);
    if (d <= kHitTolerance) {
      if (hit_dynamic) *hit_dynamic = mover < room;
      return s;
    }
    s += d;
  }
  return -1.0;
}

Simulation simulate(const SceneSpec& spec, int workers) {
  spec.validate();
  Simulation sim;
  sim.frames.resize(static_cast<std::size_t>(spec.frames));
  const double deg = std::numbers::pi / 180.0;

  parallel_for(sim.frames.size(), workers, [&](std::size_t i) {
    const auto t = static_cast<FrameIndex>(i);
    SimulatedFrame& frame = sim.frames[i];
    frame.pose = spec.sensor_pose(t);
    std::mt19937_64 rng(frame_seed(spec.seed, t));
    std::normal_distribution<double> noise(0.0, spec.range_noise > 0.0 ? spec.range_noise : 1.0);
    for (int e = 0; e < spec.elevation_rays; ++e) {
      const double elev =
          spec.elevation_rays == 1
              ? 0.5 * (spec.elevation_min_deg + spec.elevation_max_deg) * deg
              : (spec.elevation_min_deg + (spec.elevation_max_deg - spec.elevation_min_deg) * e /
                                              static_cast<double>(spec.elevation_rays - 1)) *
                    deg;
      for (int a = 0; a < spec.azimuth_rays; ++a) {
        const double az = 2.0 * std::numbers::pi * a / static_cast<double>(spec.azimuth_rays);
        const Vec3 local(std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az), std::sin(elev));
        const Vec3 dir = frame.pose.rotation * local;
        bool dynamic = false;
        double range = trace_ray(spec, frame.pose.translation, dir, t, &dynamic);
        if (range < 0.0) continue;
        if (spec.range_noise > 0.0) range += noise(rng);
        if (range <= 0.0 || range > spec.max_range) continue;
        frame.points_sensor.push_back(range * local);
        frame.points_world.push_back(frame.pose.translation + range * dir);
        frame.labels.push_back(dynamic ? PointLabel::kDynamic : PointLabel::kStatic);
      }
    }
  });

  // GT static cloud: wall samples near an observed static endpoint.
  std::vector<Point3> static_points;
  for (const auto& f : sim.frames) {
    for (std::size_t i = 0; i < f.points_world.size(); ++i) {
      if (f.labels[i] == PointLabel::kStatic) static_points.push_back(f.points_world[i]);
    }
  }
  const PointIndex index(static_points, std::max(spec.gt_max_distance, 0.1));
  const Vec3 extent = spec.room_max - spec.room_min;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    const int nu = std::max(1, static_cast<int>(std::lround(extent[u] / spec.gt_spacing)));
    const int nv = std::max(1, static_cast<int>(std::lround(extent[v] / spec.gt_spacing)));
    for (double plane : {spec.room_min[axis], spec.room_max[axis]}) {
      for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nu; ++i) {
          Point3 p;
          p[axis] = plane;
          p[u] = spec.room_min[u] + (i + 0.5) * extent[u] / nu;
          p[v] = spec.room_min[v] + (j + 0.5) * extent[v] / nv;
          if (index.any_within(p, spec.gt_max_distance)) sim.gt_static.push_back(p);
        }
      }
    }
  }
  return sim;
}

ScanSequence Simulation::sequence() const {
  std::vector<Scan> scans;
  scans.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    scans.push_back({static_cast<FrameIndex>(i), frames[i].pose.translation, frames[i].points_world});
  }
  return ScanSequence(std::move(scans));
}

std::vector<PointLabel> Simulation::all_labels() const {
  std::vector<PointLabel> out;
  for (const auto& f : frames) out.insert(out.end(), f.labels.begin(), f.labels.end());
  return out;
}

void write_dataset(const Simulation& sim, const std::filesystem::path& root) {
  const DatasetLayout layout{root};
  std::filesystem::create_directories(root / "velodyne");
  std::filesystem::create_directories(root / "labels");
  std::vector<Pose> poses;
  for (std::size_t i = 0; i < sim.frames.size(); ++i) {
    const auto t = static_cast<FrameIndex>(i);
    write_scan_bin(layout.scan_path(t), sim.frames[i].points_sensor);
    write_labels(layout.label_path(t), sim.frames[i].labels);
    poses.push_back(sim.frames[i].pose);
  }
  write_poses_kitti(layout.poses_path(), poses);
  export_point_cloud_ply(sim.gt_static, layout.gt_static_path(), PlyEncoding::kBinaryLittleEndian);
}

}  // namespace ndf4d
