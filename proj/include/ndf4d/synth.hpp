#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "ndf4d/types.hpp"

namespace ndf4d {

/// A primitive translating at constant velocity while present. Outside
/// [active_begin, active_end] it is absent from the scene.
struct Mover {
  enum class Shape { kSphere, kBox };
  Shape shape = Shape::kSphere;
  double radius = 0.5;
  Vec3 half_extents = Vec3::Constant(0.5);
  Point3 start = Point3::Zero();  // position at active_begin
  Vec3 velocity = Vec3::Zero();   // metres per frame
  FrameIndex active_begin = 0;
  FrameIndex active_end = std::numeric_limits<FrameIndex>::max();

  bool present(FrameIndex t) const { return t >= active_begin && t <= active_end; }
  Point3 center(FrameIndex t) const { return start + velocity * static_cast<double>(t - active_begin); }
  /// Signed distance to the primitive placed at frame t (ignores presence).
  double sdf(const Point3& p, FrameIndex t) const;
  /// Distance to the union of the primitive over its active frames within
  /// [0, frames); negative inside.
  double swept_sdf(const Point3& p, int frames) const;
};

struct SceneSpec {
  Point3 room_min{0.0, 0.0, 0.0};
  Point3 room_max{10.0, 8.0, 4.0};
  std::vector<Mover> movers;
  Point3 sensor_start{4.0, 3.0, 1.8};
  Point3 sensor_end{6.0, 3.0, 1.8};
  double sensor_yaw_rate = 0.0;  // radians per frame
  int azimuth_rays = 360;
  int elevation_rays = 16;
  double elevation_min_deg = -30.0;
  double elevation_max_deg = 30.0;
  double max_range = 50.0;
  double range_noise = 0.0;  // Gaussian std-dev in metres, 0 = off
  int frames = 60;
  std::uint64_t seed = 42;
  double gt_spacing = 0.05;      // wall sampling pitch of the GT cloud
  double gt_max_distance = 0.5;  // GT samples farther than this from every static endpoint are unobserved

  Point3 sensor_position(FrameIndex t) const;
  Pose sensor_pose(FrameIndex t) const;
  /// Throws ConfigError when the sensor or a mover leaves the room.
  void validate() const;
};

/// Room 10 x 8 x 4 m, one 0.5 m sphere crossing 4 m during frames 10..50,
/// 60 frames of 360 x 16 rays from a sensor on a 2 m line.
SceneSpec default_scene_spec();
/// Same scene with all movers removed.
SceneSpec static_variant(SceneSpec spec);

/// key = value lines; `mover = sphere R start X Y Z velocity VX VY VZ
/// [active B E]` or `mover = box HX HY HZ start ...`. Keys left out keep
/// the values of `base`; any mover line replaces base's movers.
SceneSpec parse_scene_spec(const std::string& text, const SceneSpec& base = SceneSpec{});
SceneSpec load_scene_spec(const std::filesystem::path& path, const SceneSpec& base = SceneSpec{});
std::string scene_spec_to_text(const SceneSpec& spec);

/// Signed distance of the room interior (positive inside, zero on walls).
double room_sdf(const SceneSpec& spec, const Point3& p);
/// Full scene at frame t: min of the room and the movers present at t.
double oracle_sdf(const SceneSpec& spec, const Point3& p, FrameIndex t);
/// Scene with movers removed.
double oracle_static_sdf(const SceneSpec& spec, const Point3& p);

struct SimulatedFrame {
  Pose pose;
  std::vector<Point3> points_sensor;
  std::vector<Point3> points_world;
  std::vector<PointLabel> labels;
};

struct Simulation {
  std::vector<SimulatedFrame> frames;
  std::vector<Point3> gt_static;

  ScanSequence sequence() const;
  std::vector<PointLabel> all_labels() const;
};

/// First hit along origin + s * dir by sphere tracing; -1 if nothing is hit
/// within max_range. `hit_dynamic` reports whether a mover was hit.
double trace_ray(const SceneSpec& spec, const Point3& origin, const Vec3& dir, FrameIndex t, bool* hit_dynamic);

Simulation simulate(const SceneSpec& spec, int workers = 0);

/// velodyne/, labels/, poses.txt and gt_static.ply under root.
void write_dataset(const Simulation& sim, const std::filesystem::path& root);

}  // namespace ndf4d
