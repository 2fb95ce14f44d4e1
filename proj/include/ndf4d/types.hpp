#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ndf4d {

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// 0-based scan index. Frame time is the scan index throughout.
using FrameIndex = int;

enum class PointLabel : std::uint32_t { kStatic = 0, kDynamic = 1 };

inline bool is_finite(const Point3& p) { return p.allFinite(); }

/// Rigid transform sensor -> world.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  /// Validates orthonormality and det = +1 within 1e-6.
  static Pose from_parts(const Mat3& rotation, const Vec3& translation);

  Point3 apply(const Point3& p) const { return rotation * p + translation; }
  Pose inverse() const;
  Pose compose(const Pose& rhs) const;
};

/// Projects a nearly-orthonormal matrix onto SO(3) via SVD. Returns false if
/// the input is further than `tolerance` (max abs entry of R^T R - I) from
/// orthonormal or has negative determinant.
bool orthonormalize(const Mat3& input, double tolerance, Mat3& out);

struct Scan {
  FrameIndex frame = 0;
  Point3 origin = Point3::Zero();
  std::vector<Point3> points_world;
};

/// Ordered, contiguous frames 0..N-1.
class ScanSequence {
 public:
  ScanSequence() = default;
  explicit ScanSequence(std::vector<Scan> scans);

  int frame_count() const { return static_cast<int>(scans_.size()); }
  const std::vector<Scan>& scans() const { return scans_; }
  const Scan& scan(FrameIndex t) const { return scans_.at(static_cast<std::size_t>(t)); }
  std::size_t total_points() const;

 private:
  std::vector<Scan> scans_;
};

}  // namespace ndf4d
