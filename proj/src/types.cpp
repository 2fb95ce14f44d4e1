#include "ndf4d/types.hpp"

#include <Eigen/SVD>

#include "ndf4d/errors.hpp"

namespace ndf4d {

bool orthonormalize(const Mat3& input, double tolerance, Mat3& out) {
  if (!input.allFinite()) return false;
  const double deviation = (input.transpose() * input - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (deviation > tolerance || input.determinant() <= 0.0) return false;
  Eigen::JacobiSVD<Mat3> svd(input, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out = svd.matrixU() * svd.matrixV().transpose();
  return out.determinant() > 0.0;
}

Pose Pose::from_parts(const Mat3& rotation, const Vec3& translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw DataError("pose contains non-finite values");
  }
  const double deviation = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (deviation > 1e-6 || std::abs(rotation.determinant() - 1.0) > 1e-6) {
    throw DataError("pose rotation is not a proper rotation");
  }
  Pose pose;
  pose.rotation = rotation;
  pose.translation = translation;
  return pose;
}

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Pose Pose::compose(const Pose& rhs) const {
  Pose out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

ScanSequence::ScanSequence(std::vector<Scan> scans) : scans_(std::move(scans)) {
  if (scans_.empty()) throw DataError("scan sequence must contain at least one scan");
  for (std::size_t i = 0; i < scans_.size(); ++i) {
    if (scans_[i].frame != static_cast<FrameIndex>(i)) {
      throw DataError("scan frames must be contiguous and 0-based");
    }
    if (!scans_[i].origin.allFinite()) throw DataError("scan origin is not finite");
    if (scans_[i].points_world.empty()) {
      throw DataError("scan " + std::to_string(i) + " has no points");
    }
    for (const auto& p : scans_[i].points_world) {
      if (!p.allFinite()) throw DataError("scan point is not finite");
    }
  }
}

std::size_t ScanSequence::total_points() const {
  std::size_t n = 0;
  for (const auto& s : scans_) n += s.points_world.size();
  return n;
}

}  // namespace ndf4d
