#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "ndf4d/config.hpp"
#include "ndf4d/decoder.hpp"
#include "ndf4d/feature_grid.hpp"
#include "ndf4d/temporal_basis.hpp"
#include "ndf4d/types.hpp"

namespace ndf4d {

/// Central-difference gradient of a scalar field with step eps per axis.
template <typename Field>
Vec3 central_difference_gradient(Field&& field, const Point3& p, double eps) {
  Vec3 g;
  for (int axis = 0; axis < 3; ++axis) {
    Point3 plus = p;
    Point3 minus = p;
    plus[axis] += eps;
    minus[axis] -= eps;
    g[axis] = (field(plus) - field(minus)) / (2.0 * eps);
  }
  return g;
}

/// Dynamic iff the static signed distance is strictly above the threshold.
inline PointLabel classify_static_sdf(double static_sdf, double d_static) {
  return static_sdf > d_static ? PointLabel::kDynamic : PointLabel::kStatic;
}

/// The 4D signed distance field: F(p, t) = sum_k w_k(p) * basis(t, k), with
/// w(p) = decoder(sum of per-level interpolated features). w_0 is the static
/// signed distance.
class FieldModel {
 public:
  FieldModel() = default;
  FieldModel(FeatureGrid grid, Mlp mlp, BasisTable basis, MapConfig cfg);

  /// Fresh model: grid allocated around endpoints and sample positions,
  /// Glorot decoder and DCT basis, all seeded from cfg.seed.
  static FieldModel create(const ScanSequence& seq, std::span<const Point3> sample_positions,
                           const MapConfig& cfg);

  Eigen::VectorXd weights(const Point3& p) const;
  double query(const Point3& p, FrameIndex t) const;
  double query_static(const Point3& p) const;
  Vec3 numerical_gradient(const Point3& p, FrameIndex t, double eps) const;
  PointLabel classify_point(const Point3& p, double d_static) const;

  std::vector<double> query_batch(std::span<const Point3> points, FrameIndex t) const;
  std::vector<double> query_static_batch(std::span<const Point3> points) const;

  /// Decoded weight vectors (K x n) for a batch of points.
  Eigen::MatrixXd weights_batch(std::span<const Point3> points) const;

  int frame_count() const { return basis_.frames(); }
  const FeatureGrid& grid() const { return grid_; }
  FeatureGrid& grid() { return grid_; }
  const Mlp& mlp() const { return mlp_; }
  Mlp& mlp() { return mlp_; }
  const BasisTable& basis() const { return basis_; }
  BasisTable& basis() { return basis_; }
  const MapConfig& config() const { return cfg_; }

 private:
  FeatureGrid grid_;
  Mlp mlp_;
  BasisTable basis_;
  MapConfig cfg_;
};

}  // namespace ndf4d
