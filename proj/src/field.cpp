#include "ndf4d/field.hpp"

#include <algorithm>

#include "ndf4d/errors.hpp"

namespace ndf4d {
namespace {
constexpr std::size_t kQueryChunk = 4096;
}

FieldModel::FieldModel(FeatureGrid grid, Mlp mlp, BasisTable basis, MapConfig cfg)
    : grid_(std::move(grid)), mlp_(std::move(mlp)), basis_(std::move(basis)), cfg_(std::move(cfg)) {
  if (mlp_.input_dim() != grid_.feature_dim()) {
    throw DataError("decoder input size does not match feature dimension");
  }
  if (mlp_.output_dim() != basis_.basis_count()) {
    throw DataError("decoder output size does not match basis count");
  }
}

FieldModel FieldModel::create(const ScanSequence& seq, std::span<const Point3> sample_positions,
                              const MapConfig& cfg) {
  cfg.validate();
  FeatureGrid grid = FeatureGrid::allocate(seq, sample_positions, cfg);
  std::vector<int> hidden(static_cast<std::size_t>(cfg.mlp_hidden_layers), cfg.mlp_hidden_width);
  // Distinct stream from the feature init, which also derives from cfg.seed.
  Mlp mlp = Mlp::glorot(cfg.feature_dim, hidden, cfg.basis_count, cfg.seed ^ 0xD1B54A32D192ED03ULL);
  BasisTable basis = BasisTable::init_dct(seq.frame_count(), cfg.basis_count);
  return FieldModel(std::move(grid), std::move(mlp), std::move(basis), cfg);
}

Eigen::VectorXd FieldModel::weights(const Point3& p) const {
  return mlp_.forward_one(grid_.interpolate(p));
}

double FieldModel::query(const Point3& p, FrameIndex t) const {
  const Eigen::VectorXd row = basis_.eval_row(t);
  return weights(p).dot(row);
}

double FieldModel::query_static(const Point3& p) const { return weights(p)(0); }

Vec3 FieldModel::numerical_gradient(const Point3& p, FrameIndex t, double eps) const {
  return central_difference_gradient([&](const Point3& q) { return query(q, t); }, p, eps);
}

PointLabel FieldModel::classify_point(const Point3& p, double d_static) const {
  return classify_static_sdf(query_static(p), d_static);
}

Eigen::MatrixXd FieldModel::weights_batch(std::span<const Point3> points) const {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd out(mlp_.output_dim(), n);
  Eigen::MatrixXd features(grid_.feature_dim(), static_cast<Eigen::Index>(std::min(points.size(), kQueryChunk)));
  Stencil stencil;
  for (std::size_t begin = 0; begin < points.size(); begin += kQueryChunk) {
    const std::size_t count = std::min(kQueryChunk, points.size() - begin);
    features.resize(Eigen::NoChange, static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
      grid_.interpolate_into(points[begin + i], features.col(static_cast<Eigen::Index>(i)).data(), stencil);
    }
    out.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count)) = mlp_.forward(features);
  }
  return out;
}

std::vector<double> FieldModel::query_batch(std::span<const Point3> points, FrameIndex t) const {
  const Eigen::VectorXd row = basis_.eval_row(t);
  const Eigen::MatrixXd w = weights_batch(points);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = w.col(static_cast<Eigen::Index>(i)).dot(row);
  return out;
}

std::vector<double> FieldModel::query_static_batch(std::span<const Point3> points) const {
  const Eigen::MatrixXd w = weights_batch(points);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = w(0, static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace ndf4d
