#pragma once

#include <span>

#include <Eigen/Core>

#include "ndf4d/optimizer.hpp"
#include "ndf4d/types.hpp"

namespace ndf4d {

/// The K shared temporal basis functions sampled at the N scan times, stored
/// as an N x K table. Column 0 is the constant static basis and never
/// changes; the remaining columns are trainable.
class BasisTable {
 public:
  BasisTable() = default;

  /// DCT-II initialization: value(t, k) = cos(pi / (2N) * (2t + 1) * k),
  /// k 0-based. Requires N >= 1 and K >= 2; K > N is allowed (an
  /// over-complete basis) and flagged by `overcomplete()`.
  static BasisTable init_dct(int frames, int basis_count);

  int frames() const { return static_cast<int>(params_.value.rows()); }
  int basis_count() const { return static_cast<int>(params_.value.cols()); }
  bool overcomplete() const { return basis_count() > frames(); }

  /// Row t of the table. Throws std::out_of_range for t outside [0, N).
  Eigen::VectorXd eval_row(FrameIndex t) const;
  double value(FrameIndex t, int k) const { return params_.value(t, k); }

  /// grad(t, k) += upstream * weights[k] for k >= 1. Column 0 is untouched.
  void accumulate_grad(FrameIndex t, std::span<const double> weights, double upstream);

  const Eigen::MatrixXd& values() const { return params_.value; }
  const Eigen::MatrixXd& grad() const { return params_.grad; }
  ParamBlock& params() { return params_; }
  const ParamBlock& params() const { return params_; }

  /// Overwrites the trainable columns; column 0 of `values` must be all ones.
  void set_values(const Eigen::MatrixXd& values);

  void apply_adam(const Adam& adam) { adam.apply(params_, 1); }

 private:
  void check_frame(FrameIndex t) const;

  ParamBlock params_;
};

}  // namespace ndf4d
