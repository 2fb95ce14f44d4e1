#pragma once

#include <Eigen/Core>

namespace ndf4d {

/// A trainable tensor with its gradient accumulator and Adam moments.
struct ParamBlock {
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  Eigen::MatrixXd adam_m;
  Eigen::MatrixXd adam_v;

  void resize(Eigen::Index rows, Eigen::Index cols) {
    value.setZero(rows, cols);
    grad.setZero(rows, cols);
    adam_m.setZero(rows, cols);
    adam_v.setZero(rows, cols);
  }
  void zero_grad() { grad.setZero(); }
};

struct AdamSettings {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-15;
};

/// Bias-corrected Adam. `begin_step()` once per optimizer step, then
/// `apply()` on every parameter group.
class Adam {
 public:
  explicit Adam(AdamSettings settings = {}) : settings_(settings) {}

  void begin_step() { ++step_; }
  int step() const { return step_; }
  const AdamSettings& settings() const { return settings_; }

  /// Updates columns [first_col, cols) of `block`; earlier columns are frozen
  /// (value, moments untouched).
  void apply(ParamBlock& block, Eigen::Index first_col = 0) const;

 private:
  AdamSettings settings_;
  int step_ = 0;
};

}  // namespace ndf4d
