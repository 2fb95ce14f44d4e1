#include "ndf4d/optimizer.hpp"

#include <cmath>

namespace ndf4d {

void Adam::apply(ParamBlock& block, Eigen::Index first_col) const {
  const double b1 = settings_.beta1;
  const double b2 = settings_.beta2;
  const double correction1 = 1.0 - std::pow(b1, step_);
  const double correction2 = 1.0 - std::pow(b2, step_);
  const double step_size = settings_.learning_rate / correction1;
  const double inv_sqrt_c2 = 1.0 / std::sqrt(correction2);
  const Eigen::Index cols = block.value.cols() - first_col;
  if (cols <= 0) return;
  auto value = block.value.rightCols(cols).array();
  auto grad = block.grad.rightCols(cols).array();
  auto m = block.adam_m.rightCols(cols).array();
  auto v = block.adam_v.rightCols(cols).array();
  m = b1 * m + (1.0 - b1) * grad;
  v = b2 * v + (1.0 - b2) * grad.square();
  value -= step_size * m / (v.sqrt() * inv_sqrt_c2 + settings_.epsilon);
}

}  // namespace ndf4d
