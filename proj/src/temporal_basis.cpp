#include "ndf4d/temporal_basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ndf4d/errors.hpp"

namespace ndf4d {

BasisTable BasisTable::init_dct(int frames, int basis_count) {
  if (frames < 1) throw DataError("basis table needs at least one frame");
  if (basis_count < 2) throw DataError("basis table needs at least two basis functions");
  BasisTable table;
  table.params_.resize(frames, basis_count);
  const double scale = std::numbers::pi / (2.0 * frames);
  for (int t = 0; t < frames; ++t) {
    table.params_.value(t, 0) = 1.0;
    for (int k = 1; k < basis_count; ++k) {
      table.params_.value(t, k) = std::cos(scale * (2.0 * t + 1.0) * k);
    }
  }
  return table;
}

void BasisTable::check_frame(FrameIndex t) const {
  if (t < 0 || t >= frames()) {
    throw std::out_of_range("frame " + std::to_string(t) + " outside [0, " + std::to_string(frames()) + ")");
  }
}

Eigen::VectorXd BasisTable::eval_row(FrameIndex t) const {
  check_frame(t);
  return params_.value.row(t).transpose();
}

void BasisTable::accumulate_grad(FrameIndex t, std::span<const double> weights, double upstream) {
  check_frame(t);
  const int k_count = basis_count();
  for (int k = 1; k < k_count; ++k) {
    params_.grad(t, k) += upstream * weights[static_cast<std::size_t>(k)];
  }
}

void BasisTable::set_values(const Eigen::MatrixXd& values) {
  if ((values.col(0).array() != 1.0).any()) {
    throw DataError("basis column 0 must be identically 1");
  }
  params_.resize(values.rows(), values.cols());
  params_.value = values;
}

}  // namespace ndf4d
