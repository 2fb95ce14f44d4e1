#include "ndf4d/losses.hpp"

#include <algorithm>
#include <cmath>

namespace ndf4d {
namespace {
double sign(double x) { return (x > 0.0) - (x < 0.0); }
}  // namespace

double l_surf(double pred, double d_surf) {
  if (d_surf == 0.0) return std::abs(pred);
  const double prod = pred * d_surf;
  if (prod < 0.0) return std::abs(pred);
  if (prod > d_surf * d_surf) return std::abs(pred - d_surf);
  return 0.0;
}

double l_surf_grad(double pred, double d_surf) {
  if (d_surf == 0.0) return sign(pred);
  const double prod = pred * d_surf;
  if (prod < 0.0) return sign(pred);
  if (prod > d_surf * d_surf) return sign(pred - d_surf);
  return 0.0;
}

double l_surf_interval(double pred, double d_surf) {
  const double lo = std::min(0.0, d_surf);
  const double hi = std::max(0.0, d_surf);
  if (pred < lo) return lo - pred;
  if (pred > hi) return pred - hi;
  return 0.0;
}

double l_eikonal(const Vec3& grad) {
  const double r = grad.norm() - 1.0;
  return r * r;
}

Vec3 l_eikonal_grad(const Vec3& grad) {
  const double n = grad.norm();
  if (n == 0.0) return Vec3::Zero();
  return (2.0 * (n - 1.0) / n) * grad;
}

double l_free(double pred, double truncation) { return std::abs(pred - truncation); }

double l_free_grad(double pred, double truncation) { return sign(pred - truncation); }

double l_certain(double static_sdf, double truncation) { return std::abs(static_sdf - truncation); }

double l_certain_grad(double static_sdf, double truncation) { return sign(static_sdf - truncation); }

double EpsSchedule::at(int step) const {
  const double horizon = decay_fraction * static_cast<double>(total_steps);
  const double progress = horizon > 0.0 ? std::min(static_cast<double>(step) / horizon, 1.0) : 1.0;
  return start * std::pow(end / start, progress);
}

}  // namespace ndf4d
