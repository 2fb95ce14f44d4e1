#pragma once

#include "ndf4d/types.hpp"

namespace ndf4d {

// Per-sample loss terms and their derivatives with respect to the
// prediction. Derivatives at kinks (|x| at 0, norm at 0) are taken as 0.

/// Near-surface loss: penalizes a wrong sign or an overshoot past d_surf;
/// zero inside the band between 0 and d_surf; plain L1 when d_surf == 0.
double l_surf(double pred, double d_surf);
double l_surf_grad(double pred, double d_surf);

/// Distance from `pred` to the interval [min(0, d_surf), max(0, d_surf)].
/// Equal to l_surf everywhere.
double l_surf_interval(double pred, double d_surf);

/// (||grad|| - 1)^2.
double l_eikonal(const Vec3& grad);
Vec3 l_eikonal_grad(const Vec3& grad);

/// |pred - tau| for free-space samples.
double l_free(double pred, double truncation);
double l_free_grad(double pred, double truncation);

/// |w_static - tau| for certain-free samples.
double l_certain(double static_sdf, double truncation);
double l_certain_grad(double static_sdf, double truncation);

/// Finite-difference step for the Eikonal probes, decaying exponentially
/// from `start` to `end` over the first decay_fraction of training, then
/// held at `end`.
struct EpsSchedule {
  double start = 0.6;
  double end = 0.075;
  int total_steps = 1;
  double decay_fraction = 0.7;

  double at(int step) const;
};

}  // namespace ndf4d
