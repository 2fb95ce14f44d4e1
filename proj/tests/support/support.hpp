#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ndf4d/field.hpp"
#include "ndf4d/sampling.hpp"
#include "ndf4d/trainer.hpp"

namespace ndf4d::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& path);

/// Model over a single finest voxel [0, 0.3]^3 (two levels, D = 8, K = 3,
/// N = 3) with non-trivial features, decoder and basis, plus a batch mixing
/// all three regions. Seeds are re-rolled internally until every sample sits
/// clear of loss and ReLU kinks, so finite differences are well defined.
struct MiniProblem {
  FieldModel model;
  std::vector<TrainSample> batch;
  StepOptions options;
};

MiniProblem make_mini_problem(std::uint64_t seed);

/// Batch objective assembled only from scalar query() / query_static()
/// calls and the per-sample loss functions.
double oracle_objective(const FieldModel& model, const std::vector<TrainSample>& batch, const StepOptions& opts);

struct GradCheckReport {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_ratio = 0.0;  // max |a - n| / tolerance
  std::string worst_parameter;
  std::size_t feature_params = 0;
  std::size_t mlp_params = 0;
  std::size_t basis_params = 0;
};

/// Compares accumulate_gradients against central differences of
/// oracle_objective for every trainable parameter. A component passes when
/// |a - n| <= rel_tol * max(|a|, |n|, floor).
GradCheckReport check_gradients(MiniProblem& problem, double step, double rel_tol, double floor);

}  // namespace ndf4d::testing
