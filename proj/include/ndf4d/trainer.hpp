#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "ndf4d/config.hpp"
#include "ndf4d/field.hpp"
#include "ndf4d/losses.hpp"
#include "ndf4d/optimizer.hpp"
#include "ndf4d/sampling.hpp"

namespace ndf4d {

struct LossWeights {
  double eikonal = 0.02;
  double free = 0.25;
  double certain = 0.2;
};

/// Batch objective: per-region means and their weighted total
/// total = surf + w_e * eik + w_f * free + w_c * certain.
/// The free mean runs over free and certain-free samples together; the
/// certain term adds a static-component penalty on the certain-free ones.
struct LossBreakdown {
  double l_surf = 0.0;
  double l_eik = 0.0;
  double l_free = 0.0;
  double l_certain = 0.0;
  double total = 0.0;
  std::size_t surface_count = 0;
  std::size_t free_count = 0;  // free + certain-free
  std::size_t certain_count = 0;
};

struct StepOptions {
  double truncation = 0.5;
  double eps = 0.075;
  LossWeights weights;
  int chunks = 1;   // fixed reduction partition; results depend only on this
  int workers = 1;
};

/// Zeroes every gradient buffer, then accumulates the gradient of the batch
/// objective into grid, decoder and basis. Surface samples add six central
/// difference probes at +-eps per axis for the Eikonal term; gradients flow
/// through all seven queries.
LossBreakdown accumulate_gradients(FieldModel& model, std::span<const TrainSample> batch, const StepOptions& opts);

struct LossRecord {
  int step = 0;
  LossBreakdown loss;
  double eps = 0.0;
};

/// Runs Adam steps on a model. Column 0 of the basis stays frozen.
class Trainer {
 public:
  Trainer(FieldModel& model, AdamSettings adam, StepOptions base);

  LossBreakdown train_step(std::span<const TrainSample> batch, double eps);
  const Adam& optimizer() const { return adam_; }

 private:
  FieldModel& model_;
  Adam adam_;
  StepOptions base_;
};

struct TrainOptions {
  int workers = 0;
  bool deterministic = false;
  std::function<void(const LossRecord&)> on_step;
};

struct TrainResult {
  FieldModel model;
  std::vector<LossRecord> log;
  std::size_t surface_samples = 0;
  std::size_t free_samples = 0;
  std::size_t certain_samples = 0;
  std::size_t skipped_rays = 0;
};

EpsSchedule eps_schedule(const MapConfig& cfg);
StepOptions step_options(const MapConfig& cfg, const TrainOptions& opts);

/// Offline training: builds the sample pool, allocates the model, then runs
/// cfg.train_steps Adam steps over per-epoch shuffled batches.
TrainResult train(const ScanSequence& seq, const MapConfig& cfg, const TrainOptions& opts = {});

/// CSV with header step,l_surf,l_eik,l_free,l_certain,total,eps.
void write_loss_log(const std::filesystem::path& path, const std::vector<LossRecord>& log);

/// Reduction partition used in deterministic mode regardless of worker count.
inline constexpr int kDeterministicChunks = 8;

}  // namespace ndf4d
