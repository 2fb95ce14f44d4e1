#include "ndf4d/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include "ndf4d/errors.hpp"
#include "ndf4d/io.hpp"
#include "ndf4d/parallel.hpp"

namespace ndf4d {
namespace {

constexpr int kProbesPerSurfaceSample = 6;

struct RegionCounts {
  std::size_t surface = 0;
  std::size_t free = 0;
  std::size_t certain = 0;
};

struct LossSums {
  double surf = 0.0;
  double eik = 0.0;
  double free = 0.0;
  double certain = 0.0;
};

/// Everything one chunk produces; merged in chunk order.
struct ChunkResult {
  LossSums sums;
  MlpGradients mlp_grads;
  Eigen::MatrixXd basis_grad;
  std::vector<Stencil> stencils;
  Eigen::MatrixXd d_features;
};

void process_chunk(const FieldModel& model, std::span<const TrainSample> batch, const StepOptions& opts,
                   const RegionCounts& counts, ChunkResult& out) {
  const auto& grid = model.grid();
  const auto& mlp = model.mlp();
  const Eigen::MatrixXd& basis = model.basis().values();
  const double tau = opts.truncation;
  const double eps = opts.eps;

  // Query layout: each sample's main query, followed for surface samples by
  // probes (+x, -x, +y, -y, +z, -z).
  std::size_t query_count = 0;
  for (const auto& s : batch) {
    query_count += 1 + (s.region == Region::kSurface ? kProbesPerSurfaceSample : 0);
  }
  const auto q_count = static_cast<Eigen::Index>(query_count);
  Eigen::MatrixXd features(grid.feature_dim(), q_count);
  out.stencils.resize(query_count);
  std::vector<FrameIndex> frames(query_count);
  {
    std::size_t q = 0;
    for (const auto& s : batch) {
      auto add = [&](const Point3& p) {
        grid.interpolate_into(p, features.col(static_cast<Eigen::Index>(q)).data(), out.stencils[q]);
        frames[q] = s.t;
        ++q;
      };
      add(s.q);
      if (s.region == Region::kSurface) {
        for (int axis = 0; axis < 3; ++axis) {
          Point3 plus = s.q;
          Point3 minus = s.q;
          plus[axis] += eps;
          minus[axis] -= eps;
          add(plus);
          add(minus);
        }
      }
    }
  }

  MlpTape tape;
  const Eigen::MatrixXd weights = mlp.forward(features, &tape);
  Eigen::VectorXd pred(q_count);
  for (Eigen::Index q = 0; q < q_count; ++q) pred(q) = weights.col(q).dot(basis.row(frames[static_cast<std::size_t>(q)]).transpose());

  // dL/dF per query, plus a direct dL/dw_0 for certain-free samples.
  Eigen::VectorXd up_pred = Eigen::VectorXd::Zero(q_count);
  Eigen::VectorXd up_static = Eigen::VectorXd::Zero(q_count);
  const double surf_scale = counts.surface ? 1.0 / static_cast<double>(counts.surface) : 0.0;
  const double eik_scale = counts.surface ? opts.weights.eikonal / static_cast<double>(counts.surface) : 0.0;
  const double free_total = static_cast<double>(counts.free + counts.certain);
  const double free_scale = free_total > 0 ? opts.weights.free / free_total : 0.0;
  const double certain_scale = counts.certain ? opts.weights.certain / static_cast<double>(counts.certain) : 0.0;

  std::size_t q = 0;
  for (const auto& s : batch) {
    const auto main = static_cast<Eigen::Index>(q);
    const double f = pred(main);
    if (s.region == Region::kSurface) {
      out.sums.surf += l_surf(f, s.d_surf);
      up_pred(main) += surf_scale * l_surf_grad(f, s.d_surf);
      Vec3 g;
      for (int axis = 0; axis < 3; ++axis) {
        g[axis] = (pred(main + 1 + 2 * axis) - pred(main + 2 + 2 * axis)) / (2.0 * eps);
      }
      out.sums.eik += l_eikonal(g);
      const Vec3 dg = l_eikonal_grad(g);
      for (int axis = 0; axis < 3; ++axis) {
        const double u = eik_scale * dg[axis] / (2.0 * eps);
        up_pred(main + 1 + 2 * axis) += u;
        up_pred(main + 2 + 2 * axis) -= u;
      }
      q += 1 + kProbesPerSurfaceSample;
      continue;
    }
    out.sums.free += l_free(f, tau);
    up_pred(main) += free_scale * l_free_grad(f, tau);
    if (s.region == Region::kCertainFree) {
      const double w0 = weights(0, main);
      out.sums.certain += l_certain(w0, tau);
      up_static(main) += certain_scale * l_certain_grad(w0, tau);
    }
    q += 1;
  }

  // Upstream on the decoded weights: dF/dw_k = basis(t, k).
  Eigen::MatrixXd up_weights(weights.rows(), q_count);
  out.basis_grad.setZero(basis.rows(), basis.cols());
  for (Eigen::Index i = 0; i < q_count; ++i) {
    const FrameIndex t = frames[static_cast<std::size_t>(i)];
    up_weights.col(i) = up_pred(i) * basis.row(t).transpose();
    up_weights(0, i) += up_static(i);
    if (up_pred(i) != 0.0) {
      out.basis_grad.row(t).tail(basis.cols() - 1) += up_pred(i) * weights.col(i).tail(basis.cols() - 1).transpose();
    }
  }
  out.mlp_grads = mlp.make_gradients();
  out.d_features = mlp.backward(tape, up_weights, out.mlp_grads);
}

}  // namespace

LossBreakdown accumulate_gradients(FieldModel& model, std::span<const TrainSample> batch, const StepOptions& opts) {
  RegionCounts counts;
  for (const auto& s : batch) {
    switch (s.region) {
      case Region::kSurface: ++counts.surface; break;
      case Region::kFree: ++counts.free; break;
      case Region::kCertainFree: ++counts.certain; break;
    }
  }

  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(opts.chunks, 1)), batch.size()));
  std::vector<ChunkResult> results(chunks);
  const std::size_t per_chunk = (batch.size() + chunks - 1) / std::max<std::size_t>(chunks, 1);
  parallel_for(chunks, opts.workers, [&](std::size_t c) {
    const std::size_t begin = std::min(batch.size(), c * per_chunk);
    const std::size_t end = std::min(batch.size(), begin + per_chunk);
    process_chunk(model, batch.subspan(begin, end - begin), opts, counts, results[c]);
  });

  model.grid().params().zero_grad();
  model.mlp().zero_grad();
  model.basis().params().zero_grad();

  LossSums sums;
  auto& feature_grad = model.grid().params().grad;
  const int dim = model.grid().feature_dim();
  for (auto& r : results) {
    sums.surf += r.sums.surf;
    sums.eik += r.sums.eik;
    sums.free += r.sums.free;
    sums.certain += r.sums.certain;
    if (r.stencils.empty()) continue;
    model.mlp().add_to_grad(r.mlp_grads);
    model.basis().params().grad += r.basis_grad;
    for (std::size_t i = 0; i < r.stencils.size(); ++i) {
      const double* up = r.d_features.col(static_cast<Eigen::Index>(i)).data();
      for (const auto& e : r.stencils[i]) {
        if (!e.present()) continue;
        double* g = feature_grad.col(e.vertex).data();
        for (int d = 0; d < dim; ++d) g[d] += e.weight * up[d];
      }
    }
  }

  LossBreakdown out;
  out.surface_count = counts.surface;
  out.free_count = counts.free + counts.certain;
  out.certain_count = counts.certain;
  out.l_surf = counts.surface ? sums.surf / static_cast<double>(counts.surface) : 0.0;
  out.l_eik = counts.surface ? sums.eik / static_cast<double>(counts.surface) : 0.0;
  out.l_free = out.free_count ? sums.free / static_cast<double>(out.free_count) : 0.0;
  out.l_certain = counts.certain ? sums.certain / static_cast<double>(counts.certain) : 0.0;
  out.total = out.l_surf + opts.weights.eikonal * out.l_eik + opts.weights.free * out.l_free +
              opts.weights.certain * out.l_certain;
  return out;
}

Trainer::Trainer(FieldModel& model, AdamSettings adam, StepOptions base)
    : model_(model), adam_(adam), base_(base) {}

LossBreakdown Trainer::train_step(std::span<const TrainSample> batch, double eps) {
  StepOptions opts = base_;
  opts.eps = eps;
  const LossBreakdown loss = accumulate_gradients(model_, batch, opts);
  adam_.begin_step();
  model_.grid().apply_adam(adam_);
  model_.mlp().apply_adam(adam_);
  model_.basis().apply_adam(adam_);
  return loss;
}

EpsSchedule eps_schedule(const MapConfig& cfg) {
  return {cfg.resolved_eps_start(), cfg.resolved_eps_end(), cfg.train_steps, cfg.eps_decay_fraction};
}

StepOptions step_options(const MapConfig& cfg, const TrainOptions& opts) {
  StepOptions s;
  s.truncation = cfg.truncation;
  s.eps = cfg.resolved_eps_end();
  s.weights = {cfg.lambda_eikonal, cfg.lambda_free, cfg.lambda_certain};
  s.workers = opts.workers > 0 ? opts.workers : default_workers();
  s.chunks = opts.deterministic ? kDeterministicChunks : s.workers;
  return s;
}

TrainResult train(const ScanSequence& seq, const MapConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  const StepOptions base = step_options(cfg, opts);
  SamplePool pool = build_pool(seq, cfg, cfg.seed, base.workers);
  if (pool.size() == 0) throw DataError("no usable rays: every ray is shorter than the truncation distance");

  TrainResult result;
  result.surface_samples = pool.surface.size();
  result.free_samples = pool.free.size();
  result.certain_samples = pool.certain.size();
  result.skipped_rays = pool.skipped_rays;
  {
    const std::vector<Point3> positions = pool.positions();
    result.model = FieldModel::create(seq, positions, cfg);
  }

  // One flat sample array keeps batches contiguous for the chunked step.
  std::vector<TrainSample> samples;
  samples.reserve(pool.size());
  for (auto* list : {&pool.surface, &pool.free, &pool.certain}) {
    samples.insert(samples.end(), list->begin(), list->end());
    std::vector<TrainSample>().swap(*list);
  }

  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::uint32_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0u);
  std::size_t cursor = order.size();

  AdamSettings adam;
  adam.learning_rate = cfg.learning_rate;
  Trainer trainer(result.model, adam, base);
  const EpsSchedule schedule = eps_schedule(cfg);
  std::vector<TrainSample> batch(static_cast<std::size_t>(cfg.batch_size));
  result.log.reserve(static_cast<std::size_t>(cfg.train_steps));

  for (int step = 0; step < cfg.train_steps; ++step) {
    for (auto& slot : batch) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        cursor = 0;
      }
      slot = samples[order[cursor++]];
    }
    const double eps = schedule.at(step);
    LossRecord record{step, trainer.train_step(batch, eps), eps};
    if (opts.on_step) opts.on_step(record);
    result.log.push_back(record);
  }
  return result;
}

void write_loss_log(const std::filesystem::path& path, const std::vector<LossRecord>& log) {
  write_file_atomic(
      path,
      [&](std::ostream& out) {
        out << "step,l_surf,l_eik,l_free,l_certain,total,eps\n";
        char line[256];
        for (const auto& r : log) {
          std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.step, r.loss.l_surf,
                        r.loss.l_eik, r.loss.l_free, r.loss.l_certain, r.loss.total, r.eps);
          out << line;
        }
      },
      false);
}

}  // namespace ndf4d
