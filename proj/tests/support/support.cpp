#include "support.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unistd.h>

#include "ndf4d/io.hpp"
#include "ndf4d/losses.hpp"

namespace ndf4d::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("ndf4d-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string slurp(const fs::path& path) { return read_file(path); }

namespace {

constexpr double kVoxel = 0.3;
constexpr double kEps = 0.05;
constexpr double kMargin = 1e-3;
constexpr double kReluMargin = 1e-4;

// Smallest |pre-activation| of any hidden unit for feature f.
double min_preactivation(const Mlp& mlp, Eigen::VectorXd f) {
  double smallest = std::numeric_limits<double>::infinity();
  const auto& layers = mlp.layers();
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    const Eigen::VectorXd z = layers[i].weight.value * f + layers[i].bias.value.col(0);
    smallest = std::min(smallest, z.cwiseAbs().minCoeff());
    f = z.cwiseMax(0.0);
  }
  return smallest;
}

bool well_conditioned(const MiniProblem& p) {
  const auto& m = p.model;
  const double tau = p.options.truncation;
  for (const auto& s : p.batch) {
    std::vector<Point3> points = {s.q};
    if (s.region == Region::kSurface) {
      for (int a = 0; a < 3; ++a) {
        for (double sign : {-1.0, 1.0}) {
          Point3 q = s.q;
          q[a] += sign * p.options.eps;
          points.push_back(q);
        }
      }
    }
    for (const auto& q : points) {
      if (min_preactivation(m.mlp(), m.grid().interpolate(q)) < kReluMargin) return false;
    }
    const double f = m.query(s.q, s.t);
    switch (s.region) {
      case Region::kSurface: {
        if (std::abs(f) < kMargin) return false;
        if (s.d_surf != 0.0) {
          const double prod = f * s.d_surf;
          if (std::abs(prod) < kMargin || std::abs(prod - s.d_surf * s.d_surf) < kMargin) return false;
        }
        const Vec3 g = m.numerical_gradient(s.q, s.t, p.options.eps);
        if (g.norm() < kMargin) return false;
        break;
      }
      case Region::kCertainFree:
        if (std::abs(m.query_static(s.q) - tau) < kMargin) return false;
        [[fallthrough]];
      case Region::kFree:
        if (std::abs(f - tau) < kMargin) return false;
        break;
    }
  }
  return true;
}

MiniProblem build(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> inside(0.08, 0.22);

  MapConfig cfg;
  cfg.levels = 2;
  cfg.feature_dim = 8;
  cfg.basis_count = 3;
  cfg.finest_voxel_size = kVoxel;

  FeatureGrid grid(cfg.levels, cfg.feature_dim, cfg.finest_voxel_size, cfg.level_scale_factor);
  grid.touch(Point3(0.15, 0.15, 0.15));
  grid.reset_params();
  for (Eigen::Index j = 0; j < grid.params().value.cols(); ++j) {
    for (Eigen::Index i = 0; i < grid.params().value.rows(); ++i) grid.params().value(i, j) = 0.5 * unit(rng);
  }
  Mlp mlp = Mlp::glorot(cfg.feature_dim, {cfg.mlp_hidden_width, cfg.mlp_hidden_width}, cfg.basis_count, rng());
  for (auto& layer : mlp.layers()) {
    for (Eigen::Index i = 0; i < layer.bias.value.rows(); ++i) layer.bias.value(i, 0) = 0.05 * unit(rng);
  }
  BasisTable basis = BasisTable::init_dct(3, cfg.basis_count);
  Eigen::MatrixXd phi = basis.values();
  for (int t = 0; t < 3; ++t) {
    for (int k = 1; k < cfg.basis_count; ++k) phi(t, k) += 0.2 * unit(rng);
  }
  basis.set_values(phi);

  MiniProblem p;
  p.model = FieldModel(std::move(grid), std::move(mlp), std::move(basis), cfg);
  p.options.truncation = cfg.truncation;
  p.options.eps = kEps;
  p.options.weights = {cfg.lambda_eikonal, cfg.lambda_free, cfg.lambda_certain};
  p.options.chunks = 1;
  p.options.workers = 1;

  auto sample = [&](Region region) {
    TrainSample s;
    s.q = Point3(inside(rng), inside(rng), inside(rng));
    s.t = static_cast<FrameIndex>(rng() % 3);
    s.region = region;
    return s;
  };
  // Surface samples cover the on-surface, wrong-sign, overshoot and band cases.
  for (int c = 0; c < 4; ++c) {
    TrainSample s = sample(Region::kSurface);
    const double f = p.model.query(s.q, s.t);
    switch (c) {
      case 0: s.d_surf = 0.0; break;
      case 1: s.d_surf = f > 0 ? -0.2 : 0.2; break;
      case 2: s.d_surf = 0.5 * f; break;
      default: s.d_surf = 2.0 * f; break;
    }
    p.batch.push_back(s);
  }
  for (int i = 0; i < 3; ++i) {
    TrainSample s = sample(Region::kFree);
    s.d_surf = 1.0;
    p.batch.push_back(s);
  }
  for (int i = 0; i < 2; ++i) {
    TrainSample s = sample(Region::kCertainFree);
    s.d_surf = 2.0;
    p.batch.push_back(s);
  }
  return p;
}

}  // namespace

MiniProblem make_mini_problem(std::uint64_t seed) {
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    MiniProblem p = build(seed * 1000003ULL + attempt);
    if (well_conditioned(p)) return p;
  }
  throw std::runtime_error("could not build a well-conditioned miniature problem");
}

double oracle_objective(const FieldModel& model, const std::vector<TrainSample>& batch, const StepOptions& opts) {
  double surf = 0.0, eik = 0.0, free = 0.0, certain = 0.0;
  std::size_t ns = 0, nf = 0, nc = 0;
  for (const auto& s : batch) {
    const double f = model.query(s.q, s.t);
    switch (s.region) {
      case Region::kSurface: {
        ++ns;
        surf += l_surf(f, s.d_surf);
        const Vec3 g = central_difference_gradient([&](const Point3& x) { return model.query(x, s.t); }, s.q, opts.eps);
        eik += l_eikonal(g);
        break;
      }
      case Region::kCertainFree:
        ++nc;
        certain += l_certain(model.query_static(s.q), opts.truncation);
        [[fallthrough]];
      case Region::kFree:
        ++nf;
        free += l_free(f, opts.truncation);
        break;
    }
  }
  double total = 0.0;
  if (ns) total += (surf + opts.weights.eikonal * eik) / static_cast<double>(ns);
  if (nf) total += opts.weights.free * free / static_cast<double>(nf);
  if (nc) total += opts.weights.certain * certain / static_cast<double>(nc);
  return total;
}

GradCheckReport check_gradients(MiniProblem& problem, double step, double rel_tol, double floor) {
  FieldModel& m = problem.model;
  accumulate_gradients(m, problem.batch, problem.options);

  GradCheckReport report;
  auto check_block = [&](Eigen::MatrixXd& value, const Eigen::MatrixXd& grad, Eigen::Index first_col,
                         const std::string& name, std::size_t& counter) {
    const Eigen::MatrixXd analytic = grad;
    for (Eigen::Index j = first_col; j < value.cols(); ++j) {
      for (Eigen::Index i = 0; i < value.rows(); ++i) {
        const double saved = value(i, j);
        value(i, j) = saved + step;
        const double plus = oracle_objective(m, problem.batch, problem.options);
        value(i, j) = saved - step;
        const double minus = oracle_objective(m, problem.batch, problem.options);
        value(i, j) = saved;
        const double numeric = (plus - minus) / (2.0 * step);
        const double a = analytic(i, j);
        const double tol = rel_tol * std::max({std::abs(a), std::abs(numeric), floor});
        const double ratio = std::abs(a - numeric) / tol;
        ++report.checked;
        ++counter;
        if (ratio > 1.0) ++report.failures;
        if (ratio > report.worst_ratio) {
          report.worst_ratio = ratio;
          report.worst_parameter = name + "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        }
      }
    }
  };

  check_block(m.grid().params().value, m.grid().params().grad, 0, "feature", report.feature_params);
  auto& layers = m.mlp().layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    check_block(layers[l].weight.value, layers[l].weight.grad, 0, "W" + std::to_string(l), report.mlp_params);
    check_block(layers[l].bias.value, layers[l].bias.grad, 0, "b" + std::to_string(l), report.mlp_params);
  }
  // Column 0 of the basis is frozen and not a parameter.
  check_block(m.basis().params().value, m.basis().params().grad, 1, "basis", report.basis_params);
  return report;
}

}  // namespace ndf4d::testing
