#include "ndf4d/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "ndf4d/errors.hpp"
#include "ndf4d/parallel.hpp"
#include "ndf4d/point_index.hpp"

namespace ndf4d {

namespace {

constexpr std::size_t kNnChunk = 8192;

double index_cell_size(std::span<const Point3> points) {
  Point3 lo = points.front();
  Point3 hi = lo;
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 extent = (hi - lo).cwiseMax(Vec3::Constant(1e-3));
  return std::max(1e-3, std::cbrt(extent.prod() / static_cast<double>(points.size())));
}

std::vector<double> nn_distances(std::span<const Point3> queries, std::span<const Point3> targets, int workers) {
  const PointIndex index(targets, index_cell_size(targets));
  std::vector<double> out(queries.size());
  const std::size_t chunks = (queries.size() + kNnChunk - 1) / kNnChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t end = std::min(queries.size(), (c + 1) * kNnChunk);
    for (std::size_t i = c * kNnChunk; i < end; ++i) out[i] = index.nearest_distance(queries[i]);
  });
  return out;
}

double mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double fraction_within(const std::vector<double>& v, double threshold) {
  std::size_t n = 0;
  for (double x : v) n += x <= threshold ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(v.size());
}

void put(std::ostringstream& out, const char* key, double value) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s=%.6f\n", key, value);
  out << buf;
}

}  // namespace

double f_score_percent(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

std::vector<ReconReport> recon_metrics_multi(std::span<const Point3> pred, std::span<const Point3> gt,
                                             std::span<const double> thresholds_cm, int workers) {
  if (pred.empty() || gt.empty()) throw DataError("reconstruction metrics need non-empty point sets");
  const auto pred_to_gt = nn_distances(pred, gt, workers);
  const auto gt_to_pred = nn_distances(gt, pred, workers);
  const double accuracy = 100.0 * mean(pred_to_gt);
  const double completion = 100.0 * mean(gt_to_pred);

  std::vector<ReconReport> reports;
  for (double threshold : thresholds_cm) {
    ReconReport r;
    r.accuracy = accuracy;
    r.completion = completion;
    r.chamfer_l1 = 0.5 * (accuracy + completion);
    r.threshold = threshold;
    const double precision = fraction_within(pred_to_gt, threshold / 100.0);
    const double recall = fraction_within(gt_to_pred, threshold / 100.0);
    r.precision = 100.0 * precision;
    r.recall = 100.0 * recall;
    r.f_score = f_score_percent(precision, recall);
    r.pred_count = pred.size();
    r.gt_count = gt.size();
    reports.push_back(r);
  }
  return reports;
}

ReconReport recon_metrics(std::span<const Point3> pred, std::span<const Point3> gt, double threshold_cm,
                          int workers) {
  const double thresholds[] = {threshold_cm};
  return recon_metrics_multi(pred, gt, thresholds, workers).front();
}

std::vector<Point3> sample_mesh_surface(const TriangleMesh& mesh, double density, std::uint64_t seed) {
  if (!(density > 0.0)) throw ConfigError("sampling density must be positive");
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    total += mesh.triangle_area(i);
    cumulative[i] = total;
  }
  std::vector<Point3> out;
  if (mesh.triangles.empty() || total <= 0.0) return out;
  const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(total * density)));
  out.reserve(count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t n = 0; n < count; ++n) {
    const double pick = unit(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto& tri = mesh.triangles[static_cast<std::size_t>(it - cumulative.begin())];
    // Square-root warp gives uniform barycentric coordinates.
    const double s = std::sqrt(unit(rng));
    const double r = unit(rng);
    const Point3& a = mesh.vertices[tri[0]];
    const Point3& b = mesh.vertices[tri[1]];
    const Point3& c = mesh.vertices[tri[2]];
    out.push_back((1.0 - s) * a + s * (1.0 - r) * b + s * r * c);
  }
  return out;
}

double associated_accuracy(double sa, double da) { return std::sqrt(sa * da); }

SegReport seg_metrics(std::span<const PointLabel> pred, std::span<const PointLabel> gt) {
  if (pred.size() != gt.size()) {
    throw DataError("label count mismatch: " + std::to_string(pred.size()) + " predicted vs " +
                    std::to_string(gt.size()) + " ground truth");
  }
  SegReport r;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == PointLabel::kStatic) {
      ++r.static_total;
      r.static_correct += pred[i] == PointLabel::kStatic ? 1 : 0;
    } else {
      ++r.dynamic_total;
      r.dynamic_correct += pred[i] == PointLabel::kDynamic ? 1 : 0;
    }
  }
  if (r.static_total) r.sa = 100.0 * static_cast<double>(r.static_correct) / static_cast<double>(r.static_total);
  if (r.dynamic_total) r.da = 100.0 * static_cast<double>(r.dynamic_correct) / static_cast<double>(r.dynamic_total);
  if (r.sa && r.da) r.aa = associated_accuracy(*r.sa, *r.da);
  return r;
}

std::string format_recon_report(std::span<const ReconReport> reports, double density) {
  std::ostringstream out;
  if (reports.empty()) return {};
  const auto& first = reports.front();
  char buf[160];
  out << "Reconstruction (mean nearest-neighbour distances, no distance cap)\n";
  std::snprintf(buf, sizeof(buf), "  predicted samples: %zu (%.0f points/m^2)\n  ground-truth points: %zu\n",
                first.pred_count, density, first.gt_count);
  out << buf;
  std::snprintf(buf, sizeof(buf), "  completion: %.3f cm\n  accuracy:   %.3f cm\n  chamfer-L1: %.3f cm\n",
                first.completion, first.accuracy, first.chamfer_l1);
  out << buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "  F-score @ %g cm: %.2f %% (precision %.2f %%, recall %.2f %%)\n", r.threshold,
                  r.f_score, r.precision, r.recall);
    out << buf;
  }
  out << "[metrics]\n";
  put(out, "completion_cm", first.completion);
  put(out, "accuracy_cm", first.accuracy);
  put(out, "chamfer_l1_cm", first.chamfer_l1);
  put(out, "sample_density_per_m2", density);
  out << "pred_count=" << first.pred_count << "\n";
  out << "gt_count=" << first.gt_count << "\n";
  out << "distance_cap=none\n";
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "f_score_%gcm", r.threshold);
    put(out, buf, r.f_score);
    std::snprintf(buf, sizeof(buf), "precision_%gcm", r.threshold);
    put(out, buf, r.precision);
    std::snprintf(buf, sizeof(buf), "recall_%gcm", r.threshold);
    put(out, buf, r.recall);
  }
  return out.str();
}

std::string format_seg_report(const SegReport& report) {
  std::ostringstream out;
  char buf[160];
  auto text = [](const std::optional<double>& v) {
    char b[32];
    if (!v) return std::string("n/a");
    std::snprintf(b, sizeof(b), "%.2f %%", *v);
    return std::string(b);
  };
  out << "Segmentation\n";
  std::snprintf(buf, sizeof(buf), "  static:  %zu / %zu kept\n  dynamic: %zu / %zu removed\n", report.static_correct,
                report.static_total, report.dynamic_correct, report.dynamic_total);
  out << buf;
  out << "  SA: " << text(report.sa) << "\n  DA: " << text(report.da) << "\n  AA: " << text(report.aa) << "\n";
  out << "[metrics]\n";
  auto kv = [&](const char* key, const std::optional<double>& v) {
    if (v) {
      put(out, key, *v);
    } else {
      out << key << "=n/a\n";
    }
  };
  kv("SA", report.sa);
  kv("DA", report.da);
  kv("AA", report.aa);
  out << "static_total=" << report.static_total << "\nstatic_correct=" << report.static_correct
      << "\ndynamic_total=" << report.dynamic_total << "\ndynamic_correct=" << report.dynamic_correct << "\n";
  return out.str();
}

}  // namespace ndf4d
