#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ndf4d/errors.hpp"
#include "ndf4d/evaluation.hpp"

using namespace ndf4d;

namespace {

std::vector<Point3> random_cloud(std::uint64_t seed, std::size_t n, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  return pts;
}

// Plane x = offset sampled on a 5 cm grid in y and z.
std::vector<Point3> plane(double offset) {
  std::vector<Point3> pts;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) pts.emplace_back(offset, 0.05 * i, 0.05 * j);
  }
  return pts;
}

double brute_nn(const std::vector<Point3>& targets, const Point3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : targets) best = std::min(best, (q - p).norm());
  return best;
}

}  // namespace

TEST_CASE("identical clouds give zero distances and F = 100") {
  const auto pts = random_cloud(1, 500, 2.0);
  const auto r = recon_metrics(pts, pts, 1.0);
  CHECK(r.accuracy == 0.0);
  CHECK(r.completion == 0.0);
  CHECK(r.chamfer_l1 == 0.0);
  CHECK(r.f_score == 100.0);
}

TEST_CASE("rigid shift by exactly the threshold") {
  const auto gt = plane(0.0);
  const auto pred = plane(0.2);
  const auto at = recon_metrics(pred, gt, 20.0);
  CHECK(at.precision == 100.0);
  CHECK(at.recall == 100.0);
  CHECK(at.f_score == 100.0);
  CHECK(at.accuracy == doctest::Approx(20.0));
  CHECK(recon_metrics(pred, gt, 10.0).f_score == 0.0);
}

TEST_CASE("F-score arithmetic") {
  CHECK(f_score_percent(0.8, 0.6) == doctest::Approx(2 * 0.8 * 0.6 / 1.4 * 100));
  CHECK(f_score_percent(0.8, 0.6) == doctest::Approx(68.57).epsilon(1e-4));
  CHECK(f_score_percent(0.0, 0.0) == 0.0);
  CHECK(f_score_percent(1.0, 1.0) == 100.0);
}

TEST_CASE("recon metrics equal brute-force nearest neighbours") {
  for (std::uint64_t seed : {3, 4, 5}) {
    const auto pred = random_cloud(seed, 1000, 1.0);
    const auto gt = random_cloud(seed + 100, 1000, 1.2);
    double acc = 0, comp = 0;
    std::size_t p_in = 0, r_in = 0;
    const double thr = 0.1;
    for (const auto& p : pred) {
      const double d = brute_nn(gt, p);
      acc += d;
      p_in += d <= thr;
    }
    for (const auto& g : gt) {
      const double d = brute_nn(pred, g);
      comp += d;
      r_in += d <= thr;
    }
    acc = 100 * acc / 1000;
    comp = 100 * comp / 1000;
    const auto r = recon_metrics(pred, gt, 10.0, 2);
    CHECK(std::abs(r.accuracy - acc) <= 1e-9);
    CHECK(std::abs(r.completion - comp) <= 1e-9);
    CHECK(std::abs(r.chamfer_l1 - 0.5 * (acc + comp)) <= 1e-9);
    CHECK(std::abs(r.f_score - f_score_percent(p_in / 1000.0, r_in / 1000.0)) <= 1e-9);
  }
}

TEST_CASE("symmetry and threshold monotonicity") {
  const auto a = random_cloud(7, 400, 1.0);
  const auto b = random_cloud(8, 300, 1.0);
  const auto ab = recon_metrics(a, b, 5.0);
  const auto ba = recon_metrics(b, a, 5.0);
  CHECK(ab.accuracy == ba.completion);
  CHECK(ab.completion == ba.accuracy);
  CHECK(ab.chamfer_l1 == doctest::Approx(ba.chamfer_l1).epsilon(1e-15));
  std::vector<double> thresholds;
  for (int i = 0; i <= 40; ++i) thresholds.push_back(i * 1.0);
  const auto reports = recon_metrics_multi(a, b, thresholds);
  for (std::size_t i = 1; i < reports.size(); ++i) CHECK(reports[i].f_score >= reports[i - 1].f_score);
  for (const auto& r : reports) {
    CHECK(r.f_score >= 0.0);
    CHECK(r.f_score <= 100.0);
  }
}

TEST_CASE("empty inputs are errors") {
  const auto a = random_cloud(1, 10, 1.0);
  CHECK_THROWS_AS(recon_metrics({}, a, 1.0), DataError);
  CHECK_THROWS_AS(recon_metrics(a, {}, 1.0), DataError);
}

TEST_CASE("mesh sampling: count, support and uniformity") {
  TriangleMesh square;
  square.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 5}, {0.01, 0, 5}, {0, 0.01, 5}};
  square.triangles = {{0, 1, 2}, {0, 2, 3}};
  const auto pts = sample_mesh_surface(square, 1e4, 3);
  CHECK(pts.size() == 10000);
  std::size_t lower = 0;
  for (const auto& p : pts) {
    CHECK(p.z() == 0.0);
    CHECK(p.x() >= -1e-12);
    CHECK(p.x() <= 1 + 1e-12);
    lower += p.x() > p.y() ? 1 : 0;
  }
  CHECK(std::abs(static_cast<double>(lower) / 10000 - 0.5) < 0.03);
  // Quadrant counts of a uniform distribution.
  std::size_t q = 0;
  for (const auto& p : pts) q += (p.x() < 0.5 && p.y() < 0.5) ? 1 : 0;
  CHECK(std::abs(static_cast<double>(q) / 10000 - 0.25) < 0.03);
  CHECK(sample_mesh_surface(square, 1e4, 3) == pts);
  CHECK(sample_mesh_surface(TriangleMesh{}, 1e4, 3).empty());
}

TEST_CASE("segmentation: perfect and all-static") {
  const std::vector<PointLabel> gt = {PointLabel::kStatic, PointLabel::kDynamic, PointLabel::kStatic};
  const auto perfect = seg_metrics(gt, gt);
  CHECK(*perfect.sa == 100.0);
  CHECK(*perfect.da == 100.0);
  CHECK(*perfect.aa == 100.0);
  const std::vector<PointLabel> all_static(3, PointLabel::kStatic);
  const auto none = seg_metrics(all_static, gt);
  CHECK(*none.da == 0.0);
  CHECK(*none.aa == 0.0);
  CHECK(*none.sa == 100.0);
}

TEST_CASE("segmentation: published SA/DA pair gives AA 95.63") {
  const double aa = associated_accuracy(98.99, 92.37);
  CHECK(std::abs(aa - 95.63) <= 0.01);
  CHECK(aa == doctest::Approx(std::sqrt(98.99 * 92.37)).epsilon(1e-15));
}

TEST_CASE("segmentation: absent class is not applicable") {
  const std::vector<PointLabel> gt(4, PointLabel::kStatic);
  const auto r = seg_metrics(gt, gt);
  CHECK(r.sa.has_value());
  CHECK_FALSE(r.da.has_value());
  CHECK_FALSE(r.aa.has_value());
  CHECK(format_seg_report(r).find("DA=n/a") != std::string::npos);
  CHECK_THROWS_AS(seg_metrics(gt, std::vector<PointLabel>(3)), DataError);
}

TEST_CASE("segmentation equals a brute-force confusion matrix") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 500;
    std::vector<PointLabel> pred(n), gt(n);
    std::size_t conf[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < n; ++i) {
      gt[i] = static_cast<PointLabel>(rng() % 2);
      pred[i] = static_cast<PointLabel>(rng() % 2);
      conf[static_cast<int>(gt[i])][static_cast<int>(pred[i])]++;
    }
    const auto r = seg_metrics(pred, gt);
    const std::size_t ns = conf[0][0] + conf[0][1];
    const std::size_t nd = conf[1][0] + conf[1][1];
    if (ns) CHECK(*r.sa == doctest::Approx(100.0 * conf[0][0] / ns));
    if (nd) CHECK(*r.da == doctest::Approx(100.0 * conf[1][1] / nd));
    if (ns && nd) {
      CHECK(std::abs(*r.aa - std::sqrt(*r.sa * *r.da)) <= 1e-9);
      CHECK(*r.aa >= 0.0);
      CHECK(*r.aa <= 100.0);
    }
  }
}

TEST_CASE("reports carry a key=value block") {
  const auto pts = random_cloud(2, 50, 1.0);
  const double thresholds[] = {1.0, 20.0};
  const auto reports = recon_metrics_multi(pts, pts, thresholds);
  const std::string text = format_recon_report(reports, 1e4);
  CHECK(text.find("[metrics]") != std::string::npos);
  CHECK(text.find("chamfer_l1_cm=0.000000") != std::string::npos);
  CHECK(text.find("f_score_20cm=100.000000") != std::string::npos);
  CHECK(text.find("sample_density_per_m2=10000") != std::string::npos);
}
