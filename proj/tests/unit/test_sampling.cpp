#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ndf4d/point_index.hpp"
#include "ndf4d/sampling.hpp"

using namespace ndf4d;

namespace {

double brute_nearest(const std::vector<Point3>& pts, const Point3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : pts) best = std::min(best, (q - p).norm());
  return best;
}

MapConfig small_config() {
  MapConfig c;
  c.surface_samples = 5;
  c.free_samples = 15;
  return c;
}

}  // namespace

TEST_CASE("sample_ray: lambda ranges for R=10, tau=0.5") {
  SampleRng rng(1);
  std::vector<TrainSample> out;
  const Point3 o(1, 2, 3);
  const Point3 s = o + Point3(6, 8, 0);  // R = 10
  for (int i = 0; i < 200; ++i) REQUIRE(sample_ray(o, s, 4, 0.5, 5, 15, rng, out));
  int surface = 0, free = 0;
  for (const auto& x : out) {
    const double lambda = (x.q - o).norm() / 10.0;
    CHECK(x.t == 4);
    CHECK(std::abs(x.d_surf - (1.0 - lambda) * 10.0) <= 1e-9);
    if (x.region == Region::kSurface) {
      ++surface;
      CHECK(lambda > 0.95 - 1e-12);
      CHECK(lambda < 1.05 + 1e-12);
      CHECK(std::abs(x.d_surf) <= 0.5);
    } else {
      ++free;
      CHECK(x.region == Region::kFree);
      CHECK(lambda > 0.0);
      CHECK(lambda < 0.95 + 1e-12);
      CHECK(x.d_surf >= 0.5 - 1e-12);
      CHECK(x.d_surf < 10.0);
    }
  }
  CHECK(surface == 200 * 5);
  CHECK(free == 200 * 15);
}

TEST_CASE("sample_ray: short rays are skipped") {
  SampleRng rng(1);
  std::vector<TrainSample> out;
  CHECK_FALSE(sample_ray(Point3::Zero(), Point3(0.5, 0, 0), 0, 0.5, 5, 15, rng, out));
  CHECK_FALSE(sample_ray(Point3::Zero(), Point3(0.2, 0, 0), 0, 0.5, 5, 15, rng, out));
  CHECK(out.empty());
}

TEST_CASE("projective distance examples") {
  // d_surf = (1 - lambda) R.
  CHECK((1.0 - 1.0) * 10.0 == 0.0);
  CHECK((1.0 - 1.05) * 10.0 == doctest::Approx(-0.5));
  SampleRng rng(3);
  std::vector<TrainSample> out;
  sample_ray(Point3::Zero(), Point3(10, 0, 0), 0, 0.5, 200, 0, rng, out);
  double lo = 1e9, hi = -1e9;
  for (const auto& s : out) {
    lo = std::min(lo, s.d_surf);
    hi = std::max(hi, s.d_surf);
  }
  CHECK(lo > -0.5);
  CHECK(hi < 0.5);
  CHECK(lo < -0.45);  // the band is actually covered
  CHECK(hi > 0.45);
}

TEST_CASE("build_pool: single ray counts") {
  const ScanSequence seq({Scan{0, Point3::Zero(), {Point3(5, 0, 0)}}});
  const auto pool = build_pool(seq, small_config(), 7);
  CHECK(pool.surface.size() == 5);
  CHECK(pool.free.size() + pool.certain.size() == 15);
  CHECK(pool.size() == 20);
  CHECK(pool.skipped_rays == 0);
}

TEST_CASE("build_pool: certain-free definition") {
  // A wall of endpoints at x = 5 and a single far endpoint; free samples near
  // the wall stay free, mid-air dense samples become certain.
  std::vector<Point3> pts;
  for (int i = -20; i <= 20; ++i) {
    for (int j = -20; j <= 20; ++j) pts.emplace_back(5.0, 0.1 * i, 0.1 * j);
  }
  const ScanSequence seq({Scan{0, Point3::Zero(), pts}});
  MapConfig cfg = small_config();
  cfg.r_dense = 3.0;
  const auto pool = build_pool(seq, cfg, 11);
  CHECK_FALSE(pool.certain.empty());
  for (const auto& s : pool.certain) {
    CHECK(s.region == Region::kCertainFree);
    CHECK(s.q.norm() < cfg.r_dense);
    CHECK(brute_nearest(pts, s.q) > cfg.truncation);
  }
  for (const auto& s : pool.free) {
    CHECK(s.region == Region::kFree);
    const bool dense = s.q.norm() < cfg.r_dense;
    CHECK((!dense || brute_nearest(pts, s.q) <= cfg.truncation));
  }
}

TEST_CASE("build_pool: free sample near the same-frame wall stays free") {
  // One scan whose endpoints lie 0.3 m from a probe position, one mid-air.
  const Point3 origin(0, 0, 0);
  std::vector<Point3> near_pts = {Point3(1.3, 0, 0), Point3(8, 0, 0)};
  const ScanSequence seq({Scan{0, origin, near_pts}});
  const Scan& scan = seq.scan(0);
  CHECK(nearest_in_scan(scan, Point3(1.0, 0, 0)) == doctest::Approx(0.3));
  CHECK(nearest_in_scan(scan, Point3(4.0, 0, 0)) == doctest::Approx(2.7));
}

TEST_CASE("nearest_in_scan examples and brute-force oracle") {
  const ScanSequence single({Scan{0, Point3::Zero(), {Point3(0, 0, 0)}}});
  CHECK(nearest_in_scan(single.scan(0), Point3(3, 4, 0)) == 5.0);
  CHECK(nearest_in_scan(single.scan(0), Point3(0, 0, 0)) == 0.0);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Point3> pts;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), 0.2 * u(rng));
    const Point3 p(1.5 * u(rng), 1.5 * u(rng), u(rng));
    const ScanSequence seq({Scan{0, Point3::Zero(), pts}});
    CHECK(nearest_in_scan(seq.scan(0), p) == brute_nearest(pts, p));
  }
}

TEST_CASE("PointIndex equals brute force, including any_within") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<Point3> pts;
  for (int i = 0; i < 500; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  for (double cell : {0.1, 0.5, 2.0}) {
    const PointIndex index(pts, cell);
    for (int trial = 0; trial < 300; ++trial) {
      const Point3 p(2 * u(rng), 2 * u(rng), 2 * u(rng));
      const double d = brute_nearest(pts, p);
      const auto hit = index.nearest(p);
      REQUIRE(hit.has_value());
      CHECK(hit->distance == d);
      CHECK((pts[hit->index] - p).norm() == d);
      CHECK(index.any_within(p, d));
      CHECK_FALSE(index.any_within(p, d * (1 - 1e-9)));
    }
  }
  const PointIndex empty(std::vector<Point3>{}, 1.0);
  CHECK_FALSE(empty.nearest(Point3::Zero()).has_value());
}

TEST_CASE("build_pool: invariants and determinism") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-6, 6);
  std::vector<Scan> scans;
  for (int t = 0; t < 3; ++t) {
    std::vector<Point3> pts;
    for (int i = 0; i < 100; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    pts.emplace_back(0.2, 0.0, 0.0);  // shorter than tau, skipped
    scans.push_back({t, Point3(0.1 * t, 0, 0), pts});
  }
  const ScanSequence seq(scans);
  const MapConfig cfg = small_config();
  const auto a = build_pool(seq, cfg, 99, 1);
  const auto b = build_pool(seq, cfg, 99, 3);
  CHECK(a.skipped_rays >= 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.at(i).q == b.at(i).q);
    CHECK(a.at(i).d_surf == b.at(i).d_surf);
    CHECK(a.at(i).t == b.at(i).t);
    CHECK(a.at(i).region == b.at(i).region);
  }
  for (const auto& s : a.surface) CHECK(std::abs(s.d_surf) <= cfg.truncation);
  for (const auto* list : {&a.free, &a.certain}) {
    for (const auto& s : *list) {
      CHECK(s.d_surf >= cfg.truncation - 1e-12);
      const Point3& o = seq.scan(s.t).origin;
      CHECK((s.q - o).norm() > 0.0);
    }
  }
  const auto c = build_pool(seq, cfg, 100, 1);
  CHECK(c.surface.front().q != a.surface.front().q);
}
