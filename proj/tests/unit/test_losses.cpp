#include <doctest.h>

#include <cmath>
#include <random>

#include "ndf4d/losses.hpp"

using namespace ndf4d;

namespace {
constexpr double kTight = 1e-15;
}

TEST_CASE("l_surf table") {
  CHECK(std::abs(l_surf(-0.1, 0.2) - 0.1) <= kTight);
  CHECK(std::abs(l_surf(0.3, 0.2) - 0.1) <= kTight);
  CHECK(l_surf(0.15, 0.2) == 0.0);
  CHECK(l_surf(0.05, 0.0) == 0.05);
  CHECK(l_surf(-0.05, 0.0) == 0.05);
  // Behind the surface the band is [d_surf, 0].
  CHECK(l_surf(-0.1, -0.2) == 0.0);
  CHECK(std::abs(l_surf(-0.3, -0.2) - 0.1) <= kTight);
  CHECK(l_surf(0.1, -0.2) == 0.1);
}

TEST_CASE("l_eikonal table") {
  CHECK(l_eikonal(Vec3(1, 0, 0)) == 0.0);
  CHECK(l_eikonal(Vec3(0, 0, 0)) == 1.0);
  CHECK(l_eikonal(Vec3(2, 0, 0)) == 1.0);
  CHECK(l_eikonal(Vec3(0, 0.6, 0.8)) == doctest::Approx(0.0));
}

TEST_CASE("l_free table") {
  CHECK(l_free(0.5, 0.5) == 0.0);
  CHECK(l_free(0.0, 0.5) == 0.5);
  CHECK(std::abs(l_free(0.7, 0.5) - 0.2) <= kTight);
}

TEST_CASE("l_certain table") {
  CHECK(l_certain(0.5, 0.5) == 0.0);
  CHECK(l_certain(-0.5, 0.5) == 1.0);
  CHECK(std::abs(l_certain(0.4, 0.5) - 0.1) <= kTight);
}

TEST_CASE("interval form equals the piecewise form on 1e5 random pairs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 100000; ++i) {
    const double pred = u(rng);
    const double d = i % 100 == 0 ? 0.0 : u(rng);
    REQUIRE(std::abs(l_surf(pred, d) - l_surf_interval(pred, d)) <= 1e-12);
  }
}

TEST_CASE("l_surf zero band") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 10000; ++i) {
    const double pred = u(rng), d = u(rng);
    if (d == 0.0) continue;
    const bool in_band = pred * d >= 0.0 && pred * d <= d * d;
    CHECK((l_surf(pred, d) == 0.0) == in_band);
  }
}

TEST_CASE("loss gradients match finite differences away from kinks") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  const double h = 1e-7;
  for (int i = 0; i < 2000; ++i) {
    const double pred = u(rng), d = u(rng), tau = 0.5;
    auto fd = [&](auto f) { return (f(pred + h) - f(pred - h)) / (2 * h); };
    const double g_surf = fd([&](double x) { return l_surf(x, d); });
    if (std::abs(pred) > 1e-4 && std::abs(pred - d) > 1e-4) CHECK(l_surf_grad(pred, d) == doctest::Approx(g_surf));
    if (std::abs(pred - tau) > 1e-4) {
      CHECK(l_free_grad(pred, tau) == doctest::Approx(fd([&](double x) { return l_free(x, tau); })));
      CHECK(l_certain_grad(pred, tau) == doctest::Approx(fd([&](double x) { return l_certain(x, tau); })));
    }
    const Vec3 g(u(rng), u(rng), u(rng));
    const Vec3 a = l_eikonal_grad(g);
    for (int k = 0; k < 3; ++k) {
      Vec3 p = g, m = g;
      p[k] += h;
      m[k] -= h;
      CHECK(a[k] == doctest::Approx((l_eikonal(p) - l_eikonal(m)) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("eps schedule") {
  const EpsSchedule s{0.6, 0.075, 1000, 0.7};
  CHECK(s.at(0) == 0.6);
  CHECK(s.at(700) == doctest::Approx(0.075).epsilon(1e-15));
  CHECK(s.at(999) == doctest::Approx(0.075).epsilon(1e-15));
  CHECK(s.at(350) == doctest::Approx(0.6 * std::sqrt(0.125)));
  CHECK(s.at(350) == doctest::Approx(0.2121).epsilon(1e-4));
  double prev = s.at(0);
  for (int i = 1; i < 1000; ++i) {
    CHECK(s.at(i) <= prev);
    prev = s.at(i);
  }
}
