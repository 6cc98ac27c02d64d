#include <cmath>
#include <vector>

#include "doctest.h"
#include "nodal_lab/geometry.hpp"
#include "support.hpp"

using namespace nodal;

TEST_SUITE("geometry") {
  TEST_CASE("uniform grids") {
    const auto t = build_grid(Manifold::torus(2), 8);
    CHECK(t.nodes.size() == 64);
    for (double w : t.weights) CHECK(w == doctest::Approx((kTwoPi / 8) * (kTwoPi / 8)).epsilon(1e-15));

    const auto c = build_grid(Manifold::circle(), 4);
    CHECK(c.nodes.size() == 4);
    for (double w : c.weights) CHECK(w == doctest::Approx(kPi / 2).epsilon(1e-15));

    const auto t3 = build_grid(Manifold::torus(3), 6);
    CHECK(t3.nodes.size() == 216);
  }

  TEST_CASE("sphere grid layout and area") {
    const auto s = build_grid(Manifold::sphere(), 16);
    CHECK(s.nodes.size() == 16 * 32);
    double sum = 0.0;
    for (double w : s.weights) sum += w;
    CHECK(std::abs(sum - 4 * kPi) < 1e-12);
    for (const auto& p : s.nodes) {
      CHECK(p[0] > 0.0);
      CHECK(p[0] < kPi);
    }
  }

  TEST_CASE("weights positive and sum to the volume") {
    for (const auto& m : {Manifold::circle(), Manifold::torus(2), Manifold::torus(3), Manifold::sphere()})
      for (int res : {4, 5, 9, 16}) {
        const auto g = build_grid(m, res);
        double sum = 0.0;
        for (double w : g.weights) {
          CHECK(w > 0.0);
          sum += w;
        }
        CHECK(std::abs(sum - m.volume()) / m.volume() < 1e-12);
        std::vector<double> ones(g.nodes.size(), 1.0);
        CHECK(std::abs(integrate(g, ones) - m.volume()) / m.volume() < 1e-12);
      }
    CHECK(Manifold::circle().volume() == doctest::Approx(kTwoPi));
    CHECK(Manifold::torus(3).volume() == doctest::Approx(std::pow(kTwoPi, 3)));
  }

  TEST_CASE("grid preconditions") {
    CHECK_THROWS_AS(build_grid(Manifold::torus(2), 3), InvalidArgument);
    CHECK_THROWS_AS(Manifold::torus(4), InvalidArgument);
    CHECK_THROWS_AS(Manifold::parse("klein"), InvalidArgument);
    const auto g = build_grid(Manifold::circle(), 8);
    std::vector<double> short_samples(7, 1.0);
    CHECK_THROWS_AS(integrate(g, short_samples), InvalidArgument);
  }

  TEST_CASE("integrate closed forms") {
    const auto g = build_grid(Manifold::torus(2), 64);
    const double v = integrate(g, [](const Point& p) { return std::sin(p[0]) * std::sin(p[0]); });
    CHECK(std::abs(v - 2 * kPi * kPi) < 1e-12 * 2 * kPi * kPi);
    const auto s = build_grid(Manifold::sphere(), 32);
    CHECK(std::abs(integrate(s, [](const Point& p) { return std::cos(p[0]); })) < 1e-12);
    // cos^2 theta integrates to 4 pi / 3
    CHECK(integrate(s, [](const Point& p) { return std::cos(p[0]) * std::cos(p[0]); }) ==
          doctest::Approx(4 * kPi / 3).epsilon(1e-13));
  }

  TEST_CASE("trapezoid exactness on trigonometric polynomials") {
    const int res = 32;
    const auto g = build_grid(Manifold::torus(2), res);
    for (int trial = 0; trial < 20; ++trial) {
      // Random product of modes with total degree < res/2 in each axis.
      const int a = static_cast<int>(test::uniform(0, res / 4));
      const int b = static_cast<int>(test::uniform(0, res / 4));
      const double ph = test::uniform(0, kTwoPi);
      const double ps = test::uniform(0, kTwoPi);
      auto f = [&](const Point& p) { return std::cos(a * p[0] + ph) * std::cos(b * p[1] + ps); };
      // Exact mean: nonzero only for a = b = 0.
      const double exact = (a == 0 && b == 0) ? std::cos(ph) * std::cos(ps) * kTwoPi * kTwoPi : 0.0;
      CHECK(std::abs(integrate(g, f) - exact) < 1e-12 * kTwoPi * kTwoPi);
    }
  }

  TEST_CASE("integrate is linear") {
    const auto g = build_grid(Manifold::sphere(), 24);
    std::vector<double> f1, f2, mix;
    const double a = 1.7, b = -0.4;
    for (const auto& p : g.nodes) {
      f1.push_back(std::cos(3 * p[0]) + std::sin(p[1]));
      f2.push_back(std::exp(std::cos(p[0])));
      mix.push_back(a * f1.back() + b * f2.back());
    }
    const double lin = a * integrate(g, f1) + b * integrate(g, f2);
    CHECK(std::abs(integrate(g, mix) - lin) <= 1e-14 * std::max(1.0, std::abs(lin)) * 10);
  }

  TEST_CASE("segment lengths") {
    const auto t = Manifold::torus(2);
    CHECK(segment_length(t, {0, 0, 0}, {0.1, 0, 0}) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(segment_length(t, {0.1, 0, 0}, {kTwoPi - 0.1, 0, 0}) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(segment_length(Manifold::sphere(), {0, 0, 0}, {kPi / 2, 0, 0}) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(segment_length(Manifold::sphere(), {kPi / 2, 0.1, 0}, {kPi / 2, kTwoPi - 0.1, 0}) ==
          doctest::Approx(2 * std::sin(0.1)).epsilon(1e-12));
  }

  TEST_CASE("split integration resolves kinks") {
    // |sin(x + 0.3)| (2 + cos y) integrates to 4 * 4 pi
    const double v = integrate_split(
        Manifold::torus(2), 40,
        [](const Point& p) { return std::abs(std::sin(p[0] + 0.3)) * (2 + std::cos(p[1])); },
        [](const Point& p) { return std::sin(p[0] + 0.3); }, 0.0);
    CHECK(v == doctest::Approx(16 * kPi).epsilon(1e-12));
    const double w = integrate_line_split(
        0, kTwoPi, 16, [](double x) { return std::abs(std::sin(x)); },
        [](double x) { return std::sin(x); }, 0.0);
    CHECK(w == doctest::Approx(4.0).epsilon(1e-13));
  }

  TEST_CASE("pairwise sum is order-stable") {
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / static_cast<double>(i + 1);
    const double a = pairwise_sum(v);
    CHECK(a == pairwise_sum(v));
    double naive = 0.0;
    for (double x : v) naive += x;
    CHECK(a == doctest::Approx(naive).epsilon(1e-14));
  }
}
