#include <cmath>
#include <limits>

#include "doctest.h"
#include "nodal_lab/identities.hpp"
#include "support.hpp"

using namespace nodal;

namespace {

const double kA = std::sqrt(2.0 / (kTwoPi * kTwoPi));

ExtractionConfig cfg(int res) {
  ExtractionConfig c;
  c.resolution = res;
  return c;
}

TestFunction of_mode(const EigenMode& m) { return ModeExpansion(m.manifold()).add(1.0, m).to_function(); }

TestFunction combine(double a, const TestFunction& f, double b, const TestFunction& g) {
  return TestFunction(
      f.manifold(), [=](const Point& p) { return a * f.value(p) + b * g.value(p); },
      [=](const Point& p) {
        Gradient r;
        const auto gf = f.gradient(p), gg = g.gradient(p);
        for (int i = 0; i < 3; ++i) r.partials[i] = a * gf.partials[i] + b * gg.partials[i];
        r.norm = std::hypot(r.partials[0], r.partials[1], r.partials[2]);
        return r;
      },
      [=](const Point& p) { return a * f.laplacian(p) + b * g.laplacian(p); }, "combination");
}

}  // namespace

TEST_SUITE("identities") {
  TEST_CASE("report fields") {
    const auto r = make_report("x", 2.0, 1.5, 64);
    CHECK(r.abs_residual == 0.5);
    CHECK(r.rel_residual == 0.25);
    CHECK(make_report("z", 0.0, 0.0, 8).rel_residual == 0.0);
    CHECK(r.figure_of_merit() == r.rel_residual);
  }

  TEST_CASE("nodal identity closed forms") {
    // 2 * (4 pi A) on the surface side, A * 4 * 2 pi on the volume side
    const auto t = check_nodal_identity(torus_mode(2, {1, 0}), cfg(256));
    CHECK(t.lhs == doctest::Approx(4 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(t.rhs == doctest::Approx(4 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(t.lhs / 2 == doctest::Approx(4 * kPi * kA).epsilon(1e-12));
    CHECK(t.rel_residual < 1e-8);
    const auto c = check_nodal_identity(circle_mode(1), cfg(64));
    CHECK(c.lhs == doctest::Approx(4 / std::sqrt(kPi)).epsilon(1e-13));
    CHECK(c.rhs == doctest::Approx(4 / std::sqrt(kPi)).epsilon(1e-12));
    const auto z = check_nodal_identity(zonal_harmonic(1), cfg(256));
    CHECK(z.lhs == doctest::Approx(2 * std::sqrt(3 * kPi)).epsilon(1e-3));
    CHECK(z.rhs == doctest::Approx(2 * std::sqrt(3 * kPi)).epsilon(1e-10));
    CHECK(check_nodal_identity(torus_mode(3, {1, 1, 0}), cfg(24)).rel_residual < 1e-3);
  }

  TEST_CASE("weighted with f = 1 is the nodal identity") {
    for (const auto& m : {torus_mode(2, {2, 3}), zonal_harmonic(4), circle_mode(3)}) {
      const auto n = check_nodal_identity(m, cfg(96));
      const auto w = check_weighted_identity(m, TestFunction::constant(m.manifold(), 1.0), cfg(96));
      // opposite orientations: nodal puts the surface side first
      CHECK(n.lhs == w.rhs);
      CHECK(n.rhs == w.lhs);
      CHECK(n.abs_residual == w.abs_residual);
    }
  }

  TEST_CASE("level identity at c = 0 is the weighted identity") {
    const auto m = torus_mode(2, {1, 2}, 0.3);
    const auto f = of_mode(torus_mode(2, {1, 1}));
    const auto w = check_weighted_identity(m, f, cfg(96));
    const auto l = check_level_identity(m, 0.0, f, cfg(96));
    CHECK(w.lhs == l.lhs);
    CHECK(w.rhs == l.rhs);
  }

  TEST_CASE("level identity closed form and empty levels") {
    const auto m = torus_mode(2, {1, 0});
    const auto r = check_level_identity(m, kA / 2, TestFunction::constant(m.manifold(), 1.0), cfg(256));
    const double oracle = 2 * (kA * std::sqrt(3.0) / 2) * 4 * kPi;
    CHECK(r.lhs == doctest::Approx(oracle).epsilon(1e-3));
    CHECK(r.rhs == doctest::Approx(oracle).epsilon(1e-3));
    for (const auto& mm : {m, zonal_harmonic(3)}) {
      const auto e = check_level_identity(mm, 1.2 * mm.sup_abs(), TestFunction::constant(mm.manifold(), 1.0), cfg(64));
      CHECK(std::abs(e.lhs) < 1e-6);
      CHECK(std::abs(e.rhs) < 1e-6);
      REQUIRE(e.scale.has_value());
      CHECK(e.figure_of_merit() < 1e-8);
    }
  }

  TEST_CASE("level corollary") {
    const auto m = torus_mode(2, {1, 0});
    const auto r = check_level_corollary(m, kA / 2, cfg(256));
    CHECK(r.lhs == doctest::Approx(2 * kPi * kA * std::sqrt(3.0)).epsilon(1e-3));
    CHECK(r.rhs == doctest::Approx(2 * kPi * kA * std::sqrt(3.0)).epsilon(1e-3));
    CHECK(std::get<bool>(r.metadata.at("bound_ok")));
    // c = 0: half of lambda^2 times the L1 norm, which is A * 4 * 2 pi
    const auto z = check_level_corollary(m, 0.0, cfg(128));
    CHECK(z.lhs == doctest::Approx(0.5 * kA * 8 * kPi).epsilon(1e-10));
    const auto below = check_level_corollary(zonal_harmonic(2), -1.5 * zonal_harmonic(2).sup_abs(), cfg(64));
    CHECK(std::abs(below.lhs) < 1e-10);
    CHECK(below.rhs == 0.0);
  }

  TEST_CASE("coarea recovers the eigenvalue") {
    const auto t = check_coarea(torus_mode(2, {1, 0}), 32, cfg(256));
    CHECK(t.rhs == 1.0);
    CHECK(t.lhs == doctest::Approx(1.0).epsilon(1e-2));
    const auto c = check_coarea(circle_mode(2), 64, cfg(512));
    CHECK(c.lhs == doctest::Approx(4.0).epsilon(1e-2));
    CHECK_THROWS_AS(check_coarea(circle_mode(2), 8, cfg(64)), InvalidArgument);
  }

  TEST_CASE("pair identity") {
    const auto c = check_pair_identity(circle_mode(1), circle_mode(2), cfg(128));
    CHECK(std::abs(c.lhs) < 1e-12);
    CHECK(std::abs(c.rhs) < 1e-12);
    const auto t = check_pair_identity(torus_mode(2, {1, 0}), torus_mode(2, {0, 1}), cfg(128));
    CHECK(std::abs(t.lhs) < 1e-10);
    CHECK(std::abs(t.rhs) < 1e-10);
    CHECK(check_pair_identity(zonal_harmonic(1), zonal_harmonic(2), cfg(256)).rel_residual < 1e-3);
    CHECK_THROWS_AS(check_pair_identity(zonal_harmonic(1), circle_mode(1), cfg(64)), InvalidArgument);
  }

  TEST_CASE("multiplicity orthogonality") {
    for (int k : {1, 3, 6}) {
      const auto r = check_multiplicity_orthogonality(circle_mode(k), circle_mode(k, kPi / 2), cfg(128));
      REQUIRE(r.scale.has_value());
      CHECK(r.abs_residual < 1e-3 * *r.scale);
    }
    const auto s = check_multiplicity_orthogonality(zonal_harmonic(2), sectoral_harmonic(2), cfg(128));
    CHECK(s.abs_residual < 1e-3 * *s.scale);
    CHECK_THROWS_AS(check_multiplicity_orthogonality(circle_mode(1), circle_mode(2), cfg(64)), InvalidArgument);
  }

  TEST_CASE("abs pair symmetry") {
    for (int k : {1, 2, 5}) {
      const auto r = check_abs_pair_symmetry(circle_mode(k), circle_mode(k, kPi / 2), cfg(64));
      CHECK(r.lhs == doctest::Approx(2.0 * k * k / kPi).epsilon(1e-12));
      CHECK(r.rhs == doctest::Approx(2.0 * k * k / kPi).epsilon(1e-12));
    }
    const auto same = check_abs_pair_symmetry(torus_mode(2, {2, 1}), torus_mode(2, {2, 1}), cfg(64));
    CHECK(std::abs(same.lhs) < 1e-12);
    CHECK(std::abs(same.rhs) < 1e-12);
    CHECK_THROWS_AS(check_abs_pair_symmetry(circle_mode(1), circle_mode(2), cfg(64)), InvalidArgument);
  }

  TEST_CASE("localized identity") {
    const auto m = torus_mode(2, {1, 0});
    // bump sees no nodal line: surface side vanishes, volume side is quadrature error
    const auto away = check_localized_identity(m, {kPi / 2, 1.0, 0}, 0.5, cfg(128));
    const auto finer = check_localized_identity(m, {kPi / 2, 1.0, 0}, 0.5, cfg(512));
    CHECK(away.rhs == 0.0);
    CHECK(std::abs(away.lhs) < 5e-3);
    CHECK(std::abs(finer.lhs) < 0.1 * std::abs(away.lhs));
    const auto on = check_localized_identity(m, {0.0, 1.0, 0}, kPi / 4, cfg(256));
    CHECK(on.rel_residual < 1e-3);
    CHECK_THROWS_AS(check_localized_identity(zonal_harmonic(2), {1, 1, 0}, 0.5, cfg(64)), InvalidArgument);
  }

  TEST_CASE("sign equivariance of reports") {
    const auto m = torus_mode(2, {2, 3}, 0.2);
    const auto f = of_mode(torus_mode(2, {1, 1}));
    const auto a = check_weighted_identity(m, f, cfg(96));
    const auto b = check_weighted_identity(m.negated(), f, cfg(96));
    CHECK(a.lhs == doctest::Approx(b.lhs).epsilon(1e-12));
    CHECK(a.rhs == doctest::Approx(b.rhs).epsilon(1e-12));
    const auto p = check_pair_identity(zonal_harmonic(1), zonal_harmonic(3), cfg(96));
    const auto q = check_pair_identity(zonal_harmonic(1).negated(), zonal_harmonic(3), cfg(96));
    CHECK(p.lhs == doctest::Approx(q.lhs).epsilon(1e-12));
    CHECK(p.rhs == doctest::Approx(q.rhs).epsilon(1e-12));
  }

  TEST_CASE("linearity in f") {
    const auto m = torus_mode(2, {2, 3}, 0.4);
    const auto f1 = of_mode(torus_mode(2, {1, 1}));
    const auto f2 = bump_test_function(m.manifold(), {1.0, 2.0, 0}, 1.2);
    const double a = 0.7, b = -1.6;
    const auto r1 = check_weighted_identity(m, f1, cfg(128));
    const auto r2 = check_weighted_identity(m, f2, cfg(128));
    const auto r = check_weighted_identity(m, combine(a, f1, b, f2), cfg(128));
    CHECK(r.abs_residual <= std::abs(a) * r1.abs_residual + std::abs(b) * r2.abs_residual + 1e-12);
    CHECK(r.lhs == doctest::Approx(a * r1.lhs + b * r2.lhs).epsilon(1e-12));
  }

  TEST_CASE("convergence study bookkeeping") {
    // residual c * h^2 up to a 1e-6 relative perturbation
    const auto synthetic = convergence_study(
        [](int res) { return make_report("synthetic", 1.0 + 1e-6 * 256.0 / (double(res) * res), 1.0, res); }, 16, 3);
    REQUIRE(synthetic.reports.size() == 4);
    for (std::size_t i = 1; i < synthetic.reports.size(); ++i)
      CHECK(synthetic.reports[i].resolution == 2 * synthetic.reports[i - 1].resolution);
    CHECK(synthetic.estimated_order == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(synthetic.monotone);
    CHECK_FALSE(synthetic.saturated);

    const auto exact = convergence_study(
        [](int res) { return check_nodal_identity(torus_mode(2, {1, 0}), cfg(res)); }, 32, 2);
    CHECK(exact.saturated);
    CHECK(std::isnan(exact.estimated_order));

    const auto bumpy = convergence_study(
        [](int res) { return make_report("noisy", 1.0 + (res == 32 ? 1e-3 : 1e-2), 1.0, res); }, 16, 2);
    CHECK_FALSE(bumpy.monotone);
    CHECK(std::isnan(bumpy.estimated_order));
    CHECK_THROWS_AS(convergence_study([](int r) { return make_report("x", 1, 1, r); }, 16, 1), InvalidArgument);
  }
}
