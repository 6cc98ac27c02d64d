#include <cmath>
#include <vector>

#include "doctest.h"
#include "nodal_lab/levelset.hpp"
#include "support.hpp"

using namespace nodal;

namespace {

const double kA = std::sqrt(2.0 / (kTwoPi * kTwoPi));

// Superposition with curved nodal lines and a few saddles.
class Wavy final : public ScalarField {
 public:
  explicit Wavy(double shift = 0.0) : shift_(shift) {}
  const Manifold& manifold() const override { return m_; }
  double value(const Point& p) const override {
    return std::sin(p[0]) + 0.6 * std::sin(2 * p[1] + 0.3) + 0.3 * std::cos(p[0] + p[1]) + shift_;
  }
  Gradient gradient(const Point& p) const override {
    Gradient g;
    const double s = -0.3 * std::sin(p[0] + p[1]);
    g.partials = {std::cos(p[0]) + s, 1.2 * std::cos(2 * p[1] + 0.3) + s, 0.0};
    g.norm = std::hypot(g.partials[0], g.partials[1]);
    return g;
  }

 private:
  Manifold m_ = Manifold::torus(2);
  double shift_;
};

double max_vertex_residual(const ScalarField& f, const LevelSetMesh& mesh) {
  double r = 0.0;
  for (const auto& v : mesh.vertices) r = std::max(r, std::abs(f.value(v) - mesh.level));
  return r;
}

ExtractionConfig cfg(int res) {
  ExtractionConfig c;
  c.resolution = res;
  return c;
}

}  // namespace

TEST_SUITE("levelset") {
  TEST_CASE("grid-aligned torus nodal lines") {
    const auto m = torus_mode(2, {1, 0});
    const auto mesh = extract(m, 0.0, cfg(64));
    CHECK(std::abs(hausdorff_measure(mesh) - 4 * kPi) < 1e-9);
    CHECK(max_vertex_residual(m, mesh) < 1e-10);
    CHECK(surface_integral(mesh, [](const Point&) { return 1.0; }) ==
          doctest::Approx(hausdorff_measure(mesh)).epsilon(1e-14));
    CHECK(surface_integral(mesh, [&](const Point& p) { return m.gradient(p).norm; }) ==
          doctest::Approx(4 * kPi * kA).epsilon(1e-12));
    CHECK(weighted_gradient_integral(mesh, 1.0) == doctest::Approx(4 * kPi * kA).epsilon(1e-12));
  }

  TEST_CASE("oblique torus nodal lines") {
    const auto m = torus_mode(2, {2, 3});
    const auto mesh = extract(m, 0.0, cfg(512));
    // Two closed geodesics along (-3, 2), each sampled by its 1D parametrization.
    double len = 0.0;
    const int n = 4096;
    for (int i = 0; i < n; ++i) {
      const double t0 = kTwoPi * i / n, t1 = kTwoPi * (i + 1) / n;
      len += std::hypot(-3 * (t1 - t0), 2 * (t1 - t0));
    }
    CHECK(hausdorff_measure(mesh) == doctest::Approx(2 * len).epsilon(1e-3));
    CHECK(max_vertex_residual(m, mesh) < 1e-10);
  }

  TEST_CASE("zonal nodal circles") {
    const auto eq = extract(zonal_harmonic(1), 0.0, cfg(128));
    CHECK(hausdorff_measure(eq) == doctest::Approx(kTwoPi).epsilon(1e-3));
    const double c1 = std::sqrt(3.0 / (4 * kPi));
    CHECK(weighted_gradient_integral(eq, 1.0) == doctest::Approx(kTwoPi * c1).epsilon(1e-3));
    CHECK(eq.pole_cap == doctest::Approx(kPi / 128));

    // P4 roots: x^2 = (3 +- 2 sqrt(6/5)) / 7
    double expected = 0.0;
    for (double s : {-1.0, 1.0}) {
      const double x = std::sqrt((3 + s * 2 * std::sqrt(1.2)) / 7);
      expected += 2 * kTwoPi * std::sqrt(1 - x * x);
    }
    const auto m4 = extract(zonal_harmonic(4), 0.0, cfg(256));
    CHECK(hausdorff_measure(m4) == doctest::Approx(expected).epsilon(1e-3));
  }

  TEST_CASE("sectoral meridians minus pole caps") {
    const int n = 3, res = 256;
    const auto mesh = extract(sectoral_harmonic(n), 0.0, cfg(res));
    // 2N half meridians of length pi, each trimmed by the two caps
    const double expected = 2 * n * (kPi - 2 * kPi / res);
    CHECK(hausdorff_measure(mesh) == doctest::Approx(expected).epsilon(2e-2));
    CHECK(hausdorff_measure(mesh) <= 2 * n * kPi);
  }

  TEST_CASE("flat 3-torus planes") {
    const auto x = extract(torus_mode(3, {1, 0, 0}), 0.0, cfg(16));
    CHECK(hausdorff_measure(x) == doctest::Approx(8 * kPi * kPi).epsilon(1e-9));
    const auto d = extract(torus_mode(3, {1, 1, 1}), 0.0, cfg(24));
    CHECK(hausdorff_measure(d) == doctest::Approx(8 * kPi * kPi * std::sqrt(3.0)).epsilon(1e-6));
    CHECK(max_vertex_residual(torus_mode(3, {1, 1, 1}), d) < 1e-10);
    for (double a : element_measures(d)) {
      CHECK(a >= 0.0);
      CHECK(std::isfinite(a));
    }
  }

  TEST_CASE("circle zero counts") {
    CHECK(extract(circle_mode(3), 0.0, cfg(64)).element_count() == 6);
    for (int k = 1; k <= 64; ++k) {
      const auto mesh = extract(circle_mode(k, 0.37), 0.0, cfg(512));
      REQUIRE(mesh.element_count() == static_cast<std::size_t>(2 * k));
      CHECK(hausdorff_measure(mesh) == 2.0 * k);
    }
    // grid-aligned zeros are found once each
    CHECK(extract(circle_mode(4), 0.0, cfg(64)).element_count() == 8);
  }

  TEST_CASE("empty above the sup") {
    for (const auto& m : {torus_mode(2, {2, 1}), circle_mode(3), zonal_harmonic(6), sectoral_harmonic(4)}) {
      const auto mesh = extract(m, 1.1 * m.sup_abs(), cfg(64));
      CHECK(mesh.empty());
      CHECK(hausdorff_measure(mesh) == 0.0);
    }
  }

  TEST_CASE("sign equivariance") {
    for (const auto& m : {torus_mode(2, {2, 3}, 0.4), zonal_harmonic(5), sectoral_harmonic(3)}) {
      for (double c : {0.0, 0.3 * m.sup_abs(), -0.55 * m.sup_abs()}) {
        const double a = hausdorff_measure(extract(m, c, cfg(96)));
        const double b = hausdorff_measure(extract(m.negated(), -c, cfg(96)));
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, a));
      }
    }
  }

  TEST_CASE("vanishing toward the sup") {
    // Single latitude circle of radius sqrt(1 - t^2): strictly shrinking.
    const auto z = zonal_harmonic(1);
    double prev = hausdorff_measure(extract(z, 0.0, cfg(128)));
    for (double t : {0.3, 0.6, 0.9, 0.99}) {
      const double cur = hausdorff_measure(extract(z, t * z.sup_abs(), cfg(128)));
      CHECK(cur < prev);
      CHECK(cur == doctest::Approx(kTwoPi * std::sqrt(1 - t * t)).epsilon(2e-3));
      prev = cur;
    }
    const auto z4 = zonal_harmonic(4);
    CHECK(hausdorff_measure(extract(z4, 0.999 * z4.sup_abs(), cfg(256))) < 0.2);
    // plane waves keep full-length level lines right up to the sup
    const auto w = torus_mode(2, {1, 2});
    CHECK(hausdorff_measure(extract(w, 0.9 * w.sup_abs(), cfg(128))) ==
          doctest::Approx(hausdorff_measure(extract(w, 0.0, cfg(128)))).epsilon(1e-6));
  }

  TEST_CASE("refinement convergence on curved lines") {
    const Wavy f;
    std::vector<double> measure;
    for (int res : {32, 64, 128, 256}) measure.push_back(hausdorff_measure(extract(f, 0.0, cfg(res))));
    for (std::size_t i = 0; i + 2 < measure.size(); ++i) {
      const double e0 = std::abs(measure[i] - measure[i + 1]);
      const double e1 = std::abs(measure[i + 1] - measure[i + 2]);
      CHECK(e0 >= 3.0 * e1);
    }
  }

  TEST_CASE("newton projection does not increase the residual") {
    // Same start, one extra step, which is accepted only if it helps. Vertices
    // that needed the bracketed fallback after two steps are skipped.
    const Wavy f(0.2);
    ExtractionConfig two = cfg(48), three = cfg(48);
    two.newton_steps = 2;
    two.newton_tol = 0.0;
    three.newton_tol = 0.0;
    const auto a = extract(f, 0.1, two);
    const auto b = extract(f, 0.1, three);
    REQUIRE(a.vertices.size() == b.vertices.size());
    std::size_t compared = 0;
    for (std::size_t i = 0; i < a.vertices.size(); ++i) {
      const double ra = std::abs(f.value(a.vertices[i]) - 0.1);
      if (ra > 1e-10 * 1.1) continue;
      ++compared;
      CHECK(std::abs(f.value(b.vertices[i]) - 0.1) <= ra);
    }
    CHECK(compared + 2 * static_cast<std::size_t>(a.newton_fallbacks) >= a.vertices.size());
    CHECK(max_vertex_residual(f, b) < 1e-10 * 1.1);
  }

  TEST_CASE("ambiguity policies agree on generic fields") {
    const Wavy f;
    ExtractionConfig dec = cfg(64);
    dec.ambiguity_policy = AmbiguityPolicy::BilinearDecider;
    const auto a = extract(f, 0.05, cfg(64));
    const auto b = extract(f, 0.05, dec);
    CHECK(hausdorff_measure(a) == doctest::Approx(hausdorff_measure(b)).epsilon(1e-2));
    CHECK(a.ambiguous_cells >= 0);
    CHECK(a.decider_fallbacks <= a.ambiguous_cells);
    for (double g : a.grad_norms) CHECK(g >= 0.0);
  }

  TEST_CASE("weighted integrals") {
    const auto m = torus_mode(2, {1, 0});
    const auto mesh = extract(m, 0.0, cfg(128));
    // bump centered between the nodal lines at x = pi/2 never touches them
    const auto away = bump_test_function(m.manifold(), {kPi / 2, 1.0, 0}, 0.5);
    CHECK(weighted_gradient_integral(mesh, away) == 0.0);
    const auto self = ModeExpansion(m.manifold()).add(1.0, m).to_function();
    CHECK(std::abs(weighted_gradient_integral(mesh, self)) < 1e-10);
    const auto z = zonal_harmonic(3);
    const auto zm = extract(z, 0.0, cfg(128));
    CHECK(std::abs(weighted_gradient_integral(zm, ModeExpansion(z.manifold()).add(1.0, z).to_function())) < 1e-10);
  }

  TEST_CASE("multi-level extraction matches single levels") {
    const auto m = zonal_harmonic(3);
    const std::vector<double> levels{-0.2, 0.0, 0.15};
    const auto all = extract_levels(m, levels, cfg(64));
    REQUIRE(all.size() == 3);
    for (std::size_t i = 0; i < levels.size(); ++i)
      CHECK(hausdorff_measure(all[i]) == hausdorff_measure(extract(m, levels[i], cfg(64))));
  }

  TEST_CASE("deterministic under thread counts") {
    const auto m = torus_mode(3, {1, 2, 2}, 0.3);
    const unsigned saved = max_threads();
    set_max_threads(1);
    const auto a = extract(m, 0.01, cfg(20));
    set_max_threads(4);
    const auto b = extract(m, 0.01, cfg(20));
    set_max_threads(saved);
    REQUIRE(a.vertices.size() == b.vertices.size());
    CHECK(a.vertices == b.vertices);
    CHECK(hausdorff_measure(a) == hausdorff_measure(b));
  }

  TEST_CASE("config validation") {
    CHECK_THROWS_AS(extract(torus_mode(2, {1, 0}), 0.0, cfg(7)), InvalidArgument);
    ExtractionConfig neg = cfg(16);
    neg.newton_steps = -1;
    CHECK_THROWS_AS(extract(torus_mode(2, {1, 0}), 0.0, neg), InvalidArgument);
    CHECK_THROWS_AS(extract(torus_mode(2, {1, 0}), std::nan(""), cfg(16)), InvalidArgument);
  }
}
