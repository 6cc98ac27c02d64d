#include <cmath>
#include <vector>

#include "doctest.h"
#include "nodal_lab/asymptotics.hpp"
#include "support.hpp"

using namespace nodal;

namespace {

const double kA = std::sqrt(2.0 / (kTwoPi * kTwoPi));

double own_legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  return n == 0 ? p0 : p1;
}

// Total length of the latitude circles where P_N(cos theta) = 0.
double zonal_nodal_length(int n) {
  double total = 0.0;
  const int m = 20000;
  for (int i = 0; i < m; ++i) {
    double a = -1.0 + 2.0 * i / m, b = -1.0 + 2.0 * (i + 1) / m;
    double fa = own_legendre(n, a), fb = own_legendre(n, b);
    if (fa * fb > 0.0) continue;
    for (int it = 0; it < 80; ++it) {
      const double c = 0.5 * (a + b), fc = own_legendre(n, c);
      if (fa * fc <= 0.0) {
        b = c;
      } else {
        a = c;
        fa = fc;
      }
    }
    total += kTwoPi * std::sqrt(1.0 - a * a);
  }
  return total;
}

ScanConfig small_scan(int res) {
  ScanConfig c;
  c.resolution = res;
  c.extraction.resolution = res;
  return c;
}

void check_record_invariants(const NormRecord& r, const Manifold& m) {
  CAPTURE(r.mode);
  const double vol_half = std::sqrt(m.volume());
  CHECK(std::abs(r.l2 - 1.0) < 1e-8);
  CHECK(r.l1 <= vol_half * (1 + 1e-10));
  CHECK(r.sup * vol_half >= 1.0 - 1e-8);
  CHECK(r.grad_sup_nodal <= r.grad_sup * (1 + 1e-12));
  CHECK(2 * r.weighted_nodal_integral / (r.lambda * r.lambda * r.l1) == doctest::Approx(1.0).epsilon(5e-3));
}

}  // namespace

TEST_SUITE("asymptotics") {
  TEST_CASE("lp norms") {
    const auto g = build_grid(Manifold::torus(2), 64);
    const auto m = torus_mode(2, {1, 0});
    CHECK(lp_norm(m, 1.0, g) == doctest::Approx(kA * 4 * kTwoPi).epsilon(1e-12));
    CHECK(lp_norm(m, 2.0, g) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lp_norm(m, std::numeric_limits<double>::infinity(), g) == doctest::Approx(kA).epsilon(1e-12));
    // L4 of A sin: (A^4 * 3/8 * (2 pi)^2)^(1/4)
    CHECK(lp_norm(m, 4.0, g) == doctest::Approx(kA * std::pow(0.375 * kTwoPi * kTwoPi, 0.25)).epsilon(1e-10));
    for (const auto& mm : {zonal_harmonic(7), sectoral_harmonic(20)}) {
      const auto s = build_grid(mm.manifold(), 96);
      CHECK(lp_norm(mm, 2.0, s) == doctest::Approx(1.0).epsilon(1e-8));
    }
    CHECK_THROWS_AS(lp_norm(m, 0.5, g), InvalidArgument);
  }

  TEST_CASE("gradient sup") {
    const auto g = build_grid(Manifold::torus(2), 32);
    for (const auto& k : std::vector<std::vector<int>>{{1, 0}, {3, 4}, {2, -5}}) {
      const auto m = torus_mode(2, k, 0.3);
      CHECK(grad_sup(m, g).global == doctest::Approx(kA * m.lambda()).epsilon(1e-10));
    }
    const auto z = zonal_harmonic(1);
    CHECK(grad_sup(z, build_grid(z.manifold(), 32)).global == doctest::Approx(std::sqrt(3.0 / (4 * kPi))).epsilon(1e-8));
    const auto z5 = zonal_harmonic(5);
    ExtractionConfig ec;
    ec.resolution = 64;
    const auto mesh = extract(z5, 0.0, ec);
    const auto gs = grad_sup(z5, build_grid(z5.manifold(), 64), &mesh);
    CHECK(gs.nodal <= gs.global);
    CHECK(gs.nodal > 0.0);
  }

  TEST_CASE("exponent fits on synthetic power laws") {
    std::vector<double> x, y;
    for (int i = 1; i <= 8; ++i) {
      x.push_back(i * 1.5);
      y.push_back(3.0 * x.back() * x.back());
    }
    auto f = fit_exponent(x, y);
    CHECK(std::abs(f.slope - 2.0) < 1e-12);
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.stderr_slope >= 0.0);
    CHECK(f.n_points == 8);
    for (double s : {-0.25, 0.0, 1.25, 1.5}) {
      std::vector<double> yy;
      for (double xi : x) yy.push_back(0.7 * std::pow(xi, s));
      CHECK(std::abs(fit_exponent(x, yy).slope - s) < 1e-10);
    }
    y[2] = 0.0;
    CHECK_THROWS_AS(fit_exponent(x, y), InvalidArgument);
    const std::vector<double> four{1, 2, 3, 4};
    CHECK_THROWS_AS(fit_exponent(four, four), InvalidArgument);
    // noisy data has a positive standard error
    std::vector<double> noisy;
    for (std::size_t i = 0; i < x.size(); ++i) noisy.push_back(x[i] * (1 + 0.05 * ((i % 3) - 1.0)));
    CHECK(fit_exponent(x, noisy).stderr_slope > 0.0);
  }

  TEST_CASE("index ranges and families") {
    const auto r = IndexRange::parse("20:200:20");
    CHECK(r.values().size() == 10);
    CHECK(r.values().back() == 200);
    CHECK(IndexRange::parse(r.to_string()).values() == r.values());
    CHECK(IndexRange::parse("1:64").values().size() == 64);
    for (const char* bad : {"", "5", "a:b", "10:1", "1:10:0", "0:5"})
      CHECK_THROWS_AS(IndexRange::parse(bad), InvalidArgument);
    for (const char* name : {"torus-axis", "torus-diagonal", "zonal", "sectoral", "circle"})
      CHECK(family_name(parse_family(name)) == name);
    CHECK_THROWS_AS(parse_family("gaussian"), InvalidArgument);
    CHECK(family_mode(ScanFamily::TorusDiagonal, 2).lambda() == doctest::Approx(std::sqrt(13.0)));
    CHECK(family_manifold(ScanFamily::Sectoral) == Manifold::sphere());
  }

  TEST_CASE("torus axis scan") {
    const auto table = scan_family(ScanFamily::TorusAxis, IndexRange::parse("1:8"), small_scan(64));
    REQUIRE(table.size() == 8);
    for (const auto& r : table) {
      check_record_invariants(r, Manifold::torus(2));
      CHECK(r.nodal_measure == doctest::Approx(4 * kPi * r.index).epsilon(1e-9));
      CHECK(r.weighted_nodal_integral / (r.lambda * r.lambda) == doctest::Approx(table[0].weighted_nodal_integral).epsilon(1e-9));
    }
    CHECK(fit_exponent(table, "lambda", "nodal_measure").slope == doctest::Approx(1.0).epsilon(1e-9));
    const auto bounds = verify_bounds(table, Manifold::torus(2));
    CHECK(bounds.pass);
    CHECK(bounds.ratios.size() == 4);
    CHECK(record_column(table[2], "lambda") == 3.0);
    CHECK_THROWS_AS(record_column(table[2], "bogus"), InvalidArgument);
  }

  TEST_CASE("zonal scan against latitude-circle oracle") {
    ScanConfig c = small_scan(96);
    c.p_values = {4.0};
    const auto table = scan_family(ScanFamily::Zonal, IndexRange::parse("2:12:2"), c);
    REQUIRE(table.size() == 6);
    for (const auto& r : table) {
      check_record_invariants(r, Manifold::sphere());
      CHECK(r.nodal_measure == doctest::Approx(zonal_nodal_length(r.index)).epsilon(2e-3));
      REQUIRE(r.lp.size() == 1);
      // Hoelder on a finite volume: |f|_2 <= Vol^(1/4) |f|_4
      CHECK(r.l2 <= std::pow(4 * kPi, 0.25) * r.lp[0].value * (1 + 1e-12));
      CHECK_FALSE(r.flagged);
    }
    CHECK(verify_bounds(table, Manifold::sphere()).pass);
  }

  TEST_CASE("sectoral and circle scans keep the invariants") {
    const auto s = scan_family(ScanFamily::Sectoral, IndexRange::parse("4:24:5"), small_scan(64));
    for (const auto& r : s) check_record_invariants(r, Manifold::sphere());
    const auto c = scan_family(ScanFamily::Circle, IndexRange::parse("1:6"), small_scan(64));
    for (const auto& r : c) {
      check_record_invariants(r, Manifold::circle());
      CHECK(r.nodal_measure == 2.0 * r.index);
    }
    CHECK_THROWS_AS(scan_family(ScanFamily::Circle, IndexRange::parse("1:4"), small_scan(64)), InvalidArgument);
  }

  TEST_CASE("scans are deterministic") {
    const auto a = scan_family(ScanFamily::TorusDiagonal, IndexRange::parse("1:5"), small_scan(48));
    const auto b = scan_family(ScanFamily::TorusDiagonal, IndexRange::parse("1:5"), small_scan(48));
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].l1 == b[i].l1);
      CHECK(a[i].nodal_measure == b[i].nodal_measure);
      CHECK(a[i].grad_sup == b[i].grad_sup);
    }
  }

  TEST_CASE("bound report on a degrading table fails") {
    auto table = scan_family(ScanFamily::TorusAxis, IndexRange::parse("1:6"), small_scan(48));
    table.back().l1 *= 0.1;  // collapse below half the reference
    const auto rep = verify_bounds(table, Manifold::torus(2));
    CHECK_FALSE(rep.pass);
    CHECK_THROWS_AS(verify_bounds({}, Manifold::torus(2)), InvalidArgument);
  }
}
