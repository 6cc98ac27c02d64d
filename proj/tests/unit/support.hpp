#pragma once

#include <cmath>
#include <random>

#include "nodal_lab/spectra.hpp"

namespace nodal::test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng());
}

// Random chart point; sphere points stay away from the poles.
inline Point random_point(const Manifold& m) {
  Point p{0, 0, 0};
  if (m.kind() == ManifoldKind::Sphere2) {
    p[0] = uniform(0.05, kPi - 0.05);
    p[1] = uniform(0.0, kTwoPi);
  } else {
    for (int a = 0; a < m.dim(); ++a) p[a] = uniform(0.0, kTwoPi);
  }
  return p;
}

// Central-difference metric gradient norm.
template <class F>
double fd_grad_norm(const Manifold& m, const F& f, Point p, double h = 1e-5) {
  double sq = 0.0;
  for (int a = 0; a < m.dim(); ++a) {
    Point q = p, r = p;
    q[a] += h;
    r[a] -= h;
    double d = (f(q) - f(r)) / (2 * h);
    if (m.kind() == ManifoldKind::Sphere2 && a == 1) d /= std::sin(p[0]);
    sq += d * d;
  }
  return std::sqrt(sq);
}

// Five-point flat Laplacian.
template <class F>
double fd_laplacian(int dim, const F& f, Point p, double h = 1e-3) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) {
    Point q1 = p, q2 = p, r1 = p, r2 = p;
    q1[a] += h;
    q2[a] += 2 * h;
    r1[a] -= h;
    r2[a] -= 2 * h;
    s += (-f(q2) + 16 * f(q1) - 30 * f(p) + 16 * f(r1) - f(r2)) / (12 * h * h);
  }
  return s;
}

}  // namespace nodal::test
