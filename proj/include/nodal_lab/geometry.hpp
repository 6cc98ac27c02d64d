#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nodal_lab/common.hpp"

namespace nodal {

enum class ManifoldKind { Circle, FlatTorus, Sphere2 };

/// One of the model manifolds: R/2piZ, R^n/(2piZ)^n for n in {2, 3}, or the unit
/// round 2-sphere in (colatitude, longitude) coordinates.
class Manifold {
 public:
  static Manifold circle();
  static Manifold torus(int dim);
  static Manifold sphere();
  /// Accepts "circle", "torus2", "torus3", "sphere".
  static Manifold parse(std::string_view name);

  ManifoldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// Period of each periodic chart axis (2pi for circle/torus; 0 for the sphere).
  double period() const { return kind_ == ManifoldKind::Sphere2 ? 0.0 : kTwoPi; }
  double volume() const;
  std::string name() const;

  bool operator==(const Manifold&) const = default;

 private:
  Manifold(ManifoldKind kind, int dim) : kind_(kind), dim_(dim) {}
  ManifoldKind kind_;
  int dim_;
};

/// Volume quadrature: uniform trapezoid on circle/torus, Gauss-Legendre in
/// cos(theta) times uniform longitude on the sphere.
struct QuadratureGrid {
  Manifold manifold;
  int resolution = 0;
  std::vector<Point> nodes;
  std::vector<double> weights;
};

QuadratureGrid build_grid(const Manifold& manifold, int resolution);

/// Weighted sum of per-node samples, reduced pairwise.
double integrate(const QuadratureGrid& grid, std::span<const double> samples);
double integrate(const QuadratureGrid& grid, const std::function<double(const Point&)>& fn);

/// Integral of a function that may jump or kink across {split = level}.
///
/// Each chart line along the first axis (x1 on the torus, colatitude on the
/// sphere) is cut at the roots of split - level found between the `resolution`
/// uniform line nodes; every piece gets composite 6-point Gauss-Legendre. The
/// remaining axes use the periodic trapezoid rule. Piecewise-smooth integrands
/// such as g*|phi - c| or g*sgn(phi - c) then converge spectrally instead of at
/// second order. Kinks where a line is tangent to the level set are not resolved.
///
/// The integrand writes `out.size()` components at once so several integrals
/// can share one pass over the nodes.
using VectorIntegrand = std::function<void(const Point&, std::span<double>)>;
std::vector<double> integrate_split(const Manifold& manifold, int resolution,
                                    const VectorIntegrand& integrand, std::size_t n_components,
                                    const std::function<double(const Point&)>& split, double level);
double integrate_split(const Manifold& manifold, int resolution,
                       const std::function<double(const Point&)>& integrand,
                       const std::function<double(const Point&)>& split, double level);

/// One-dimensional version on [a, b] with n uniform intervals.
double integrate_line_split(double a, double b, int n_intervals,
                            const std::function<double(double)>& integrand,
                            const std::function<double(double)>& split, double level);

/// Length of the segment pq: periodic-minimal Euclidean distance on the torus and
/// circle, R^3 chord length on the sphere.
double segment_length(const Manifold& manifold, const Point& p, const Point& q);

/// Area of a triangle on T^3 in the flat chart, edges unwrapped to their shortest
/// periodic representative.
double triangle_area(const Manifold& manifold, const Point& a, const Point& b, const Point& c);

/// Unit-sphere embedding of (colatitude, longitude).
std::array<double, 3> sphere_embed(const Point& p);

/// Periodic-minimal displacement q - p on circle/torus axes.
Point periodic_delta(const Manifold& manifold, const Point& p, const Point& q);

}  // namespace nodal
