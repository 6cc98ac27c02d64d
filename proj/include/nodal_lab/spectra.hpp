#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nodal_lab/geometry.hpp"

namespace nodal {

/// Chart partial derivatives plus the metric norm |grad f|_g.
struct Gradient {
  std::array<double, 3> partials{};
  double norm = 0.0;
};

/// Anything that can be sampled for level-set extraction.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual const Manifold& manifold() const = 0;
  virtual double value(const Point& p) const = 0;
  virtual Gradient gradient(const Point& p) const = 0;

  /// Samples on the tensor grid axes[0] x axes[1] x ... (axis 0 slowest).
  /// The default evaluates pointwise; separable fields override it.
  virtual void sample_tensor(std::span<const std::vector<double>> axes,
                             std::vector<double>& out) const;
};

struct TorusPlaneWave {
  std::vector<int> k;
  double phase = 0.0;
};
struct CircleMode {
  int k = 1;
  double phase = 0.0;
};
struct Zonal {
  int degree = 1;
};
struct Sectoral {
  int degree = 1;
};
using ModeFamily = std::variant<TorusPlaneWave, CircleMode, Zonal, Sectoral>;

/// Value and first derivative of a one-variable profile.
struct ProfileValue {
  double value = 0.0;
  double derivative = 0.0;
};

/// Sphere modes factor as Theta(colatitude) * Phi(longitude).
struct SeparableProfiles {
  std::function<ProfileValue(double)> colatitude;
  std::function<ProfileValue(double)> longitude;
};

/// Legendre P_N(cos theta) and dP_N/dtheta.
ProfileValue legendre(int degree, double theta);
/// P_N(x) alone, by the three-term recurrence.
double legendre_p(int degree, double x);

/// Closed-form Laplace eigenfunction with unit L^2 norm.
class EigenMode final : public ScalarField {
 public:
  const Manifold& manifold() const override { return manifold_; }
  const ModeFamily& family() const { return family_; }

  /// Frequency lambda; the Laplace eigenvalue is lambda^2.
  double lambda() const { return std::sqrt(eigenvalue_); }
  /// lambda^2, exact (integer arithmetic on |k|^2 or N(N+1)).
  double eigenvalue() const { return eigenvalue_; }
  double norm_const() const { return norm_const_; }
  /// +1, or -1 for a negated mode.
  double sign() const { return sign_; }

  double value(const Point& p) const override;
  Gradient gradient(const Point& p) const override;
  void sample_tensor(std::span<const std::vector<double>> axes,
                     std::vector<double>& out) const override;

  /// sup |phi| in closed form.
  double sup_abs() const;
  /// (min phi, max phi); the minimum of an even-degree zonal mode is located
  /// numerically on [-1, 1].
  std::pair<double, double> value_range() const;

  std::optional<SeparableProfiles> separable_profiles() const;

  EigenMode negated() const;
  /// Canonical text form, e.g. "k=2,3", "k=1,0@0.5", "zonal:5", "sectoral:3".
  std::string describe() const;

  friend EigenMode torus_mode(int dim, std::vector<int> k, double phase);
  friend EigenMode circle_mode(int k, double phase);
  friend EigenMode zonal_harmonic(int degree);
  friend EigenMode sectoral_harmonic(int degree);

 private:
  EigenMode(Manifold manifold, ModeFamily family, double eigenvalue, double norm_const)
      : manifold_(manifold), family_(std::move(family)), eigenvalue_(eigenvalue),
        norm_const_(norm_const) {}

  Manifold manifold_;
  ModeFamily family_;
  double eigenvalue_;
  double norm_const_;
  double sign_ = 1.0;
};

/// A sin(<k, x> + phase) on R^n / (2 pi Z)^n, A = (2 / (2 pi)^n)^{1/2}.
EigenMode torus_mode(int dim, std::vector<int> k, double phase = 0.0);
/// pi^{-1/2} sin(k x + phase), k >= 1.
EigenMode circle_mode(int k, double phase = 0.0);
/// ((2N+1)/(4 pi))^{1/2} P_N(cos theta).
EigenMode zonal_harmonic(int degree);
/// b_N sin^N(theta) cos(N phi), 1 <= N <= 500, b_N from a log-Gamma closed form.
EigenMode sectoral_harmonic(int degree);

/// Parses a mode spec ("k=2,3", "k=1,0@0.5", "zonal:5", "sectoral:3", "k=3" for
/// the circle). The manifold follows from the spec.
EigenMode parse_mode(std::string_view spec);

/// C^2 test function f with analytic gradient and Laplacian.
class TestFunction {
 public:
  using ValueFn = std::function<double(const Point&)>;
  using GradientFn = std::function<Gradient(const Point&)>;
  /// (Delta + lambda_sq) f at a point; defaults to laplacian + lambda_sq * value.
  using HelmholtzFn = std::function<double(const Point&, double lambda_sq)>;

  TestFunction(Manifold manifold, ValueFn value, GradientFn gradient, ValueFn laplacian,
               std::string description, HelmholtzFn helmholtz = {});

  static TestFunction constant(const Manifold& manifold, double c);

  const Manifold& manifold() const { return manifold_; }
  const std::string& description() const { return description_; }
  double value(const Point& p) const { return value_(p); }
  Gradient gradient(const Point& p) const { return gradient_(p); }
  double laplacian(const Point& p) const { return laplacian_(p); }
  double helmholtz(const Point& p, double lambda_sq) const;

 private:
  Manifold manifold_;
  ValueFn value_;
  GradientFn gradient_;
  ValueFn laplacian_;
  std::string description_;
  HelmholtzFn helmholtz_;
};

struct ExpansionTerm {
  double coefficient;
  EigenMode mode;
};

/// f = constant + sum_mu c_mu phi_mu on a single manifold.
class ModeExpansion {
 public:
  explicit ModeExpansion(Manifold manifold, double constant = 0.0)
      : manifold_(manifold), constant_(constant) {}

  ModeExpansion& add(double coefficient, const EigenMode& mode);

  const Manifold& manifold() const { return manifold_; }
  double constant() const { return constant_; }
  const std::vector<ExpansionTerm>& terms() const { return terms_; }

  /// f as a test function. Its Helmholtz image is evaluated term by term as
  /// lambda_sq * constant + sum c_mu (lambda_sq - mu^2) phi_mu, so a term with
  /// mu^2 == lambda_sq vanishes identically.
  TestFunction to_function() const;

 private:
  Manifold manifold_;
  double constant_;
  std::vector<ExpansionTerm> terms_;
};

/// f together with the reference eigenvalue lambda_ref^2.
struct HelmholtzImage {
  TestFunction f;
  double lambda_ref_sq;
  double operator()(const Point& p) const { return f.helmholtz(p, lambda_ref_sq); }
};

HelmholtzImage apply_helmholtz(const ModeExpansion& expansion, double lambda_ref_sq);

/// (1 - r^2/R^2)^3 on the ball of periodic radius R around center, 0 outside.
TestFunction bump_test_function(const Manifold& manifold, const Point& center, double radius);

}  // namespace nodal
