#include "nodal_lab/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nodal {

double IdentityReport::figure_of_merit() const {
  if (scale && *scale > 0.0) return abs_residual / *scale;
  return rel_residual;
}

IdentityReport make_report(std::string name, double lhs, double rhs, int resolution) {
  IdentityReport r;
  r.identity_name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_residual = std::abs(lhs - rhs);
  r.rel_residual = r.abs_residual / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  r.resolution = resolution;
  return r;
}

namespace {

constexpr double kSignDeadband = 1e-14;

void require_same_manifold(const Manifold& a, const Manifold& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": manifold mismatch");
}

void require_equal_eigenvalues(const EigenMode& j, const EigenMode& k, const char* what) {
  require_same_manifold(j.manifold(), k.manifold(), what);
  if (j.eigenvalue() != k.eigenvalue())
    throw InvalidArgument(std::string(what) + ": eigenvalues differ");
}

void describe_mesh(IdentityReport& r, const LevelSetMesh& mesh, const std::string& prefix = "") {
  r.metadata[prefix + "measure"] = hausdorff_measure(mesh);
  r.metadata[prefix + "elements"] = static_cast<long long>(mesh.element_count());
  r.metadata[prefix + "ambiguous_cells"] = static_cast<long long>(mesh.ambiguous_cells);
  r.metadata[prefix + "decider_fallbacks"] = static_cast<long long>(mesh.decider_fallbacks);
  r.metadata[prefix + "newton_fallbacks"] = static_cast<long long>(mesh.newton_fallbacks);
  if (mesh.pole_cap > 0.0) r.metadata[prefix + "pole_cap"] = mesh.pole_cap;
}

struct Sides {
  double volume = 0.0;
  /// int of the absolute volume integrand; the natural size when both sides vanish.
  double volume_abs = 0.0;
  double surface = 0.0;
  LevelSetMesh mesh;
};

// Volume and surface sides of the level identity; every f-weighted identity
// goes through here so that the reductions agree bit for bit.
Sides level_sides(const EigenMode& mode, double c, const TestFunction& f,
                  const ExtractionConfig& config) {
  require_same_manifold(mode.manifold(), f.manifold(), "identity check");
  config.validate();
  const double lambda_sq = mode.eigenvalue();
  Sides s;
  const auto volume = integrate_split(
      mode.manifold(), config.resolution,
      [&](const Point& p, std::span<double> out) {
        const double d = mode.value(p) - c;
        const double first = f.helmholtz(p, lambda_sq) * std::abs(d);
        double v = first;
        double a = std::abs(first);
        if (c != 0.0) {
          const double sgn = std::abs(d) < kSignDeadband ? 0.0 : (d > 0.0 ? 1.0 : -1.0);
          const double second = lambda_sq * c * f.value(p) * sgn;
          v += second;
          a += std::abs(second);
        }
        out[0] = v;
        out[1] = a;
      },
      2, [&](const Point& p) { return mode.value(p); }, c);
  s.volume = volume[0];
  s.volume_abs = volume[1];
  s.mesh = extract(mode, c, config);
  s.surface = 2.0 * weighted_gradient_integral(s.mesh, f);
  return s;
}

IdentityReport weighted_report(std::string name, const EigenMode& mode, double c,
                               const TestFunction& f, const ExtractionConfig& config) {
  const Sides s = level_sides(mode, c, f, config);
  IdentityReport r = make_report(std::move(name), s.volume, s.surface, config.resolution);
  r.metadata["mode"] = mode.describe();
  r.metadata["level"] = c;
  r.metadata["f"] = f.description();
  // Off the range of phi, or when f is orthogonal to |phi - c| in the
  // weighted sense, both sides vanish; judge against the integrand size.
  const bool cancelled = std::max(std::abs(s.volume), std::abs(s.surface)) < 1e-10 * s.volume_abs;
  if (s.mesh.empty() || cancelled) r.scale = s.volume_abs;
  r.metadata["zero_valued"] = s.mesh.empty() || cancelled;
  describe_mesh(r, s.mesh);
  return r;
}

double sup_abs_grad_on(const LevelSetMesh& mesh) {
  double m = 0.0;
  for (double g : mesh.grad_norms) m = std::max(m, g);
  return m;
}

}  // namespace

IdentityReport check_nodal_identity(const EigenMode& mode, const ExtractionConfig& config) {
  const TestFunction one = TestFunction::constant(mode.manifold(), 1.0);
  const Sides s = level_sides(mode, 0.0, one, config);
  IdentityReport r = make_report("nodal", s.surface, s.volume, config.resolution);
  r.metadata["mode"] = mode.describe();
  r.metadata["lambda"] = mode.lambda();
  describe_mesh(r, s.mesh);
  return r;
}

IdentityReport check_weighted_identity(const EigenMode& mode, const TestFunction& f,
                                       const ExtractionConfig& config) {
  return weighted_report("weighted", mode, 0.0, f, config);
}

IdentityReport check_level_identity(const EigenMode& mode, double c, const TestFunction& f,
                                    const ExtractionConfig& config) {
  if (!std::isfinite(c)) throw InvalidArgument("check_level_identity: level must be finite");
  return weighted_report("level", mode, c, f, config);
}

IdentityReport check_level_corollary(const EigenMode& mode, double c,
                                     const ExtractionConfig& config) {
  if (!std::isfinite(c)) throw InvalidArgument("check_level_corollary: level must be finite");
  config.validate();
  const double lambda_sq = mode.eigenvalue();
  const auto above = integrate_split(
      mode.manifold(), config.resolution,
      [&](const Point& p, std::span<double> out) {
        const double v = mode.value(p);
        out[0] = v >= c ? v : 0.0;
        out[1] = v >= c ? std::abs(v) : 0.0;
      },
      2, [&](const Point& p) { return mode.value(p); }, c);
  const LevelSetMesh mesh = extract(mode, c, config);
  const double surface = weighted_gradient_integral(mesh, 1.0);
  IdentityReport r =
      make_report("level_corollary", lambda_sq * above[0], surface, config.resolution);
  if (mesh.empty()) r.scale = lambda_sq * above[1];
  const double bound = lambda_sq * std::sqrt(mode.manifold().volume());
  r.metadata["mode"] = mode.describe();
  r.metadata["level"] = c;
  r.metadata["bound"] = bound;
  r.metadata["bound_ok"] = surface <= bound;
  describe_mesh(r, mesh);
  return r;
}

IdentityReport check_coarea(const EigenMode& mode, int n_levels, const ExtractionConfig& config) {
  if (n_levels < 16) throw InvalidArgument("check_coarea: n_levels must be >= 16");
  config.validate();
  const auto [lo, hi] = mode.value_range();
  const GaussRule rule = gauss_legendre(n_levels);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  std::vector<double> levels(n_levels);
  for (int i = 0; i < n_levels; ++i) levels[i] = mid + half * rule.nodes[i];

  auto inner = [](const LevelSetMesh& mesh) { return weighted_gradient_integral(mesh, 1.0); };
  std::vector<double> values(n_levels);
  {
    const auto meshes = extract_levels(mode, levels, config);
    for (int i = 0; i < n_levels; ++i) values[i] = inner(meshes[i]);
  }
  // The outermost levels sit close to critical values; refine them.
  const std::vector<int> ends{0, 1, n_levels - 2, n_levels - 1};
  ExtractionConfig fine = config;
  fine.resolution = 2 * config.resolution;
  std::vector<double> end_levels;
  for (int i : ends) end_levels.push_back(levels[i]);
  const auto end_meshes = extract_levels(mode, end_levels, fine);
  for (std::size_t e = 0; e < ends.size(); ++e) values[ends[e]] = inner(end_meshes[e]);

  std::vector<double> terms(n_levels);
  for (int i = 0; i < n_levels; ++i) terms[i] = half * rule.weights[i] * values[i];
  const double lhs = pairwise_sum(terms);

  IdentityReport r = make_report("coarea", lhs, mode.eigenvalue(), config.resolution);
  const QuadratureGrid grid = build_grid(mode.manifold(), config.resolution);
  const double energy = integrate(grid, [&](const Point& p) {
    const double g = mode.gradient(p).norm;
    return g * g;
  });
  r.metadata["mode"] = mode.describe();
  r.metadata["n_levels"] = static_cast<long long>(n_levels);
  r.metadata["level_min"] = lo;
  r.metadata["level_max"] = hi;
  r.metadata["energy_quadrature"] = energy;
  return r;
}

IdentityReport check_pair_identity(const EigenMode& mode_j, const EigenMode& mode_k,
                                   const ExtractionConfig& config) {
  require_same_manifold(mode_j.manifold(), mode_k.manifold(), "check_pair_identity");
  const HelmholtzImage image =
      apply_helmholtz(ModeExpansion(mode_k.manifold()).add(1.0, mode_k), mode_j.eigenvalue());
  IdentityReport r = weighted_report("pair", mode_j, 0.0, image.f, config);
  r.metadata["mode_k"] = mode_k.describe();
  return r;
}

IdentityReport check_multiplicity_orthogonality(const EigenMode& mode_j, const EigenMode& mode_k,
                                                const ExtractionConfig& config) {
  require_equal_eigenvalues(mode_j, mode_k, "check_multiplicity_orthogonality");
  config.validate();
  const LevelSetMesh mesh = extract(mode_j, 0.0, config);
  const double lhs = surface_integral(
      mesh, [&](const Point& p, std::size_t i) { return mode_k.value(p) * mesh.grad_norms[i]; });
  IdentityReport r = make_report("multiplicity", lhs, 0.0, config.resolution);
  r.scale = mode_j.eigenvalue() * mode_k.sup_abs() * hausdorff_measure(mesh);
  r.metadata["mode"] = mode_j.describe();
  r.metadata["mode_k"] = mode_k.describe();
  describe_mesh(r, mesh);
  return r;
}

IdentityReport check_abs_pair_symmetry(const EigenMode& mode_j, const EigenMode& mode_k,
                                       const ExtractionConfig& config) {
  require_equal_eigenvalues(mode_j, mode_k, "check_abs_pair_symmetry");
  config.validate();
  auto side = [&](const EigenMode& a, const EigenMode& b, LevelSetMesh& mesh) {
    mesh = extract(a, 0.0, config);
    return surface_integral(mesh, [&](const Point& p, std::size_t i) {
      return std::abs(b.value(p)) * mesh.grad_norms[i];
    });
  };
  LevelSetMesh mesh_j, mesh_k;
  const double lhs = side(mode_j, mode_k, mesh_j);
  const double rhs = side(mode_k, mode_j, mesh_k);
  IdentityReport r = make_report("abs_pair", lhs, rhs, config.resolution);
  r.metadata["mode"] = mode_j.describe();
  r.metadata["mode_k"] = mode_k.describe();
  describe_mesh(r, mesh_j, "j_");
  describe_mesh(r, mesh_k, "k_");
  r.metadata["j_grad_sup_on_mesh"] = sup_abs_grad_on(mesh_j);
  return r;
}

IdentityReport check_localized_identity(const EigenMode& mode, const Point& center, double radius,
                                        const ExtractionConfig& config) {
  if (mode.manifold().kind() != ManifoldKind::FlatTorus)
    throw InvalidArgument("check_localized_identity: flat torus only");
  const TestFunction bump = bump_test_function(mode.manifold(), center, radius);
  IdentityReport r = weighted_report("localized", mode, 0.0, bump, config);
  r.metadata["radius"] = radius;
  return r;
}

ConvergenceReport convergence_study(const std::function<IdentityReport(int)>& check,
                                    int base_resolution, int n_doublings) {
  if (n_doublings < 2) throw InvalidArgument("convergence_study: need at least 2 doublings");
  if (base_resolution < 8) throw InvalidArgument("convergence_study: base resolution must be >= 8");
  ConvergenceReport out;
  for (int i = 0, res = base_resolution; i <= n_doublings; ++i, res *= 2)
    out.reports.push_back(check(res));

  constexpr double kFloor = 1e-12;
  std::vector<double> r;
  for (const auto& rep : out.reports) r.push_back(rep.figure_of_merit());
  out.saturated = std::all_of(r.begin(), r.end(), [](double v) { return v < kFloor; });
  for (std::size_t i = 0; i + 1 < r.size(); ++i)
    if (!(r[i + 1] < r[i])) out.monotone = false;
  if (out.saturated || !out.monotone) {
    out.estimated_order = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) sum += std::log2(r[i] / r[i + 1]);
  out.estimated_order = sum / static_cast<double>(r.size() - 1);
  return out;
}

}  // namespace nodal
