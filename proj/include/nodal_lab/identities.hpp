#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nodal_lab/levelset.hpp"

namespace nodal {

using MetaValue = std::variant<std::string, double, long long, bool>;

/// Both sides of one identity at one resolution.
struct IdentityReport {
  std::string identity_name;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_residual = 0.0;
  /// |lhs - rhs| / max(|lhs|, |rhs|, 1e-300).
  double rel_residual = 0.0;
  int resolution = 0;
  /// Problem scale for identities whose exact value is zero; the meaningful
  /// figure is then abs_residual / scale.
  std::optional<double> scale;
  std::map<std::string, MetaValue> metadata;

  /// abs_residual / scale when a scale is set, else rel_residual.
  double figure_of_merit() const;
};

IdentityReport make_report(std::string name, double lhs, double rhs, int resolution);

struct ConvergenceReport {
  std::vector<IdentityReport> reports;
  /// Mean of log2(r_i / r_{i+1}); NaN when saturated or non-monotone.
  double estimated_order = 0.0;
  /// All residuals at the round-off floor.
  bool saturated = false;
  bool monotone = true;
};

/// 2 int_N |grad phi| dS (lhs) against lambda^2 int |phi| dV (rhs).
IdentityReport check_nodal_identity(const EigenMode& mode, const ExtractionConfig& config);

/// int ((Delta + lambda^2) f) |phi| dV (lhs) against 2 int_N f |grad phi| dS (rhs).
IdentityReport check_weighted_identity(const EigenMode& mode, const TestFunction& f,
                                       const ExtractionConfig& config);

/// int ((Delta + lambda^2) f) |phi - c| dV + lambda^2 c int f sgn(phi - c) dV (lhs)
/// against 2 int_{phi = c} f |grad phi| dS (rhs).
IdentityReport check_level_identity(const EigenMode& mode, double c, const TestFunction& f,
                                    const ExtractionConfig& config);

/// lambda^2 int_{phi >= c} phi dV (lhs) against int_{phi = c} |grad phi| dS (rhs).
/// Metadata "bound_ok" records rhs <= lambda^2 Vol^{1/2}.
IdentityReport check_level_corollary(const EigenMode& mode, double c,
                                     const ExtractionConfig& config);

/// Integral over levels c of int_{phi = c} |grad phi| dS (lhs) against lambda^2.
IdentityReport check_coarea(const EigenMode& mode, int n_levels, const ExtractionConfig& config);

/// (lambda_j^2 - lambda_k^2) int phi_k |phi_j| dV (lhs) against
/// 2 int_{N_j} phi_k |grad phi_j| dS (rhs).
IdentityReport check_pair_identity(const EigenMode& mode_j, const EigenMode& mode_k,
                                   const ExtractionConfig& config);

/// int_{N_j} phi_k |grad phi_j| dS against 0 for lambda_j == lambda_k, with scale
/// lambda_j^2 sup|phi_k| H^{n-1}(N_j).
IdentityReport check_multiplicity_orthogonality(const EigenMode& mode_j, const EigenMode& mode_k,
                                                const ExtractionConfig& config);

/// int_{N_j} |phi_k| |grad phi_j| dS against int_{N_k} |phi_j| |grad phi_k| dS.
IdentityReport check_abs_pair_symmetry(const EigenMode& mode_j, const EigenMode& mode_k,
                                       const ExtractionConfig& config);

/// Weighted identity with the polynomial bump around `center` as f (torus only).
IdentityReport check_localized_identity(const EigenMode& mode, const Point& center, double radius,
                                        const ExtractionConfig& config);

/// Runs `check(resolution)` at base, 2 base, ..., 2^n_doublings base.
ConvergenceReport convergence_study(const std::function<IdentityReport(int)>& check,
                                    int base_resolution, int n_doublings);

}  // namespace nodal
