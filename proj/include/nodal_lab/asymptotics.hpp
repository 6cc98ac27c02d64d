#pragma once

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nodal_lab/identities.hpp"

namespace nodal {

struct LpValue {
  double p = 0.0;
  double value = 0.0;
};

/// Norms and nodal quantities of one scanned eigenfunction.
struct NormRecord {
  std::string mode;
  int index = 0;
  double lambda = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  std::vector<LpValue> lp;
  double sup = 0.0;
  double grad_sup = 0.0;
  /// sup of |grad phi| over the nodal mesh vertices.
  double grad_sup_nodal = 0.0;
  double nodal_measure = 0.0;
  /// int_N |grad phi| dS.
  double weighted_nodal_integral = 0.0;
  int resolution = 0;
  /// Extraction hit an ambiguity fallback or an edge-root fallback.
  bool flagged = false;
};

struct ExponentFit {
  std::string x_column;
  std::string y_column;
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

enum class ScanFamily { TorusAxis, TorusDiagonal, Zonal, Sectoral, Circle };

/// "torus-axis", "torus-diagonal", "zonal", "sectoral", "circle".
ScanFamily parse_family(std::string_view name);
std::string family_name(ScanFamily family);
Manifold family_manifold(ScanFamily family);
/// Mode for one scan index: k=(m,0), k=(m,m+1), zonal N, sectoral N, circle k.
EigenMode family_mode(ScanFamily family, int index);

/// first:last[:step], inclusive; step defaults to 1.
struct IndexRange {
  int first = 1;
  int last = 1;
  int step = 1;
  static IndexRange parse(std::string_view text);
  std::vector<int> values() const;
  std::string to_string() const;
};

struct ScanConfig {
  /// Minimum grid size; each row uses max(resolution, 8 ceil(lambda)), rounded up to even.
  int resolution = 256;
  /// Exponents for the lp column; empty selects {1, 2, 4, 6} plus 2(n+1)/(n-1) when n > 1.
  std::vector<double> p_values;
  ExtractionConfig extraction;
};

/// (int |phi|^p dV)^{1/p} on the grid's manifold at the grid's resolution, with
/// quadrature cells split at the nodal set. p = infinity returns the grid maximum
/// after local refinement.
double lp_norm(const EigenMode& mode, double p, const QuadratureGrid& grid);

struct GradSup {
  double global = 0.0;
  /// Restricted to the vertices of `nodal`; NaN when no mesh was given.
  double nodal = std::numeric_limits<double>::quiet_NaN();
};

/// max |grad phi| over the grid nodes, polished around the best node.
GradSup grad_sup(const EigenMode& mode, const QuadratureGrid& grid,
                 const LevelSetMesh* nodal = nullptr);

std::vector<NormRecord> scan_family(ScanFamily family, const IndexRange& range,
                                    const ScanConfig& config);

/// Column lookup by name: index, lambda, l1, l2, sup, grad_sup, grad_sup_nodal,
/// nodal_measure, weighted_nodal_integral, lp_<p>, and the derived
/// weighted_over_lambda_sq. Throws InvalidArgument for unknown names.
double record_column(const NormRecord& record, std::string_view column);

/// Least squares on (log x, log y).
ExponentFit fit_exponent(const std::vector<NormRecord>& table, std::string_view x_column,
                         std::string_view y_column);
ExponentFit fit_exponent(std::span<const double> x, std::span<const double> y);

struct RatioCheck {
  std::string name;
  std::vector<double> values;
  double min = 0.0;
  double max = 0.0;
  /// Median of the first three rows.
  double reference = 0.0;
  /// Lower bound for "bounded below" ratios, upper bound otherwise.
  double threshold = 0.0;
  bool pass = false;
};

struct BoundReport {
  std::vector<RatioCheck> ratios;
  bool pass = false;
};

/// Normalized ratios per row:
///   l1_ratio       = l1 lambda^{(n-1)/4}           bounded below
///   grad_ratio     = grad_sup lambda^{-(n+1)/2}     bounded above
///   measure_ratio  = measure lambda^{-(7/4 - 3n/4)} bounded below
///   weighted_ratio = int_N |grad phi| lambda^{-2}  in (0, Vol^{1/2}]
/// "Bounded below" means min >= 0.5 reference, "bounded above" max <= 2 reference.
BoundReport verify_bounds(const std::vector<NormRecord>& table, const Manifold& manifold);

}  // namespace nodal
