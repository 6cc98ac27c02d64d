#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nodal_lab/spectra.hpp"

namespace nodal {

enum class AmbiguityPolicy {
  /// Split an ambiguous cell 2x2 (2x2x2 in 3D) recursively, depth <= 4, then
  /// fall back to the bilinear center decider.
  Subdivide,
  /// Resolve saddle cells with the bilinear center value immediately.
  BilinearDecider,
};

struct ExtractionConfig {
  int resolution = 256;
  int newton_steps = 3;
  AmbiguityPolicy ambiguity_policy = AmbiguityPolicy::Subdivide;
  double newton_tol = 1e-12;

  /// Throws InvalidArgument when resolution < 8 or newton_steps < 0.
  void validate() const;
};

/// Discrete level set {phi = c}. Elements are stored unshared: element i owns
/// vertices [i*stride, (i+1)*stride) where stride is 1 (points), 2 (segments)
/// or 3 (triangles).
struct LevelSetMesh {
  Manifold manifold = Manifold::circle();
  double level = 0.0;
  int resolution = 0;
  std::vector<Point> vertices;
  /// Analytic |grad phi| at each vertex.
  std::vector<double> grad_norms;

  std::int64_t ambiguous_cells = 0;
  /// Ambiguous cells resolved by the bilinear decider (or by the standard table in 3D).
  std::int64_t decider_fallbacks = 0;
  /// Vertices whose gradient projection stalled and were placed by edge root finding.
  std::int64_t newton_fallbacks = 0;
  /// Excluded polar cap colatitude on the sphere, 0 elsewhere.
  double pole_cap = 0.0;

  int stride() const { return manifold.dim() == 3 ? 3 : manifold.dim(); }
  /// 0 for points, 1 for segments, 2 for triangles.
  int element_dim() const { return manifold.dim() - 1; }
  std::size_t element_count() const { return vertices.size() / stride(); }
  bool empty() const { return vertices.empty(); }
};

LevelSetMesh extract(const ScalarField& field, double level, const ExtractionConfig& config);

/// Extracts several levels from one sampling pass.
std::vector<LevelSetMesh> extract_levels(const ScalarField& field, std::span<const double> levels,
                                         const ExtractionConfig& config);

/// H^{n-1} of the mesh: point count, polyline length, or triangle area.
/// Values below 1e-12 are reported as 0.
double hausdorff_measure(const LevelSetMesh& mesh);

/// Integral of g over the mesh: sum over points, trapezoid per segment, vertex
/// average times area per triangle. `g` receives (vertex, vertex index).
double surface_integral(const LevelSetMesh& mesh,
                        const std::function<double(const Point&, std::size_t)>& g);
double surface_integral(const LevelSetMesh& mesh, const std::function<double(const Point&)>& g);

/// int_N f |grad phi| dS with the analytic vertex gradient norms.
double weighted_gradient_integral(const LevelSetMesh& mesh, const TestFunction& f);
double weighted_gradient_integral(const LevelSetMesh& mesh, double constant_f);

/// Measure of each element, in element order.
std::vector<double> element_measures(const LevelSetMesh& mesh);

}  // namespace nodal
