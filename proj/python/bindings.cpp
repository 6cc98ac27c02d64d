#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nodal_lab/asymptotics.hpp"

namespace py = pybind11;
using namespace nodal;

namespace {

py::dict metadata_dict(const IdentityReport& r) {
  py::dict d;
  for (const auto& [k, v] : r.metadata) std::visit([&](const auto& x) { d[py::str(k)] = x; }, v);
  return d;
}

}  // namespace

PYBIND11_MODULE(_nodal_lab, m) {
  m.doc() = "Nodal-set identities and eigenfunction asymptotics on model manifolds";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<Manifold>(m, "Manifold")
      .def_static("circle", &Manifold::circle)
      .def_static("torus", &Manifold::torus, py::arg("dim"))
      .def_static("sphere", &Manifold::sphere)
      .def_static("parse", &Manifold::parse)
      .def_property_readonly("dim", &Manifold::dim)
      .def_property_readonly("volume", &Manifold::volume)
      .def_property_readonly("name", &Manifold::name)
      .def("__eq__", &Manifold::operator==)
      .def("__repr__", [](const Manifold& x) { return "<Manifold " + x.name() + ">"; });

  py::class_<QuadratureGrid>(m, "QuadratureGrid")
      .def_readonly("manifold", &QuadratureGrid::manifold)
      .def_readonly("resolution", &QuadratureGrid::resolution)
      .def_readonly("nodes", &QuadratureGrid::nodes)
      .def_readonly("weights", &QuadratureGrid::weights)
      .def("__len__", [](const QuadratureGrid& g) { return g.nodes.size(); });
  m.def("build_grid", &build_grid, py::arg("manifold"), py::arg("resolution"));
  m.def("integrate",
        py::overload_cast<const QuadratureGrid&, std::span<const double>>(&integrate),
        py::arg("grid"), py::arg("samples"));
  m.def("integrate_fn",
        py::overload_cast<const QuadratureGrid&, const std::function<double(const Point&)>&>(
            &integrate),
        py::arg("grid"), py::arg("fn"));
  m.def("segment_length", &segment_length);

  py::class_<Gradient>(m, "Gradient")
      .def_readonly("partials", &Gradient::partials)
      .def_readonly("norm", &Gradient::norm);

  py::class_<ScalarField>(m, "ScalarField");
  py::class_<EigenMode, ScalarField>(m, "EigenMode")
      .def_property_readonly("manifold", &EigenMode::manifold)
      .def_property_readonly("lam", &EigenMode::lambda)
      .def_property_readonly("eigenvalue", &EigenMode::eigenvalue)
      .def_property_readonly("norm_const", &EigenMode::norm_const)
      .def("value", &EigenMode::value)
      .def("gradient", &EigenMode::gradient)
      .def("sup_abs", &EigenMode::sup_abs)
      .def("value_range", &EigenMode::value_range)
      .def("negated", &EigenMode::negated)
      .def("describe", &EigenMode::describe)
      .def("__repr__", [](const EigenMode& x) { return "<EigenMode " + x.describe() + ">"; });
  m.def("torus_mode", &torus_mode, py::arg("dim"), py::arg("k"), py::arg("phase") = 0.0);
  m.def("circle_mode", &circle_mode, py::arg("k"), py::arg("phase") = 0.0);
  m.def("zonal_harmonic", &zonal_harmonic, py::arg("degree"));
  m.def("sectoral_harmonic", &sectoral_harmonic, py::arg("degree"));
  m.def("parse_mode", &parse_mode, py::arg("spec"));

  py::class_<TestFunction>(m, "TestFunction")
      .def_static("constant", &TestFunction::constant)
      .def("value", &TestFunction::value)
      .def("helmholtz", &TestFunction::helmholtz)
      .def_property_readonly("description", &TestFunction::description);
  m.def(
      "mode_function",
      [](const EigenMode& mode, double coefficient) {
        return ModeExpansion(mode.manifold()).add(coefficient, mode).to_function();
      },
      py::arg("mode"), py::arg("coefficient") = 1.0);
  m.def("bump_test_function", &bump_test_function, py::arg("manifold"), py::arg("center"),
        py::arg("radius"));

  py::enum_<AmbiguityPolicy>(m, "AmbiguityPolicy")
      .value("Subdivide", AmbiguityPolicy::Subdivide)
      .value("BilinearDecider", AmbiguityPolicy::BilinearDecider);
  py::class_<ExtractionConfig>(m, "ExtractionConfig")
      .def(py::init([](int resolution, int newton_steps, AmbiguityPolicy policy, double tol) {
             return ExtractionConfig{resolution, newton_steps, policy, tol};
           }),
           py::arg("resolution") = 256, py::arg("newton_steps") = 3,
           py::arg("ambiguity_policy") = AmbiguityPolicy::Subdivide, py::arg("newton_tol") = 1e-12)
      .def_readwrite("resolution", &ExtractionConfig::resolution)
      .def_readwrite("newton_steps", &ExtractionConfig::newton_steps)
      .def_readwrite("ambiguity_policy", &ExtractionConfig::ambiguity_policy)
      .def_readwrite("newton_tol", &ExtractionConfig::newton_tol);

  py::class_<LevelSetMesh>(m, "LevelSetMesh")
      .def_readonly("manifold", &LevelSetMesh::manifold)
      .def_readonly("level", &LevelSetMesh::level)
      .def_readonly("resolution", &LevelSetMesh::resolution)
      .def_readonly("vertices", &LevelSetMesh::vertices)
      .def_readonly("grad_norms", &LevelSetMesh::grad_norms)
      .def_readonly("ambiguous_cells", &LevelSetMesh::ambiguous_cells)
      .def_readonly("decider_fallbacks", &LevelSetMesh::decider_fallbacks)
      .def_readonly("newton_fallbacks", &LevelSetMesh::newton_fallbacks)
      .def_readonly("pole_cap", &LevelSetMesh::pole_cap)
      .def("element_count", &LevelSetMesh::element_count)
      .def("empty", &LevelSetMesh::empty);
  m.def(
      "extract",
      [](const EigenMode& mode, double level, const ExtractionConfig& config) {
        return extract(mode, level, config);
      },
      py::arg("mode"), py::arg("level"), py::arg("config") = ExtractionConfig{});
  m.def("hausdorff_measure", &hausdorff_measure);
  m.def("weighted_gradient_integral",
        py::overload_cast<const LevelSetMesh&, const TestFunction&>(&weighted_gradient_integral));
  m.def("weighted_gradient_integral",
        py::overload_cast<const LevelSetMesh&, double>(&weighted_gradient_integral));

  py::class_<IdentityReport>(m, "IdentityReport")
      .def_readonly("identity_name", &IdentityReport::identity_name)
      .def_readonly("lhs", &IdentityReport::lhs)
      .def_readonly("rhs", &IdentityReport::rhs)
      .def_readonly("abs_residual", &IdentityReport::abs_residual)
      .def_readonly("rel_residual", &IdentityReport::rel_residual)
      .def_readonly("resolution", &IdentityReport::resolution)
      .def_readonly("scale", &IdentityReport::scale)
      .def_property_readonly("metadata", &metadata_dict)
      .def("figure_of_merit", &IdentityReport::figure_of_merit);
  py::class_<ConvergenceReport>(m, "ConvergenceReport")
      .def_readonly("reports", &ConvergenceReport::reports)
      .def_readonly("estimated_order", &ConvergenceReport::estimated_order)
      .def_readonly("saturated", &ConvergenceReport::saturated)
      .def_readonly("monotone", &ConvergenceReport::monotone);

  m.def("check_nodal_identity", &check_nodal_identity);
  m.def("check_weighted_identity", &check_weighted_identity);
  m.def("check_level_identity", &check_level_identity);
  m.def("check_level_corollary", &check_level_corollary);
  m.def("check_coarea", &check_coarea);
  m.def("check_pair_identity", &check_pair_identity);
  m.def("check_multiplicity_orthogonality", &check_multiplicity_orthogonality);
  m.def("check_abs_pair_symmetry", &check_abs_pair_symmetry);
  m.def("check_localized_identity", &check_localized_identity);
  m.def("convergence_study", &convergence_study, py::arg("check"), py::arg("base_resolution"),
        py::arg("n_doublings"));

  py::class_<LpValue>(m, "LpValue").def_readonly("p", &LpValue::p).def_readonly("value", &LpValue::value);
  py::class_<NormRecord>(m, "NormRecord")
      .def_readonly("mode", &NormRecord::mode)
      .def_readonly("index", &NormRecord::index)
      .def_readonly("lam", &NormRecord::lambda)
      .def_readonly("l1", &NormRecord::l1)
      .def_readonly("l2", &NormRecord::l2)
      .def_readonly("lp", &NormRecord::lp)
      .def_readonly("sup", &NormRecord::sup)
      .def_readonly("grad_sup", &NormRecord::grad_sup)
      .def_readonly("grad_sup_nodal", &NormRecord::grad_sup_nodal)
      .def_readonly("nodal_measure", &NormRecord::nodal_measure)
      .def_readonly("weighted_nodal_integral", &NormRecord::weighted_nodal_integral)
      .def_readonly("resolution", &NormRecord::resolution)
      .def_readonly("flagged", &NormRecord::flagged)
      .def("column", &record_column);
  py::class_<ExponentFit>(m, "ExponentFit")
      .def_readonly("x_column", &ExponentFit::x_column)
      .def_readonly("y_column", &ExponentFit::y_column)
      .def_readonly("slope", &ExponentFit::slope)
      .def_readonly("intercept", &ExponentFit::intercept)
      .def_readonly("stderr", &ExponentFit::stderr_slope)
      .def_readonly("r_squared", &ExponentFit::r_squared)
      .def_readonly("n_points", &ExponentFit::n_points);
  py::class_<ScanConfig>(m, "ScanConfig")
      .def(py::init<>())
      .def_readwrite("resolution", &ScanConfig::resolution)
      .def_readwrite("p_values", &ScanConfig::p_values)
      .def_readwrite("extraction", &ScanConfig::extraction);
  m.def(
      "scan_family",
      [](const std::string& family, const std::string& range, const ScanConfig& config) {
        return scan_family(parse_family(family), IndexRange::parse(range), config);
      },
      py::arg("family"), py::arg("range"), py::arg("config") = ScanConfig{});
  m.def(
      "fit_exponent",
      [](const std::vector<NormRecord>& t, const std::string& x, const std::string& y) {
        return fit_exponent(t, x, y);
      },
      py::arg("table"), py::arg("x_column"), py::arg("y_column"));
  m.def("fit_power_law",
        [](const std::vector<double>& x, const std::vector<double>& y) { return fit_exponent(x, y); });

  py::class_<RatioCheck>(m, "RatioCheck")
      .def_readonly("name", &RatioCheck::name)
      .def_readonly("values", &RatioCheck::values)
      .def_readonly("min", &RatioCheck::min)
      .def_readonly("max", &RatioCheck::max)
      .def_readonly("reference", &RatioCheck::reference)
      .def_readonly("threshold", &RatioCheck::threshold)
      .def_readonly("passed", &RatioCheck::pass);
  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("ratios", &BoundReport::ratios)
      .def_readonly("passed", &BoundReport::pass);
  m.def("verify_bounds", &verify_bounds);
}
