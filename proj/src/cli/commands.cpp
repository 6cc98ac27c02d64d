#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nodal_lab/cli.hpp"

namespace nodal::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

json environment() { return {{"version", kVersion}}; }

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.to_map()) j[k] = v;
  return j;
}

json document(const RunConfig& cfg) {
  return {{"config", config_json(cfg)},
          {"reports", json::array()},
          {"tables", json::array()},
          {"fits", json::array()},
          {"environment", environment()}};
}

json report_json(const IdentityReport& r, double tolerance, bool pass) {
  json meta = json::object();
  for (const auto& [k, v] : r.metadata) std::visit([&](const auto& x) { meta[k] = x; }, v);
  json j = {{"identity_name", r.identity_name}, {"lhs", r.lhs},
            {"rhs", r.rhs},                     {"abs_residual", r.abs_residual},
            {"rel_residual", r.rel_residual},   {"resolution", r.resolution},
            {"metadata", meta},                 {"figure_of_merit", r.figure_of_merit()},
            {"tolerance", tolerance},           {"pass", pass}};
  j["scale"] = r.scale ? json(*r.scale) : json(nullptr);
  return j;
}

json record_json(const NormRecord& r) {
  json lp = json::array();
  for (const auto& v : r.lp) lp.push_back({{"p", v.p}, {"value", v.value}});
  return {{"mode", r.mode},
          {"index", r.index},
          {"lambda", r.lambda},
          {"l1", r.l1},
          {"l2", r.l2},
          {"lp", lp},
          {"sup", r.sup},
          {"grad_sup", r.grad_sup},
          {"grad_sup_nodal", r.grad_sup_nodal},
          {"nodal_measure", r.nodal_measure},
          {"weighted_nodal_integral", r.weighted_nodal_integral},
          {"resolution", r.resolution},
          {"flagged", r.flagged}};
}

json mesh_json(const LevelSetMesh& mesh) {
  json verts = json::array();
  const int dim = mesh.manifold.dim();
  for (const auto& v : mesh.vertices) {
    json p = json::array();
    for (int a = 0; a < dim; ++a) p.push_back(v[a]);
    verts.push_back(p);
  }
  return {{"manifold", mesh.manifold.name()},
          {"level", mesh.level},
          {"dim", dim},
          {"element_dim", mesh.element_dim()},
          {"stride", mesh.stride()},
          {"resolution", mesh.resolution},
          {"vertices", verts},
          {"grad_norms", mesh.grad_norms}};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw NumericalError("cannot write " + path.string());
  f << text;
  if (!f) throw NumericalError("write failed for " + path.string());
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidArgument("cannot create output directory '" + dir + "': " + ec.message());
}

bool wants(const RunConfig& cfg, const char* format) {
  return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

ExtractionConfig extraction_config(const RunConfig& cfg) {
  ExtractionConfig ec;
  ec.resolution = cfg.resolution;
  ec.newton_steps = cfg.newton_steps;
  ec.newton_tol = cfg.newton_tol;
  ec.ambiguity_policy =
      cfg.ambiguity == "subdivide" ? AmbiguityPolicy::Subdivide : AmbiguityPolicy::BilinearDecider;
  return ec;
}

std::string stem(const RunConfig& cfg, const std::string& fallback) {
  return cfg.name.empty() ? fallback : cfg.name;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ExtractionConfig ec = extraction_config(cfg);
  json doc = document(cfg);
  int failures = 0;
  auto record = [&](const std::string& id, const IdentityReport& r, bool extra_ok = true) {
    const double tol = cfg.tolerances.at(id);
    const double merit = r.figure_of_merit();
    const bool pass = extra_ok && std::isfinite(merit) && merit < tol;
    doc["reports"].push_back(report_json(r, tol, pass));
    std::string mode;
    if (const auto it = r.metadata.find("mode"); it != r.metadata.end())
      mode = std::get<std::string>(it->second);
    char line[256];
    std::snprintf(line, sizeof line, "%s %s %s lhs=%.12g rhs=%.12g residual=%.3g tol=%.3g",
                  pass ? "PASS" : "FAIL", id.c_str(), mode.c_str(), r.lhs, r.rhs, merit, tol);
    out << line << "\n";
    if (!pass) {
      ++failures;
      err << "failed: " << line << (extra_ok ? "" : " (bound violated)") << "\n";
    }
  };

  for (const auto& id : cfg.identities) {
    if (id == "pair" || id == "curious" || id == "abs_pair") {
      const EigenMode j = parse_mode(cfg.mode_j);
      const EigenMode k = parse_mode(cfg.mode_k);
      if (id == "pair") record(id, check_pair_identity(j, k, ec));
      if (id == "curious") record(id, check_multiplicity_orthogonality(j, k, ec));
      if (id == "abs_pair") record(id, check_abs_pair_symmetry(j, k, ec));
      continue;
    }
    const EigenMode mode = parse_mode(cfg.mode);
    const Manifold& m = mode.manifold();
    if (id == "nodal") {
      record(id, check_nodal_identity(mode, ec));
    } else if (id == "weighted") {
      record(id, check_weighted_identity(mode, parse_test_function(cfg.f, m), ec));
    } else if (id == "level") {
      const TestFunction f = parse_test_function(cfg.f, m);
      for (double c : cfg.levels) record(id, check_level_identity(mode, c, f, ec));
    } else if (id == "corollary") {
      for (double c : cfg.levels) {
        const IdentityReport r = check_level_corollary(mode, c, ec);
        record(id, r, std::get<bool>(r.metadata.at("bound_ok")));
      }
    } else if (id == "coarea") {
      record(id, check_coarea(mode, cfg.n_levels, ec));
    } else if (id == "localized") {
      if (static_cast<int>(cfg.center.size()) > m.dim())
        throw InvalidArgument("center has more coordinates than the manifold dimension");
      Point c{};
      std::copy(cfg.center.begin(), cfg.center.end(), c.begin());
      record(id, check_localized_identity(mode, c, cfg.radius, ec));
    }
  }

  ensure_dir(cfg.out);
  if (wants(cfg, "json"))
    write_file(fs::path(cfg.out) / (stem(cfg, "verify") + ".json"), doc.dump(2) + "\n");
  return failures == 0 ? 0 : 1;
}

int cmd_scan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ScanFamily fam = parse_family(cfg.family);
  ScanConfig sc;
  sc.resolution = cfg.resolution;
  sc.p_values = cfg.p_values;
  sc.extraction = extraction_config(cfg);
  const auto table = scan_family(fam, IndexRange::parse(cfg.range), sc);

  json doc = document(cfg);
  json rows = json::array();
  for (const auto& r : table) rows.push_back(record_json(r));
  doc["tables"].push_back({{"family", cfg.family}, {"manifold", cfg.manifold}, {"rows", rows}});

  int failures = 0;
  for (const auto& spec : cfg.fits) {
    const ExponentFit fit = fit_exponent(table, spec.x, spec.y);
    json j = {{"family", cfg.family},      {"x_column", fit.x_column},
              {"y_column", fit.y_column},  {"slope", fit.slope},
              {"intercept", fit.intercept}, {"stderr", fit.stderr_slope},
              {"r_squared", fit.r_squared}, {"n_points", fit.n_points}};
    bool pass = true;
    if (spec.has_band) {
      pass = std::abs(fit.slope - spec.band.target) <= spec.band.tolerance;
      j["band"] = {{"target", spec.band.target}, {"tolerance", spec.band.tolerance}};
    }
    j["pass"] = pass;
    doc["fits"].push_back(j);
    char line[256];
    std::snprintf(line, sizeof line, "%s fit %s:%s slope=%.4f stderr=%.2g", pass ? "PASS" : "FAIL",
                  spec.y.c_str(), spec.x.c_str(), fit.slope, fit.stderr_slope);
    out << line;
    if (spec.has_band) out << " band=" << spec.band.target << "+-" << spec.band.tolerance;
    out << "\n";
    if (!pass) {
      ++failures;
      err << "failed: " << line << "\n";
    }
  }

  const BoundReport bounds = verify_bounds(table, family_manifold(fam));
  json b = json::array();
  for (const auto& c : bounds.ratios) {
    b.push_back({{"name", c.name}, {"min", c.min}, {"max", c.max}, {"reference", c.reference},
                 {"threshold", c.threshold}, {"pass", c.pass}, {"values", c.values}});
    out << (c.pass ? "PASS" : "FAIL") << " bound " << c.name << " min=" << c.min
        << " max=" << c.max << "\n";
  }
  doc["bounds"] = {{"pass", bounds.pass}, {"ratios", b}};

  ensure_dir(cfg.out);
  const std::string base = stem(cfg, "scan_" + cfg.family);
  if (wants(cfg, "csv")) write_file(fs::path(cfg.out) / (base + ".csv"), table_csv(table));
  if (wants(cfg, "json")) write_file(fs::path(cfg.out) / (base + ".json"), doc.dump(2) + "\n");
  return failures == 0 ? 0 : 1;
}

int cmd_extract(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const EigenMode mode = parse_mode(cfg.mode);
  const auto meshes = extract_levels(mode, cfg.levels, extraction_config(cfg));
  json doc = document(cfg);
  json info = json::array();
  ensure_dir(cfg.out);
  const std::string base = stem(cfg, "extract");
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const LevelSetMesh& mesh = meshes[i];
    const std::string file = base + "_" + std::to_string(i);
    json entry = {{"level", mesh.level},
                  {"measure", hausdorff_measure(mesh)},
                  {"vertex_count", mesh.vertices.size()},
                  {"element_count", mesh.element_count()},
                  {"ambiguous_cells", mesh.ambiguous_cells},
                  {"decider_fallbacks", mesh.decider_fallbacks},
                  {"newton_fallbacks", mesh.newton_fallbacks},
                  {"pole_cap", mesh.pole_cap}};
    if (wants(cfg, "mesh")) {
      write_file(fs::path(cfg.out) / (file + ".txt"), mesh_text(mesh));
      write_file(fs::path(cfg.out) / (file + ".mesh.json"), mesh_json(mesh).dump() + "\n");
      entry["files"] = {file + ".txt", file + ".mesh.json"};
    }
    info.push_back(entry);
    char line[200];
    std::snprintf(line, sizeof line, "level %.12g measure=%.12g elements=%zu", mesh.level,
                  hausdorff_measure(mesh), mesh.element_count());
    out << line << "\n";
  }
  doc["meshes"] = info;
  if (wants(cfg, "json")) write_file(fs::path(cfg.out) / (base + ".json"), doc.dump(2) + "\n");
  return 0;
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(cfg.in, ec)) {
    for (const auto& e : fs::directory_iterator(cfg.in, ec))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  json merged = document(cfg);
  json sources = json::array();
  json lines = json::array();
  int n_pass = 0;
  int n_fail = 0;
  std::vector<std::pair<json, json>> plots;  // (table, fit)
  for (const auto& path : files) {
    std::ifstream f(path);
    json doc = json::parse(f, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("config") ||
        !doc.contains("environment"))
      continue;
    if (doc["config"].value("command", "") == "report") continue;
    const std::string src = path.filename().string();
    sources.push_back(src);
    for (auto r : doc.value("reports", json::array())) {
      const bool pass = r.value("pass", false);
      (pass ? n_pass : n_fail) += 1;
      const std::string mode = r["metadata"].value("mode", "");
      lines.push_back(std::string(pass ? "PASS " : "FAIL ") + r.value("identity_name", "") + " " +
                      mode + " (" + src + ")");
      r["source"] = src;
      merged["reports"].push_back(r);
    }
    for (auto t : doc.value("tables", json::array())) {
      t["source"] = src;
      merged["tables"].push_back(t);
    }
    for (auto fit : doc.value("fits", json::array())) {
      const bool pass = fit.value("pass", true);
      (pass ? n_pass : n_fail) += 1;
      lines.push_back(std::string(pass ? "PASS " : "FAIL ") + "fit " + fit.value("family", "") +
                      " " + fit.value("y_column", "") + ":" + fit.value("x_column", "") + " (" +
                      src + ")");
      fit["source"] = src;
      merged["fits"].push_back(fit);
      for (const auto& t : doc.value("tables", json::array()))
        if (t.value("family", "") == fit.value("family", "")) plots.emplace_back(t, fit);
    }
  }
  if (sources.empty()) {
    err << "no reports found in '" << cfg.in << "'\n";
    return 2;
  }
  merged["sources"] = sources;
  merged["summary"] = {{"pass", n_pass}, {"fail", n_fail}, {"lines", lines}};

  ensure_dir(cfg.out);
  for (const auto& [table, fit] : plots) {
    const std::string x = fit.value("x_column", "");
    const std::string y = fit.value("y_column", "");
    std::ostringstream os;
    os << "# log(" << x << ") log(" << y << ") family=" << fit.value("family", "") << "\n";
    for (const auto& row : table["rows"]) {
      NormRecord r;
      r.index = row.value("index", 0);
      r.lambda = row.value("lambda", 0.0);
      r.l1 = row.value("l1", 0.0);
      r.l2 = row.value("l2", 0.0);
      r.sup = row.value("sup", 0.0);
      r.grad_sup = row.value("grad_sup", 0.0);
      r.grad_sup_nodal = row["grad_sup_nodal"].is_number() ? row["grad_sup_nodal"].get<double>() : 0.0;
      r.nodal_measure = row.value("nodal_measure", 0.0);
      r.weighted_nodal_integral = row.value("weighted_nodal_integral", 0.0);
      for (const auto& lp : row.value("lp", json::array()))
        r.lp.push_back({lp.value("p", 0.0), lp.value("value", 0.0)});
      const double xv = record_column(r, x);
      const double yv = record_column(r, y);
      if (xv > 0.0 && yv > 0.0) os << format_g17(std::log(xv)) << ' ' << format_g17(std::log(yv)) << "\n";
    }
    write_file(fs::path(cfg.out) /
                   ("plot_" + fit.value("family", "") + "_" + y + "_vs_" + x + ".dat"),
               os.str());
  }
  if (wants(cfg, "json"))
    write_file(fs::path(cfg.out) / (stem(cfg, "report") + ".json"), merged.dump(2) + "\n");
  for (const auto& l : lines) out << l.get<std::string>() << "\n";
  out << n_pass << " passed, " << n_fail << " failed\n";
  return 0;
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "verify") return cmd_verify(cfg, out, err);
    if (cfg.command == "scan") return cmd_scan(cfg, out, err);
    if (cfg.command == "extract") return cmd_extract(cfg, out, err);
    if (cfg.command == "report") return cmd_report(cfg, out, err);
    err << "error: unknown command '" << cfg.command << "'\n";
    return 2;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Laplace eigenfunction nodal-set identities and asymptotics"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  static const std::vector<std::pair<std::string, std::string>> kOptions{
      {"manifold", "circle | torus2 | torus3 | sphere (default: from the mode)"},
      {"mode", "mode spec: k=a[,b[,c]][@phase], zonal:N, sectoral:N; leading '-' negates"},
      {"mode-j", "first mode of a pair"},
      {"mode-k", "second mode of a pair"},
      {"identity", "nodal, weighted, level, corollary, coarea, pair, curious, abs_pair, localized"},
      {"f", "test function: number, mode:<spec> or bump:x,y[,z]:r"},
      {"level", "level value(s) c"},
      {"resolution", "grid resolution"},
      {"n-levels", "Gauss levels for the co-area check"},
      {"newton-steps", "Newton projection steps per vertex"},
      {"newton-tol", "Newton residual tolerance"},
      {"ambiguity", "subdivide | bilinear-decider"},
      {"center", "bump center for the localized identity"},
      {"radius", "bump radius for the localized identity"},
      {"tol", "identity=tolerance override"},
      {"family", "torus-axis, torus-diagonal, zonal, sectoral, circle"},
      {"range", "first:last[:step]"},
      {"fit", "y:x or y:x=target:tolerance"},
      {"p", "L^p exponents"},
      {"out", "output directory"},
      {"in", "input directory for report"},
      {"name", "output file stem"},
      {"formats", "json, csv, mesh"},
  };

  std::map<std::string, std::vector<std::string>> values;
  std::string config_file;
  int threads = -1;
  std::vector<CLI::App*> subs;
  for (const char* name : {"verify", "scan", "extract", "report"}) {
    static const std::map<std::string, std::string> kHelp{
        {"verify", "check identities and write a JSON report"},
        {"scan", "scan a mode family, fit exponents, check bounds"},
        {"extract", "extract level sets and write meshes"},
        {"report", "merge JSON outputs into a summary"}};
    CLI::App* sub = app.add_subcommand(name, kHelp.at(name));
    for (const auto& [key, help] : kOptions)
      sub->add_option("--" + key, values[key], help)->allow_extra_args(false);
    sub->add_option("--config", config_file, "key=value file with the same keys as the flags");
    sub->add_option("--threads", threads, "worker thread cap (0: all cores)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::string command;
  for (auto* s : subs)
    if (s->parsed()) command = s->get_name();

  try {
    if (threads < 0) {
      if (const char* env = std::getenv("NODAL_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*env == '\0' || *end != '\0' || v < 0)
          throw InvalidArgument("NODAL_LAB_THREADS must be a non-negative integer");
        threads = static_cast<int>(v);
      }
    }
    if (threads >= 0) set_max_threads(static_cast<unsigned>(threads));

    std::map<std::string, std::string> kv;
    if (!config_file.empty()) {
      std::ifstream f(config_file);
      if (!f) throw InvalidArgument("cannot read config file '" + config_file + "'");
      std::stringstream ss;
      ss << f.rdbuf();
      kv = parse_key_values(ss.str());
    }
    for (const auto& [key, vals] : values) {
      if (vals.empty()) continue;
      std::string joined;
      for (std::size_t i = 0; i < vals.size(); ++i) joined += (i ? "," : "") + vals[i];
      kv[key] = joined;
    }
    const RunConfig cfg = config_from_map(command, kv);
    return run_command(cfg, out, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace nodal::cli
