#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "nodal_lab/cli.hpp"

namespace nodal::cli {

namespace {

const std::set<std::string> kKnownIdentities{"nodal",   "weighted", "level",    "corollary", "coarea",
                                             "pair",    "curious",  "abs_pair", "localized"};

const std::set<std::string> kKeys{
    "ambiguity", "center", "command", "f",     "family",     "fit",          "formats",
    "identity",  "in",     "level",   "manifold", "mode",    "mode-j",       "mode-k",
    "n-levels",  "name",   "newton-steps", "newton-tol", "out", "p", "radius", "range",
    "resolution", "tol"};

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

template <class T, class F>
std::string join(const std::vector<T>& items, F render) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += ",";
    s += render(items[i]);
  }
  return s;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  if (text.empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, std::string_view text) {
  std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw InvalidArgument("invalid number '" + s + "' for " + key);
  return v;
}

int to_int(const std::string& key, std::string_view text) {
  std::string s = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidArgument("invalid integer '" + s + "' for " + key);
  return v;
}

std::vector<double> to_doubles(const std::string& key, std::string_view text) {
  std::vector<double> v;
  for (const auto& part : split(text, ',')) v.push_back(to_double(key, part));
  return v;
}

bool is_column(const std::string& name) {
  static const std::set<std::string> base{"index",         "lambda",        "l1",
                                          "l2",            "sup",           "grad_sup",
                                          "grad_sup_nodal", "nodal_measure", "weighted_nodal_integral",
                                          "weighted_over_lambda_sq"};
  return base.count(name) > 0 || name.starts_with("lp_");
}

FitSpec parse_fit(std::string_view text) {
  FitSpec f;
  std::string_view pair = text;
  if (const auto eq = text.find('='); eq != std::string_view::npos) {
    pair = text.substr(0, eq);
    const auto band = split(text.substr(eq + 1), ':');
    if (band.size() != 2) throw InvalidArgument("fit band must be y:x=target:tolerance");
    f.has_band = true;
    f.band = {to_double("fit", band[0]), to_double("fit", band[1])};
    if (!(f.band.tolerance > 0.0)) throw InvalidArgument("fit band tolerance must be > 0");
  }
  const auto cols = split(pair, ':');
  if (cols.size() != 2) throw InvalidArgument("fit must be y:x, got '" + std::string(text) + "'");
  f.y = cols[0];
  f.x = cols[1];
  for (const auto* c : {&f.y, &f.x})
    if (!is_column(*c)) throw InvalidArgument("unknown column '" + *c + "' in fit");
  return f;
}

std::string render_fit(const FitSpec& f) {
  std::string s = f.y + ":" + f.x;
  if (f.has_band) s += "=" + shortest(f.band.target) + ":" + shortest(f.band.tolerance);
  return s;
}

bool needs_mode(const std::string& id) {
  return id == "nodal" || id == "weighted" || id == "level" || id == "corollary" ||
         id == "coarea" || id == "localized";
}

std::vector<std::string> default_formats(const std::string& command) {
  if (command == "scan") return {"csv", "json"};
  if (command == "extract") return {"json", "mesh"};
  return {"json"};
}

}  // namespace

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> table{
      {"nodal", 1e-3}, {"weighted", 1e-3}, {"level", 1e-3},    {"corollary", 1e-3},
      {"coarea", 2e-2}, {"pair", 1e-3},    {"curious", 1e-3}, {"abs_pair", 1e-3},
      {"localized", 1e-3}};
  return table;
}

std::vector<FitSpec> default_fits(const std::string& family) {
  auto fit = [](std::string y, double target, double tol) {
    return FitSpec{std::move(y), "lambda", true, {target, tol}};
  };
  if (family == "zonal") return {fit("l1", 0.0, 0.05), fit("grad_sup", 1.5, 0.05)};
  if (family == "sectoral") return {fit("l1", -0.25, 0.03), fit("grad_sup", 1.25, 0.05)};
  if (family == "torus-axis" || family == "torus-diagonal")
    return {fit("nodal_measure", 1.0, 0.05), fit("weighted_over_lambda_sq", 0.0, 0.05)};
  if (family == "circle") return {fit("nodal_measure", 1.0, 0.05)};
  return {};
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> kv;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key=value");
    kv[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
  }
  return kv;
}

RunConfig config_from_map(const std::string& command,
                          const std::map<std::string, std::string>& kv) {
  if (command != "verify" && command != "scan" && command != "extract" && command != "report")
    throw InvalidArgument("unknown command '" + command + "'");
  for (const auto& [k, v] : kv)
    if (!kKeys.count(k)) throw InvalidArgument("unknown config key '" + k + "'");
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (const auto* c = get("command"); c && *c != command)
    throw InvalidArgument("config is for command '" + *c + "', not '" + command + "'");

  RunConfig cfg;
  cfg.command = command;
  if (const auto* v = get("manifold")) cfg.manifold = *v;
  if (const auto* v = get("mode")) cfg.mode = *v;
  if (const auto* v = get("mode-j")) cfg.mode_j = *v;
  if (const auto* v = get("mode-k")) cfg.mode_k = *v;
  if (const auto* v = get("identity")) cfg.identities = split(*v, ',');
  if (const auto* v = get("f")) cfg.f = *v;
  if (const auto* v = get("level")) cfg.levels = to_doubles("level", *v);
  if (const auto* v = get("resolution")) cfg.resolution = to_int("resolution", *v);
  if (const auto* v = get("n-levels")) cfg.n_levels = to_int("n-levels", *v);
  if (const auto* v = get("newton-steps")) cfg.newton_steps = to_int("newton-steps", *v);
  if (const auto* v = get("newton-tol")) cfg.newton_tol = to_double("newton-tol", *v);
  if (const auto* v = get("ambiguity")) cfg.ambiguity = *v;
  if (const auto* v = get("center")) cfg.center = to_doubles("center", *v);
  if (const auto* v = get("radius")) cfg.radius = to_double("radius", *v);
  if (const auto* v = get("family")) cfg.family = *v;
  if (const auto* v = get("range")) cfg.range = *v;
  if (const auto* v = get("fit"))
    for (const auto& f : split(*v, ',')) cfg.fits.push_back(parse_fit(f));
  if (const auto* v = get("p")) cfg.p_values = to_doubles("p", *v);
  if (const auto* v = get("out")) cfg.out = *v;
  if (const auto* v = get("in")) cfg.in = *v;
  if (const auto* v = get("name")) cfg.name = *v;
  if (const auto* v = get("formats")) cfg.formats = split(*v, ',');

  cfg.tolerances = default_tolerances();
  if (const auto* v = get("tol")) {
    for (const auto& item : split(*v, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw InvalidArgument("tol entries must be identity=value");
      const std::string id = item.substr(0, eq);
      if (!kKnownIdentities.count(id)) throw InvalidArgument("unknown identity '" + id + "' in tol");
      const double t = to_double("tol", std::string_view(item).substr(eq + 1));
      if (!(t > 0.0)) throw InvalidArgument("tolerances must be > 0");
      cfg.tolerances[id] = t;
    }
  }

  // Validation and derived defaults.
  if (cfg.resolution < 8) throw InvalidArgument("resolution must be >= 8");
  if (cfg.n_levels < 16) throw InvalidArgument("n-levels must be >= 16");
  if (cfg.newton_steps < 0) throw InvalidArgument("newton-steps must be >= 0");
  if (!(cfg.newton_tol >= 0.0)) throw InvalidArgument("newton-tol must be >= 0");
  if (cfg.ambiguity != "subdivide" && cfg.ambiguity != "bilinear-decider")
    throw InvalidArgument("ambiguity must be subdivide or bilinear-decider");
  if (!(cfg.radius > 0.0 && cfg.radius < kPi)) throw InvalidArgument("radius must lie in (0, pi)");
  if (cfg.levels.empty()) throw InvalidArgument("at least one level is required");
  if (cfg.out.empty()) throw InvalidArgument("out must not be empty");
  if (cfg.in.empty()) cfg.in = cfg.out;
  if (cfg.formats.empty()) cfg.formats = default_formats(command);
  for (const auto& f : cfg.formats)
    if (f != "json" && f != "csv" && f != "mesh") throw InvalidArgument("unknown format '" + f + "'");
  std::sort(cfg.formats.begin(), cfg.formats.end());
  cfg.formats.erase(std::unique(cfg.formats.begin(), cfg.formats.end()), cfg.formats.end());
  for (double p : cfg.p_values)
    if (!(p >= 1.0)) throw InvalidArgument("p values must be >= 1");
  if (!cfg.manifold.empty()) Manifold::parse(cfg.manifold);

  auto check_manifold = [&](const std::string& spec) {
    const EigenMode m = parse_mode(spec);
    if (cfg.manifold.empty()) cfg.manifold = m.manifold().name();
    if (m.manifold().name() != cfg.manifold)
      throw InvalidArgument("mode '" + spec + "' does not live on " + cfg.manifold);
  };

  if (command == "verify") {
    if (cfg.identities.empty()) throw InvalidArgument("no identity selected");
    for (const auto& id : cfg.identities) {
      if (!kKnownIdentities.count(id)) throw InvalidArgument("unknown identity '" + id + "'");
      if (needs_mode(id) && cfg.mode.empty())
        throw InvalidArgument("identity '" + id + "' needs --mode");
      if (!needs_mode(id) && (cfg.mode_j.empty() || cfg.mode_k.empty()))
        throw InvalidArgument("identity '" + id + "' needs --mode-j and --mode-k");
    }
    if (!cfg.mode.empty()) check_manifold(cfg.mode);
    if (!cfg.mode_j.empty()) check_manifold(cfg.mode_j);
    if (!cfg.mode_k.empty()) check_manifold(cfg.mode_k);
    if (!cfg.mode.empty()) parse_test_function(cfg.f, parse_mode(cfg.mode).manifold());
  } else if (command == "extract") {
    if (cfg.mode.empty()) throw InvalidArgument("extract needs --mode");
    check_manifold(cfg.mode);
  } else if (command == "scan") {
    if (cfg.family.empty()) throw InvalidArgument("scan needs --family");
    const ScanFamily fam = parse_family(cfg.family);
    if (cfg.range.empty()) throw InvalidArgument("scan needs --range");
    if (IndexRange::parse(cfg.range).values().size() < 5)
      throw InvalidArgument("scan range must contain at least 5 indices");
    const std::string mname = family_manifold(fam).name();
    if (cfg.manifold.empty()) cfg.manifold = mname;
    if (cfg.manifold != mname)
      throw InvalidArgument("family '" + cfg.family + "' lives on " + mname);
    if (cfg.fits.empty()) cfg.fits = default_fits(cfg.family);
  }
  return cfg;
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> m;
  m["command"] = command;
  m["manifold"] = manifold;
  m["mode"] = mode;
  m["mode-j"] = mode_j;
  m["mode-k"] = mode_k;
  m["identity"] = join(identities, [](const std::string& s) { return s; });
  m["f"] = f;
  m["level"] = join(levels, shortest);
  m["resolution"] = std::to_string(resolution);
  m["n-levels"] = std::to_string(n_levels);
  m["newton-steps"] = std::to_string(newton_steps);
  m["newton-tol"] = shortest(newton_tol);
  m["ambiguity"] = ambiguity;
  m["center"] = join(center, shortest);
  m["radius"] = shortest(radius);
  std::vector<std::string> tols;
  for (const auto& [k, v] : tolerances) tols.push_back(k + "=" + shortest(v));
  m["tol"] = join(tols, [](const std::string& s) { return s; });
  m["family"] = family;
  m["range"] = range;
  m["fit"] = join(fits, render_fit);
  m["p"] = join(p_values, shortest);
  m["out"] = out;
  m["in"] = in;
  m["name"] = name;
  m["formats"] = join(formats, [](const std::string& s) { return s; });
  return m;
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  for (const auto& [k, v] : to_map()) os << k << "=" << v << "\n";
  return os.str();
}

TestFunction parse_test_function(std::string_view spec, const Manifold& manifold) {
  const std::string s(spec);
  if (s.starts_with("mode:")) {
    return ModeExpansion(manifold).add(1.0, parse_mode(s.substr(5))).to_function();
  }
  if (s.starts_with("bump:")) {
    const auto parts = split(std::string_view(s).substr(5), ':');
    if (parts.size() != 2) throw InvalidArgument("bump spec must be bump:x,y[,z]:radius");
    const auto c = to_doubles("f", parts[0]);
    if (static_cast<int>(c.size()) != manifold.dim())
      throw InvalidArgument("bump center must have one coordinate per dimension");
    Point center{};
    std::copy(c.begin(), c.end(), center.begin());
    return bump_test_function(manifold, center, to_double("f", parts[1]));
  }
  return TestFunction::constant(manifold, to_double("f", s));
}

}  // namespace nodal::cli
