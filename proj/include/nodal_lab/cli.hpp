#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nodal_lab/asymptotics.hpp"

namespace nodal::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Target value and half-width for a fitted exponent.
struct Band {
  double target = 0.0;
  double tolerance = 0.0;
  bool operator==(const Band&) const = default;
};

/// One fitted pair "y:x" with an optional acceptance band.
struct FitSpec {
  std::string y;
  std::string x;
  bool has_band = false;
  Band band;
  bool operator==(const FitSpec&) const = default;
};

/// Flat run configuration. Keys of the canonical text form equal the long flag
/// names, so a --config file and the command line are interchangeable.
struct RunConfig {
  std::string command;
  std::string manifold;  // empty: inferred from the mode spec
  std::string mode;
  std::string mode_j;
  std::string mode_k;
  std::vector<std::string> identities{"nodal"};
  std::string f = "1";
  std::vector<double> levels{0.0};
  int resolution = 512;
  int n_levels = 64;
  int newton_steps = 3;
  double newton_tol = 1e-12;
  std::string ambiguity = "subdivide";
  std::vector<double> center{0.0, 0.0};
  double radius = 0.7853981633974483;
  std::map<std::string, double> tolerances;  // identity -> tolerance
  std::string family;
  std::string range;
  std::vector<FitSpec> fits;
  std::vector<double> p_values;
  std::string out = ".";
  std::string in;
  std::string name;
  std::vector<std::string> formats;

  /// Sorted key=value lines with every default spelled out.
  std::string canonical() const;
  /// The same pairs as a map.
  std::map<std::string, std::string> to_map() const;
  bool operator==(const RunConfig&) const = default;
};

/// Default tolerance per identity name.
const std::map<std::string, double>& default_tolerances();
/// Default fits (with bands) for a scan family.
std::vector<FitSpec> default_fits(const std::string& family);

/// Builds and validates a config from key=value pairs; unknown keys, malformed
/// values and missing required keys throw InvalidArgument.
RunConfig config_from_map(const std::string& command, const std::map<std::string, std::string>& kv);
/// Parses a key=value file body ('#' comments and blank lines ignored).
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Test function from "1", "<number>", "mode:<mode spec>" or "bump:x,y[,z]:r".
TestFunction parse_test_function(std::string_view spec, const Manifold& manifold);

/// Runs a parsed command; returns the exit code (0 pass, 1 failure, 2 bad config).
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// RFC-4180 field quoting.
std::string csv_field(std::string_view text);
/// %.17g rendering.
std::string format_g17(double x);
/// Text mesh document: header line, then one element per line.
std::string mesh_text(const LevelSetMesh& mesh);
/// CSV for a scan table.
std::string table_csv(const std::vector<NormRecord>& table);

}  // namespace nodal::cli
