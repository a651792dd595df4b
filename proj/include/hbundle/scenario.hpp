#pragma once

// Scenario runner behind the command-line tool: configuration, checks,
// reports, CSV traces and plot data.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hbundle/propagator.hpp"
#include "json.hpp"

namespace hbundle::cli {

using json = nlohmann::json;

struct ScenarioInfo {
  std::string name;
  std::string summary;
};

const std::vector<ScenarioInfo>& scenarios();

/// Invalid configuration; one diagnostic per offending field.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> fields);
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::string scenario;
  // grid
  int dims = 1;
  int N = 256;
  double L = 40.0;
  double m = 1.0;
  // physics
  double g = 0.5;
  double omega = 0.5;
  double r = 2.0;
  // numerics
  double dt = 1e-3;
  double T = 1.0;
  double h = 1e-3;
  int states = 5;
  int coords = 5;
  int fiber = 4;
  int record_every = 10;
  std::uint64_t seed = 5;
  std::map<std::string, double> tolerances;  // overrides by check name
  // output
  std::string out_dir;
  bool plotdata = true;

  /// Defaults for a scenario: 2D N=128 L=20 for rotating-frame, h=0.02 and
  /// fiber 4 for bundle-identities, 1D N=256 L=40 otherwise.
  static ScenarioConfig defaults(const std::string& scenario);

  double tolerance(const std::string& check, double fallback) const;
  /// Throws ConfigError listing every inconsistent field.
  void validate() const;
  json to_json() const;
};

/// Scenario defaults, then the document, then `key=value` overrides (values
/// parsed as JSON, else taken as strings; dotted keys reach into
/// "tolerances"). The scenario comes from `scenario` when given, else from
/// the document.
ScenarioConfig load_config(const json& document, const std::vector<std::string>& overrides,
                           const std::string& scenario = "");
json read_config_file(const std::string& path);

struct Check {
  std::string name;
  double value;
  std::optional<double> min;
  std::optional<double> max;
  bool pass;
  std::string detail;
};

struct ConvergenceTable {
  std::string name;
  std::string parameter;  // "h" or "dt"
  std::vector<double> steps;
  std::vector<double> values;

  /// log2(values[i] / values[i+1]) / log2(steps[i] / steps[i+1]).
  std::vector<double> orders() const;
};

struct NamedTrace {
  std::string name;
  ObservableTrace trace;
  // Extra centroid columns for plotting, e.g. a classical law.
  std::vector<std::string> law_columns;
  std::function<std::vector<double>(double t)> law;
};

struct RunReport {
  std::string scenario;
  json config;
  std::vector<Check> checks;
  std::vector<ConvergenceTable> convergence;
  std::vector<NamedTrace> traces;
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
  double wall_seconds = 0.0;

  bool pass() const;
  const Check* find(const std::string& name) const;

  void check_at_most(const std::string& name, double value, double max, std::string detail = "");
  void check_at_least(const std::string& name, double value, double min, std::string detail = "");
  void check_within(const std::string& name, double value, double min, double max, std::string detail = "");
  void fail(const std::string& name, const std::string& why);

  json to_json() const;
};

/// Runs the scenario; writes nothing. Admissibility failures inside a
/// scenario become failed checks with a warning.
RunReport run(const ScenarioConfig& config);

/// Writes traces (<name>.csv), plot data when enabled, and report.json into
/// config.out_dir, recording each path in report.artifacts.
void write_outputs(RunReport& report, const ScenarioConfig& config);

/// Columns t, norm, mean_x[, mean_y], mean_px[, mean_py], energy, fidelity.
void write_trace_csv(const ObservableTrace& trace, const std::string& path);

/// Centroid CSV for one trace (t, mean_x[, mean_y], law columns). An empty
/// trace writes nothing and adds a warning to the report.
std::vector<std::string> emit_plotdata(RunReport& report, const NamedTrace& trace, const std::string& dir);

/// One CSV per convergence table: step, value, order.
std::vector<std::string> emit_convergence_data(const RunReport& report, const std::string& dir);

/// %.12e
std::string format_number(double value);

/// Worker count for parallel sweeps: hardware concurrency, capped by the
/// HBUNDLE_MAX_THREADS environment variable when set.
int max_workers();

/// Calls fn(i) for i in [0, count) on up to max_workers() threads; the first
/// exception is rethrown after all workers finish.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace hbundle::cli
