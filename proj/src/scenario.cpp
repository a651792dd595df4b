#include "hbundle/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "hbundle/bundle_calculus.hpp"
#include "hbundle/frame_connection.hpp"

namespace hbundle::cli {

namespace {

namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Tolerance names and defaults per scenario. Only these may be overridden.
const std::map<std::string, std::map<std::string, double>>& tolerance_table() {
  static const std::map<std::string, std::map<std::string, double>> table = {
      {"curvature-check",
       {{"residual", 1e-5}, {"ratio_min", 3.5}, {"ratio_max", 4.5}, {"floor", 1e-8}, {"floor_analytic", 1e-10}}},
      {"connection-check", {{"relative_error", 1e-5}, {"ratio_min", 3.5}, {"ratio_max", 4.5}}},
      {"bundle-identities", {{"order_min", 1.8}, {"order_max", 2.2}, {"constant", 1e3}}},
      {"linear-accel",
       {{"mod_identity", 1e-5},
        {"ratio_min", 3.5},
        {"ratio_max", 4.5},
        {"slope", 1e-5},
        {"ehrenfest", 1e-6},
        {"transport_fidelity", 1e-6},
        {"reversed_2vp", 1e-4},
        {"reversed_gap", 1e-2}}},
      {"rotating-frame",
       {{"mod_identity", 1e-4},
        {"ratio_min", 3.5},
        {"ratio_max", 4.5},
        {"slope", 1e-4},
        {"energy_drift", 1e-6},
        {"coriolis_effect", 1e-2}}},
      {"equivalence-principle",
       {{"defect", 1e-6}, {"halving_floor", 1e-12}, {"flipped", 1e-2}, {"mod_identity", 1e-5}}},
  };
  return table;
}

// 12 significant digits; non-finite values become null.
json rounded(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_number(v).c_str(), nullptr);
}

json rounded_array(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(rounded(v));
  return out;
}

// ---------------------------------------------------------------------------
// config parsing

struct FieldReader {
  std::vector<std::string>& errors;

  static std::string shown(const json& v) { return v.dump(); }

  void integer(const std::string& key, const json& v, int& out) {
    if (!v.is_number_integer()) {
      errors.push_back(key + ": expected an integer, got " + shown(v));
      return;
    }
    const auto value = v.get<long long>();
    if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
      errors.push_back(key + ": out of range");
      return;
    }
    out = static_cast<int>(value);
  }
  void unsigned64(const std::string& key, const json& v, std::uint64_t& out) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
      errors.push_back(key + ": expected a non-negative integer, got " + shown(v));
      return;
    }
    out = v.get<std::uint64_t>();
  }
  void real(const std::string& key, const json& v, double& out) {
    if (!v.is_number()) {
      errors.push_back(key + ": expected a number, got " + shown(v));
      return;
    }
    out = v.get<double>();
  }
  void boolean(const std::string& key, const json& v, bool& out) {
    if (!v.is_boolean()) {
      errors.push_back(key + ": expected true or false, got " + shown(v));
      return;
    }
    out = v.get<bool>();
  }
  void text(const std::string& key, const json& v, std::string& out) {
    if (!v.is_string()) {
      errors.push_back(key + ": expected a string, got " + shown(v));
      return;
    }
    out = v.get<std::string>();
  }
};

void apply_document(ScenarioConfig& cfg, const json& doc, std::vector<std::string>& errors) {
  if (!doc.is_object()) {
    errors.push_back("config: expected a key-value document");
    return;
  }
  FieldReader read{errors};
  for (const auto& [key, v] : doc.items()) {
    if (key == "scenario") continue;
    if (key == "dims") read.integer(key, v, cfg.dims);
    else if (key == "N") read.integer(key, v, cfg.N);
    else if (key == "L") read.real(key, v, cfg.L);
    else if (key == "m") read.real(key, v, cfg.m);
    else if (key == "g") read.real(key, v, cfg.g);
    else if (key == "omega") read.real(key, v, cfg.omega);
    else if (key == "r") read.real(key, v, cfg.r);
    else if (key == "dt") read.real(key, v, cfg.dt);
    else if (key == "T") read.real(key, v, cfg.T);
    else if (key == "h") read.real(key, v, cfg.h);
    else if (key == "states") read.integer(key, v, cfg.states);
    else if (key == "coords") read.integer(key, v, cfg.coords);
    else if (key == "fiber") read.integer(key, v, cfg.fiber);
    else if (key == "record_every") read.integer(key, v, cfg.record_every);
    else if (key == "seed") read.unsigned64(key, v, cfg.seed);
    else if (key == "out_dir") read.text(key, v, cfg.out_dir);
    else if (key == "plotdata") read.boolean(key, v, cfg.plotdata);
    else if (key == "tolerances") {
      if (!v.is_object()) {
        errors.push_back("tolerances: expected a key-value document");
        continue;
      }
      for (const auto& [name, t] : v.items()) {
        double value = 0.0;
        const std::size_t before = errors.size();
        read.real("tolerances." + name, t, value);
        if (errors.size() == before) cfg.tolerances[name] = value;
      }
    } else {
      errors.push_back(key + ": unknown key");
    }
  }
}

json parse_overrides(const std::vector<std::string>& overrides, std::vector<std::string>& errors) {
  json doc = json::object();
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      errors.push_back("--set " + item + ": expected key=value");
      continue;
    }
    const std::string key = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      doc[key] = value;
    } else {
      doc[key.substr(0, dot)][key.substr(dot + 1)] = value;
    }
  }
  return doc;
}

// ---------------------------------------------------------------------------
// shared scenario pieces

template <class F>
void guarded(RunReport& report, const std::string& name, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report.fail(name, e.what());
  }
}

std::vector<StateVector> packets_1d(const GridPtr& g, std::uint64_t seed, int count) {
  const double max_x = std::min(5.0, 0.125 * g->extent());
  const double max_k = std::min(2.0, 0.1 * g->k_max());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-max_x, max_x);
  std::uniform_real_distribution<double> uk(-max_k, max_k);
  std::uniform_real_distribution<double> us(0.8, 1.6);
  std::vector<StateVector> out;
  for (int i = 0; i < count; ++i) {
    const double x = ux(rng), k = uk(rng), s = us(rng);
    out.push_back(gaussian(g, x, k, s));
  }
  return out;
}

std::vector<FrameCoord> frame_coords(std::uint64_t seed, int count) {
  const FrameCoord fixed[] = {{0.0, 0.0, 0.0}, {0.7, 0.3, 0.0}, {-0.5, 1.0, 0.4}, {1.0, -2.0, -0.3},
                              {0.2, 0.5, 0.25}};
  std::vector<FrameCoord> out;
  for (int i = 0; i < std::min(count, 5); ++i) out.push_back(fixed[i]);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> ut(-1.0, 1.0), ux(-2.0, 2.0), uv(-0.5, 0.5);
  for (int i = 5; i < count; ++i) {
    const double t = ut(rng), x = ux(rng), v = uv(rng);
    out.push_back({t, x, v});
  }
  return out;
}

// A fixed spread of packets for operator comparisons, then seeded extras.
std::vector<StateVector> probe_states_1d(const GridPtr& g, std::uint64_t seed, int count) {
  std::vector<StateVector> out = {gaussian(g, -2.0, 0.5, 1.0), gaussian(g, 1.0, -1.0, 1.2),
                                  gaussian(g, 3.0, 1.0, 0.9)};
  out.resize(static_cast<std::size_t>(std::min(count, 3)), out.front());
  if (count > 3) {
    auto extra = packets_1d(g, seed, count - 3);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}

StateVector packet_2d(const GridPtr& g, double x1, double x2, double k1, double k2, double s = 1.0) {
  const double c[2] = {x1, x2};
  const double k[2] = {k1, k2};
  return gaussian(g, c, k, s);
}

std::vector<StateVector> probe_states_2d(const GridPtr& g, std::uint64_t seed, int count) {
  std::vector<StateVector> out = {packet_2d(g, 0, 0, 0, 0), packet_2d(g, 1, -1, 0.5, 0),
                                  packet_2d(g, -1.5, 0.5, 0, -0.5)};
  out.resize(static_cast<std::size_t>(std::min(count, 3)), out.front());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), uk(-0.5, 0.5);
  for (int i = 3; i < count; ++i) {
    const double a = ux(rng), b = ux(rng), p = uk(rng), q = uk(rng);
    out.push_back(packet_2d(g, a, b, p, q));
  }
  return out;
}

Action numeric_action(const FrameCurve& c, double t, double h) {
  return [c, t, h](const StateVector& psi) { return numeric_effective_hamiltonian(c, t, psi, h); };
}

double rel(const StateVector& a, const StateVector& b) { return norm(a - b) / norm(b); }

// Worst ratio: the one farthest from the centre of [lo, hi].
double worst_ratio(const std::vector<double>& ratios, double lo, double hi) {
  double worst = kNaN;
  const double mid = 0.5 * (lo + hi);
  for (double r : ratios)
    if (std::isnan(worst) || !(std::abs(r - mid) <= std::abs(worst - mid))) worst = r;
  return worst;
}

std::string pair_name(Direction a, Direction b) { return std::string(to_string(a)) + to_string(b); }

// ---------------------------------------------------------------------------
// scenarios

void curvature_check(const ScenarioConfig& cfg, RunReport& report) {
  const GridPtr g = make_grid(1, cfg.N, cfg.L, cfg.m);
  const double tol = cfg.tolerance("residual", 1e-5);
  const double lo = cfg.tolerance("ratio_min", 3.5), hi = cfg.tolerance("ratio_max", 4.5);
  const double floor = cfg.tolerance("floor", 1e-8);
  const double floor_analytic = cfg.tolerance("floor_analytic", 1e-10);
  const std::pair<Direction, Direction> pairs[] = {
      {Direction::T, Direction::X}, {Direction::T, Direction::V}, {Direction::X, Direction::V}};

  std::vector<StateVector> states;
  std::vector<FrameCoord> coords;
  guarded(report, "prepare_states", [&] {
    states = packets_1d(g, cfg.seed, cfg.states);
    coords = frame_coords(cfg.seed, cfg.coords);
  });
  if (report.find("prepare_states")) return;

  struct Sample {
    // per pair: numeric residual / scale at h, h/2, h/4; analytic at h
    double r[3][3] = {};
    double analytic[3] = {};
    std::string error;
  };
  const int total = static_cast<int>(states.size() * coords.size());
  std::vector<Sample> samples(static_cast<std::size_t>(total));
  parallel_for(total, [&](int i) {
    Sample& s = samples[static_cast<std::size_t>(i)];
    const StateVector& psi = states[static_cast<std::size_t>(i) / coords.size()];
    const FrameCoord& c = coords[static_cast<std::size_t>(i) % coords.size()];
    try {
      for (int p = 0; p < 3; ++p) {
        const auto [a, b] = pairs[p];
        const double scale = curvature_scale(a, b, psi);
        for (int k = 0; k < 3; ++k) {
          const double h = cfg.h / std::pow(2.0, k);
          s.r[p][k] = norm(curvature_residual(a, b, c, psi, h, CurvatureMethod::Numeric)) / scale;
        }
        s.analytic[p] = norm(curvature_residual(a, b, c, psi, cfg.h, CurvatureMethod::Analytic)) / scale;
      }
    } catch (const std::exception& e) {
      s.error = e.what();
    }
  });
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!samples[i].error.empty()) {
      report.fail("sample_" + std::to_string(i), samples[i].error);
      return;
    }

  for (int p = 0; p < 3; ++p) {
    const std::string name = pair_name(pairs[p].first, pairs[p].second);
    ConvergenceTable table{"curvature_" + name, "h", {}, {}};
    for (int k = 0; k < 3; ++k) {
      double worst = 0.0;
      for (const Sample& s : samples) worst = std::max(worst, s.r[p][k]);
      table.steps.push_back(cfg.h / std::pow(2.0, k));
      table.values.push_back(worst);
    }
    report.check_at_most("residual_" + name, table.values[0], tol, "max over samples of |Omega psi| / scale at h");

    std::vector<double> ratios;
    double floor_worst = 0.0;
    int at_floor = 0;
    for (const Sample& s : samples) {
      if (s.r[p][0] <= floor && s.r[p][1] <= floor) {
        ++at_floor;
        floor_worst = std::max(floor_worst, s.analytic[p]);
      } else {
        ratios.push_back(s.r[p][0] / s.r[p][1]);
      }
    }
    if (!ratios.empty())
      report.check_within("ratio_" + name, worst_ratio(ratios, lo, hi), lo, hi,
                          std::to_string(ratios.size()) + " samples above the round-off floor");
    if (at_floor > 0)
      report.check_at_most("floor_" + name, floor_worst, floor_analytic,
                           std::to_string(at_floor) +
                               " samples at the round-off floor; closed-form components checked instead");
    report.convergence.push_back(std::move(table));
  }
}

void connection_check(const ScenarioConfig& cfg, RunReport& report) {
  const GridPtr g = make_grid(1, cfg.N, cfg.L, cfg.m);
  const double tol = cfg.tolerance("relative_error", 1e-5);
  const double lo = cfg.tolerance("ratio_min", 3.5), hi = cfg.tolerance("ratio_max", 4.5);
  std::vector<StateVector> states;
  std::vector<FrameCoord> coords;
  guarded(report, "prepare_states", [&] {
    states = packets_1d(g, cfg.seed, cfg.states);
    coords = frame_coords(cfg.seed, cfg.coords);
  });
  if (report.find("prepare_states")) return;

  const Direction dirs[] = {Direction::T, Direction::X, Direction::V};
  struct Sample {
    double e[3][3] = {};
    std::string error;
  };
  const int total = static_cast<int>(states.size() * coords.size());
  std::vector<Sample> samples(static_cast<std::size_t>(total));
  parallel_for(total, [&](int i) {
    Sample& s = samples[static_cast<std::size_t>(i)];
    const StateVector& psi = states[static_cast<std::size_t>(i) / coords.size()];
    const FrameCoord& c = coords[static_cast<std::size_t>(i) % coords.size()];
    try {
      for (int d = 0; d < 3; ++d) {
        const StateVector exact = analytic_connection(dirs[d], c)(psi);
        for (int k = 0; k < 3; ++k)
          s.e[d][k] = rel(numeric_connection(dirs[d], c, psi, cfg.h / std::pow(2.0, k)), exact);
      }
    } catch (const std::exception& e) {
      s.error = e.what();
    }
  });
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!samples[i].error.empty()) {
      report.fail("sample_" + std::to_string(i), samples[i].error);
      return;
    }
  for (int d = 0; d < 3; ++d) {
    const std::string name = to_string(dirs[d]);
    ConvergenceTable table{"connection_" + name, "h", {}, {}};
    std::vector<double> ratios;
    for (int k = 0; k < 3; ++k) {
      double worst = 0.0;
      for (const Sample& s : samples) worst = std::max(worst, s.e[d][k]);
      table.steps.push_back(cfg.h / std::pow(2.0, k));
      table.values.push_back(worst);
    }
    for (const Sample& s : samples) ratios.push_back(s.e[d][0] / s.e[d][1]);
    report.check_at_most("relative_error_" + name, table.values[0], tol, "max over samples at h");
    report.check_within("ratio_" + name, worst_ratio(ratios, lo, hi), lo, hi, "per-sample error ratio h : h/2");
    report.convergence.push_back(std::move(table));
  }
}

void bundle_identities(const ScenarioConfig& cfg, RunReport& report) {
  using namespace bundle;
  const double lo = cfg.tolerance("order_min", 1.8), hi = cfg.tolerance("order_max", 2.2);
  const double constant = cfg.tolerance("constant", 1e3);
  const int n = cfg.fiber;
  auto box = [](double h) { return Patch{Point::Zero(3), Point::Ones(3), h}; };
  const std::vector<Point> points = sample_points(box(0.1), 2, 3);
  const GaugeField u = random_gauge(3, n, cfg.seed + 1);

  auto covariance = [&](double h) {
    const MatrixFormField w = random_connection(box(h), n, cfg.seed);
    const MatrixFormField lhs = curvature(gauge_transform(w, u));
    const MatrixFormField rhs = curvature(w);
    double worst = 0.0;
    for (const Point& p : points) {
      const Matrix up = u(p);
      for (int mu = 0; mu < 3; ++mu)
        for (int nu = mu + 1; nu < 3; ++nu)
          worst = std::max(worst, (lhs(p, mu, nu) - up.adjoint() * rhs(p, mu, nu) * up).norm());
    }
    return worst;
  };
  auto bianchi = [&](double h) { return max_norm(bianchi_residual(random_connection(box(h), n, cfg.seed + 2)), points); };
  auto flat = [&](double h) { return max_norm(curvature(pure_gauge(u, box(h))), points); };

  const std::pair<std::string, std::function<double(double)>> suites[] = {
      {"covariance", covariance}, {"bianchi", bianchi}, {"pure_gauge", flat}};
  for (const auto& [name, residual] : suites) {
    guarded(report, "order_" + name, [&] {
      ConvergenceTable table{name, "h", {}, {}};
      for (int k = 0; k < 3; ++k) {
        const double h = cfg.h / std::pow(2.0, k);
        table.steps.push_back(h);
        table.values.push_back(residual(h));
      }
      const auto orders = table.orders();
      report.check_within("order_" + name, worst_ratio(orders, lo, hi), lo, hi, "log2 ratio per halving of h");
      const double hmin = table.steps.back();
      report.check_at_most("constant_" + name, table.values.back() / (hmin * hmin), constant,
                           "residual / h^2 at the finest h");
      report.convergence.push_back(std::move(table));
    });
  }
}

// compare_mod_identity of the closed-form chart Hamiltonian against the
// numeric derivative at t = 0, T/2, T, with an h-halving ratio.
void linear_mod_identity(const ScenarioConfig& cfg, RunReport& report, const std::vector<StateVector>& states) {
  const FrameCurve curve = FrameCurve::linear_accel(cfg.g);
  const double tol = cfg.tolerance("mod_identity", 1e-5);
  const double lo = cfg.tolerance("ratio_min", 3.5), hi = cfg.tolerance("ratio_max", 4.5);
  double worst = 0.0, worst_offset = 0.0;
  std::vector<double> ratios;
  for (double t : {0.0, 0.5 * cfg.T, cfg.T}) {
    const Action exact = analytic_effective_hamiltonian(curve, t, cfg.m).action();
    const ModIdentity r1 = compare_mod_identity(exact, numeric_action(curve, t, cfg.h), states);
    const ModIdentity r2 = compare_mod_identity(exact, numeric_action(curve, t, 0.5 * cfg.h), states);
    worst = std::max(worst, r1.residual);
    worst_offset = std::max(worst_offset, std::abs(r1.offset));
    ratios.push_back(r1.residual / r2.residual);
  }
  report.check_at_most("mod_identity", worst, tol, "closed form vs i (dU/dt) U^-1, worst over t in {0, T/2, T}");
  report.check_within("mod_identity_ratio", worst_ratio(ratios, lo, hi), lo, hi, "h : h/2");
  std::ostringstream note;
  note << "largest identity offset between the two routes: " << format_number(worst_offset);
  report.notes.push_back(note.str());
}

void linear_accel(const ScenarioConfig& cfg, RunReport& report) {
  const GridPtr g = make_grid(1, cfg.N, cfg.L, cfg.m);
  const FrameCurve chart = FrameCurve::linear_accel(cfg.g);
  const FrameCurve reversed = FrameCurve::linear_accel(cfg.g, FrameCurve::Order::Reversed);
  const double m = cfg.m, gval = cfg.g;
  std::vector<StateVector> states;
  guarded(report, "prepare_states", [&] { states = probe_states_1d(g, cfg.seed, cfg.states); });
  if (report.find("prepare_states")) return;

  guarded(report, "mod_identity", [&] {
    linear_mod_identity(cfg, report, states);
    const FrameCurve& c = chart;
    const double t = cfg.T;
    ConvergenceTable table{"mod_identity", "h", {}, {}};
    const Action exact = analytic_effective_hamiltonian(c, t, m).action();
    for (int k = 0; k < 3; ++k) {
      const double h = cfg.h / std::pow(2.0, k);
      table.steps.push_back(h);
      table.values.push_back(compare_mod_identity(exact, numeric_action(c, t, h), states).residual);
    }
    report.convergence.push_back(std::move(table));
  });

  guarded(report, "pseudo_force_slope", [&] {
    const Action n = numeric_action(chart, 0.5 * cfg.T, cfg.h);
    const Action residual = [&](const StateVector& p) { return n(p) - apply(OperatorTag::Hfree, p); };
    const double slope = expectation_slope(residual, g, 0.0, 0.5);
    const double expected = -m * gval;
    report.check_at_most("pseudo_force_slope", std::abs(slope - expected) / std::max(std::abs(expected), 1.0),
                         cfg.tolerance("slope", 1e-5),
                         "d<H - Hfree>/da = " + format_number(slope) + ", expected -m g = " + format_number(expected));
  });

  guarded(report, "reversed_order", [&] {
    const double t = 0.5 * cfg.T;
    const double v = chart.linear_coord(t).v;
    const Action rev = numeric_action(reversed, t, cfg.h);
    report.check_at_most("reversed_closed_form",
                         compare_mod_identity(analytic_effective_hamiltonian(reversed, t, m).action(), rev, states).residual,
                         cfg.tolerance("mod_identity", 1e-5), "U_t U_-x U_-v against its own closed form");
    const Action chart_plus = [&](const StateVector& p) {
      return numeric_action(chart, t, cfg.h)(p) + (2.0 * v) * apply(OperatorTag::P, p);
    };
    report.check_at_most("reversed_2vp", compare_mod_identity(chart_plus, rev, states).residual,
                         cfg.tolerance("reversed_2vp", 1e-4), "reversed order = chart order + 2 v P (mod identity)");
    if (v != 0.0) {
      report.check_at_least("reversed_order_gap",
                            compare_mod_identity(numeric_action(chart, t, cfg.h), rev, states).residual,
                            cfg.tolerance("reversed_gap", 1e-2), "the two factor orders give different generators");
    }
    std::ostringstream note;
    note << "factor order matters: U_t U_-x U_-v yields P^2/2m + 2vP - mgX + mv^2/2 (v = " << format_number(v)
         << " at t = " << format_number(t) << "); the chart order U_-v U_-x U_t yields P^2/2m - mg(X + x(t))";
    report.notes.push_back(note.str());
  });

  guarded(report, "evolution", [&] {
    const double x0 = -2.0, k0 = 0.5;
    const StateVector psi = gaussian(g, x0, k0, 1.0);
    const EffectiveHamiltonian h = analytic_effective_hamiltonian(chart, 0.0, m);
    const Reference transported = [&](double t) { return transport(psi, chart.word(t)); };
    const int steps = static_cast<int>(std::lround(cfg.T / cfg.dt));
    const Evolution ev = evolve(psi, h, {cfg.dt, steps, cfg.record_every}, transported);
    double fid = 0.0, law = 0.0;
    for (const TraceRow& row : ev.trace.rows) {
      fid = std::max(fid, row.fidelity.value_or(0.0));
      law = std::max(law, std::abs(row.mean_x[0] - (x0 + k0 * row.t / m + 0.5 * gval * row.t * row.t)));
    }
    report.check_at_most("ehrenfest", law, cfg.tolerance("ehrenfest", 1e-6), "<X>(t) = x0 + k0 t/m + g t^2/2");
    report.check_at_most("transport_fidelity", fid, cfg.tolerance("transport_fidelity", 1e-6),
                         "evolution under the closed form vs the transported state U(t) psi");
    NamedTrace trace{"chart_trace", ev.trace, {"law_x", "inertial_x"}, {}};
    trace.law = [=](double t) {
      return std::vector<double>{x0 + k0 * t / m + 0.5 * gval * t * t, x0 + k0 * t / m};
    };
    report.traces.push_back(std::move(trace));
    report.notes.push_back(
        "sign: the chart coordinate is x' = x + g t^2/2 relative to an inertial observer, so the centroid "
        "follows +g t^2/2; an observer whose origin moves as +g t^2/2 with x' = x - g t^2/2 sees -g t^2/2");
  });
}

void rotating_frame(const ScenarioConfig& cfg, RunReport& report) {
  const GridPtr g = make_grid(2, cfg.N, cfg.L, cfg.m);
  const FrameCurve curve = FrameCurve::circular(cfg.omega, cfg.r);
  const double m = cfg.m, w = cfg.omega;
  std::vector<StateVector> states;
  guarded(report, "prepare_states", [&] { states = probe_states_2d(g, cfg.seed, cfg.states); });
  if (report.find("prepare_states")) return;

  guarded(report, "mod_identity", [&] {
    const double lo = cfg.tolerance("ratio_min", 3.5), hi = cfg.tolerance("ratio_max", 4.5);
    double worst = 0.0;
    std::vector<double> ratios;
    for (double t : {0.0, 0.5 * cfg.T}) {
      const Action exact = analytic_effective_hamiltonian(curve, t, m).action();
      const ModIdentity r1 = compare_mod_identity(exact, numeric_action(curve, t, cfg.h), states);
      const ModIdentity r2 = compare_mod_identity(exact, numeric_action(curve, t, 0.5 * cfg.h), states);
      worst = std::max(worst, r1.residual);
      ratios.push_back(r1.residual / r2.residual);
      if (t == 0.0) {
        const ModIdentity r4 = compare_mod_identity(exact, numeric_action(curve, t, 0.25 * cfg.h), states);
        report.convergence.push_back(
            {"mod_identity", "h", {cfg.h, 0.5 * cfg.h, 0.25 * cfg.h}, {r1.residual, r2.residual, r4.residual}});
      }
    }
    report.check_at_most("mod_identity", worst, cfg.tolerance("mod_identity", 1e-4),
                         "closed form vs i (dU/dt) U^-1, worst over t in {0, T/2}");
    report.check_within("mod_identity_ratio", worst_ratio(ratios, lo, hi), lo, hi, "h : h/2");
  });

  guarded(report, "centrifugal_slope", [&] {
    EffectiveHamiltonian coriolis;
    coriolis.mass = m;
    coriolis.rotation_rate = w;
    const Action n = numeric_action(curve, 0.0, cfg.h);
    const Action scalar = [&](const StateVector& p) { return n(p) - coriolis.apply_kinetic(p); };
    double worst = 0.0;
    for (double a : {-1.0, 0.0, 1.5}) {
      const double expected = m * w * w * (a + cfg.r);
      const double measured = -expectation_slope(scalar, g, a, 0.5);
      const double denom = std::abs(expected) > 0.0 ? std::abs(expected) : 1.0;
      worst = std::max(worst, std::abs(measured - expected) / denom);
    }
    report.check_at_most("centrifugal_slope", worst, cfg.tolerance("slope", 1e-4),
                         "-d<V>/da against m w^2 (distance from the rotation centre) at a in {-1, 0, 1.5}");
  });

  guarded(report, "coriolis", [&] {
    EffectiveHamiltonian coriolis;
    coriolis.mass = m;
    coriolis.rotation_rate = w;
    const StateVector psi = packet_2d(g, 0.5, 0.0, 1.0, 0.0);
    const int steps = static_cast<int>(std::lround(cfg.T / cfg.dt));
    const Evolution rot = evolve(psi, coriolis, {cfg.dt, steps, cfg.record_every});
    const Evolution inertial = evolve(psi, free_hamiltonian(2, m), {cfg.dt, steps, steps > 0 ? steps : 1});
    double drift = 0.0;
    for (const TraceRow& row : rot.trace.rows) drift = std::max(drift, std::abs(row.energy - rot.trace.rows[0].energy));
    report.check_at_most("coriolis_energy", drift, cfg.tolerance("energy_drift", 1e-6),
                         "shifted-kinetic expectation over T");
    const double dp = std::abs(rot.trace.rows.back().mean_p[0] - inertial.trace.rows.back().mean_p[0]);
    report.check_at_least("coriolis_effect", dp, cfg.tolerance("coriolis_effect", 1e-2),
                          "|<P1>(T) - <P1>_inertial(T)|");
  });

  guarded(report, "evolution", [&] {
    const StateVector psi = packet_2d(g, 1.0, 0.0, 0.0, 0.0);
    const EffectiveHamiltonian h = analytic_effective_hamiltonian(curve, 0.0, m);
    const StateVector base = transport(psi, curve.word(0.0).inverse());
    const Reference transported = [&](double t) { return transport(base, curve.word(t)); };
    const int steps = static_cast<int>(std::lround(cfg.T / cfg.dt));
    const Evolution ev = evolve(psi, h, {cfg.dt, steps, cfg.record_every}, transported);
    report.traces.push_back({"rotating_chart_trace", ev.trace, {}, {}});
  });
}

void equivalence_principle(const ScenarioConfig& cfg, RunReport& report) {
  const GridPtr g = make_grid(1, cfg.N, cfg.L, cfg.m);
  const double gval = cfg.g, m = cfg.m;
  const double x0 = -2.0, k0 = 0.5;

  guarded(report, "defect", [&] {
    const StateVector psi = gaussian(g, x0, k0, 1.0);
    const double d1 = equivalence_check(psi, gval, cfg.T, {cfg.dt, 0, 1}).defect;
    const double d2 = equivalence_check(psi, gval, cfg.T, {0.5 * cfg.dt, 0, 1}).defect;
    report.check_at_most("defect", d1, cfg.tolerance("defect", 1e-6), "1 - |<mapped free | uniform field>| at dt");
    const double floor = cfg.tolerance("halving_floor", 1e-12);
    report.check_at_most("defect_halving", d2, std::max(d1, floor),
                         "defect at dt/2 against max(defect at dt, round-off floor)");
    report.convergence.push_back({"defect", "dt", {cfg.dt, 0.5 * cfg.dt}, {d1, d2}});
    if (gval != 0.0 && cfg.T > 0.0) {
      report.check_at_least("flipped_phase_detected",
                            equivalence_check(psi, gval, cfg.T, {cfg.dt, 0, 1}, PhaseSign::Flipped).defect,
                            cfg.tolerance("flipped", 1e-2), "the map with the phase sign reversed must fail");
    }
  });

  guarded(report, "mod_identity", [&] {
    linear_mod_identity(cfg, report, probe_states_1d(g, cfg.seed, std::max(cfg.states, 2)));
  });

  guarded(report, "evolution", [&] {
    const StateVector psi = gaussian(g, x0, k0, 1.0);
    const Reference mapped = [&](double t) { return accelerated_frame_map(time_translate(psi, t), t, gval); };
    const int steps = static_cast<int>(std::lround(cfg.T / cfg.dt));
    const Evolution ev = evolve(psi, uniform_field(m, gval), {cfg.dt, steps, cfg.record_every}, mapped);
    NamedTrace trace{"uniform_field_trace", ev.trace, {"law_x"}, {}};
    trace.law = [=](double t) { return std::vector<double>{x0 + k0 * t / m + 0.5 * gval * t * t}; };
    report.traces.push_back(std::move(trace));
  });
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw OutputError("failed writing " + path.string());
}

std::string convergence_csv(const ConvergenceTable& t) {
  std::ostringstream out;
  out << t.parameter << ",value,order\n";
  const auto orders = t.orders();
  for (std::size_t i = 0; i < t.steps.size(); ++i)
    out << format_number(t.steps[i]) << ',' << format_number(t.values[i]) << ','
        << (i < orders.size() ? format_number(orders[i]) : format_number(kNaN)) << '\n';
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<ScenarioInfo>& scenarios() {
  static const std::vector<ScenarioInfo> list = {
      {"curvature-check", "flatness of the Galilei connection: pair residuals and their h^2 convergence"},
      {"connection-check", "numeric U dU^-1 against the closed-form connection components"},
      {"bundle-identities", "gauge covariance, Bianchi identity and pure-gauge flatness on matrix fields"},
      {"linear-accel", "effective Hamiltonian of a uniformly accelerated frame, pseudo-force and centroid law"},
      {"rotating-frame", "rotating-frame Hamiltonian, centrifugal slope and coriolis dynamics"},
      {"equivalence-principle", "free evolution mapped to an accelerated chart against a uniform field"},
  };
  return list;
}

ConfigError::ConfigError(std::vector<std::string> fields)
    : std::invalid_argument([&] {
        std::string msg = "invalid configuration";
        for (const auto& f : fields) msg += "\n  " + f;
        return msg;
      }()),
      fields_(std::move(fields)) {}

ScenarioConfig ScenarioConfig::defaults(const std::string& scenario) {
  ScenarioConfig cfg;
  cfg.scenario = scenario;
  if (scenario == "rotating-frame") {
    cfg.dims = 2;
    cfg.N = 128;
    cfg.L = 20.0;
    cfg.states = 3;
  } else if (scenario == "bundle-identities") {
    cfg.h = 0.02;
  } else if (scenario == "linear-accel" || scenario == "equivalence-principle") {
    cfg.states = 3;
  }
  return cfg;
}

double ScenarioConfig::tolerance(const std::string& check, double fallback) const {
  const auto it = tolerances.find(check);
  return it == tolerances.end() ? fallback : it->second;
}

void ScenarioConfig::validate() const {
  std::vector<std::string> errors;
  const auto& table = tolerance_table();
  const auto known = table.find(scenario);
  if (scenario.empty()) {
    errors.push_back("scenario: required");
  } else if (known == table.end()) {
    std::string names;
    for (const auto& s : scenarios()) names += (names.empty() ? "" : ", ") + s.name;
    errors.push_back("scenario: unknown '" + scenario + "' (known: " + names + ")");
  }
  if (dims != 1 && dims != 2) {
    errors.push_back("dims: must be 1 or 2");
  } else if (scenario == "rotating-frame" && dims != 2) {
    errors.push_back("dims: rotating-frame requires dims=2");
  } else if (dims != 1 && scenario != "rotating-frame" && scenario != "bundle-identities") {
    errors.push_back("dims: " + scenario + " requires dims=1");
  }
  if (N < 8 || N % 2 != 0) errors.push_back("N: must be an even number >= 8");
  auto positive = [&](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) errors.push_back(std::string(name) + ": must be positive and finite");
  };
  positive("L", L);
  positive("m", m);
  positive("dt", dt);
  positive("h", h);
  if (!std::isfinite(g)) errors.push_back("g: must be finite");
  if (!std::isfinite(omega)) errors.push_back("omega: must be finite");
  if (!(r >= 0.0) || !std::isfinite(r)) errors.push_back("r: must be >= 0 and finite");
  if (!(T >= 0.0) || !std::isfinite(T)) errors.push_back("T: must be >= 0 and finite");
  if (states < 1) errors.push_back("states: must be >= 1");
  if ((scenario == "linear-accel" || scenario == "rotating-frame") && states < 2)
    errors.push_back("states: " + scenario + " compares operators on at least 2 states");
  if (coords < 1) errors.push_back("coords: must be >= 1");
  if (fiber < 1) errors.push_back("fiber: must be >= 1");
  if (record_every < 1) errors.push_back("record_every: must be >= 1");
  if (known != table.end())
    for (const auto& [name, value] : tolerances) {
      if (!known->second.count(name)) {
        std::string names;
        for (const auto& [k, d] : known->second) names += (names.empty() ? "" : ", ") + k;
        errors.push_back("tolerances." + name + ": not used by " + scenario + " (known: " + names + ")");
      } else if (!(value > 0.0) || !std::isfinite(value)) {
        errors.push_back("tolerances." + name + ": must be positive and finite");
      }
    }
  if (const char* env = std::getenv("HBUNDLE_MAX_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) errors.push_back("HBUNDLE_MAX_THREADS: must be a positive integer");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

json ScenarioConfig::to_json() const {
  json tol = json::object();
  for (const auto& [k, v] : tolerances) tol[k] = v;
  return {{"scenario", scenario}, {"dims", dims},   {"N", N},
          {"L", L},               {"m", m},         {"g", g},
          {"omega", omega},       {"r", r},         {"dt", dt},
          {"T", T},               {"h", h},         {"states", states},
          {"coords", coords},     {"fiber", fiber}, {"record_every", record_every},
          {"seed", seed},         {"tolerances", tol}, {"out_dir", out_dir},
          {"plotdata", plotdata}};
}

ScenarioConfig load_config(const json& document, const std::vector<std::string>& overrides,
                           const std::string& scenario) {
  std::vector<std::string> errors;
  const json over = parse_overrides(overrides, errors);
  std::string name = scenario;
  if (name.empty() && over.contains("scenario")) {
    if (over["scenario"].is_string()) name = over["scenario"].get<std::string>();
    else errors.push_back("scenario: expected a string");
  }
  if (name.empty() && document.is_object() && document.contains("scenario")) {
    if (document["scenario"].is_string()) name = document["scenario"].get<std::string>();
    else errors.push_back("scenario: expected a string");
  }
  ScenarioConfig cfg = ScenarioConfig::defaults(name);
  if (!document.is_null()) apply_document(cfg, document, errors);
  apply_document(cfg, over, errors);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  cfg.validate();
  return cfg;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config: cannot read " + path});
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError({"config: " + path + " is not a valid JSON document"});
  return doc;
}

// ---------------------------------------------------------------------------

std::vector<double> ConvergenceTable::orders() const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < steps.size() && i + 1 < values.size(); ++i)
    out.push_back(std::log2(values[i] / values[i + 1]) / std::log2(steps[i] / steps[i + 1]));
  return out;
}

bool RunReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check* RunReport::find(const std::string& name) const {
  for (const Check& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

void RunReport::check_at_most(const std::string& name, double value, double max, std::string detail) {
  checks.push_back({name, value, std::nullopt, max, value <= max, std::move(detail)});
}

void RunReport::check_at_least(const std::string& name, double value, double min, std::string detail) {
  checks.push_back({name, value, min, std::nullopt, value >= min, std::move(detail)});
}

void RunReport::check_within(const std::string& name, double value, double min, double max, std::string detail) {
  checks.push_back({name, value, min, max, value >= min && value <= max, std::move(detail)});
}

void RunReport::fail(const std::string& name, const std::string& why) {
  checks.push_back({name, kNaN, std::nullopt, std::nullopt, false, why});
  warnings.push_back(name + ": " + why);
}

json RunReport::to_json() const {
  json out;
  out["scenario"] = scenario;
  out["pass"] = pass();
  out["config"] = config;
  out["checks"] = json::array();
  for (const Check& c : checks) {
    json tol = json::object();
    if (c.min) tol["min"] = rounded(*c.min);
    if (c.max) tol["max"] = rounded(*c.max);
    out["checks"].push_back(
        {{"name", c.name}, {"value", rounded(c.value)}, {"tolerance", tol}, {"pass", c.pass}, {"detail", c.detail}});
  }
  out["convergence"] = json::array();
  for (const ConvergenceTable& t : convergence)
    out["convergence"].push_back({{"name", t.name},
                                  {"parameter", t.parameter},
                                  {"steps", rounded_array(t.steps)},
                                  {"values", rounded_array(t.values)},
                                  {"orders", rounded_array(t.orders())}});
  out["wall_seconds"] = rounded(wall_seconds);
  out["artifacts"] = artifacts;
  out["warnings"] = warnings;
  out["notes"] = notes;
  return out;
}

RunReport run(const ScenarioConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.scenario = config.scenario;
  report.config = config.to_json();
  guarded(report, "scenario", [&] {
    if (config.scenario == "curvature-check") curvature_check(config, report);
    else if (config.scenario == "connection-check") connection_check(config, report);
    else if (config.scenario == "bundle-identities") bundle_identities(config, report);
    else if (config.scenario == "linear-accel") linear_accel(config, report);
    else if (config.scenario == "rotating-frame") rotating_frame(config, report);
    else if (config.scenario == "equivalence-principle") equivalence_principle(config, report);
  });
  if (report.checks.empty()) report.fail("checks", "the scenario produced no checks");
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", value);
  return buf;
}

void write_trace_csv(const ObservableTrace& trace, const std::string& path) {
  std::ostringstream out;
  const bool two = trace.dims == 2;
  out << "t,norm,mean_x," << (two ? "mean_y," : "") << "mean_px," << (two ? "mean_py," : "") << "energy,fidelity\n";
  for (const TraceRow& row : trace.rows) {
    out << format_number(row.t) << ',' << format_number(row.norm);
    for (double x : row.mean_x) out << ',' << format_number(x);
    for (double p : row.mean_p) out << ',' << format_number(p);
    out << ',' << format_number(row.energy) << ',' << format_number(row.fidelity.value_or(kNaN)) << '\n';
  }
  write_text(path, out.str());
}

std::vector<std::string> emit_plotdata(RunReport& report, const NamedTrace& trace, const std::string& dir) {
  if (trace.trace.empty()) {
    report.warnings.push_back("plotdata: trace '" + trace.name + "' is empty; no centroid file written");
    return {};
  }
  std::ostringstream out;
  const bool two = trace.trace.dims == 2;
  out << "t,mean_x" << (two ? ",mean_y" : "");
  for (const auto& c : trace.law_columns) out << ',' << c;
  out << '\n';
  for (const TraceRow& row : trace.trace.rows) {
    out << format_number(row.t);
    for (double x : row.mean_x) out << ',' << format_number(x);
    if (trace.law)
      for (double v : trace.law(row.t)) out << ',' << format_number(v);
    out << '\n';
  }
  const fs::path path = fs::path(dir) / (trace.name + "_centroid.csv");
  write_text(path, out.str());
  return {path.string()};
}

std::vector<std::string> emit_convergence_data(const RunReport& report, const std::string& dir) {
  std::vector<std::string> files;
  for (const ConvergenceTable& t : report.convergence) {
    const fs::path path = fs::path(dir) / (t.name + "_vs_" + t.parameter + ".csv");
    write_text(path, convergence_csv(t));
    files.push_back(path.string());
  }
  return files;
}

void write_outputs(RunReport& report, const ScenarioConfig& config) {
  const fs::path dir = config.out_dir.empty() ? fs::path(".") : fs::path(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create " + dir.string() + ": " + ec.message());
  for (const NamedTrace& t : report.traces) {
    const fs::path path = dir / (t.name + ".csv");
    write_trace_csv(t.trace, path.string());
    report.artifacts.push_back(path.string());
  }
  if (config.plotdata) {
    for (const auto& f : emit_convergence_data(report, dir.string())) report.artifacts.push_back(f);
    const std::vector<NamedTrace> traces = report.traces;
    for (const NamedTrace& t : traces)
      for (const auto& f : emit_plotdata(report, t, dir.string())) report.artifacts.push_back(f);
  }
  const fs::path path = dir / "report.json";
  report.artifacts.push_back(path.string());
  write_text(path, report.to_json().dump(2) + "\n");
}

int max_workers() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("HBUNDLE_MAX_THREADS"); env && *env) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (*end == '\0' && cap >= 1) n = static_cast<int>(std::min<long>(n, cap));
  }
  return n;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(count, max_workers());
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(guard);
          if (!first) first = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace hbundle::cli
