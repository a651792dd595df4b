#pragma once

// Strang split-operator evolution under an EffectiveHamiltonian, and the
// accelerated-frame map between free and uniform-field evolution.

#include <functional>
#include <optional>
#include <vector>

#include "hbundle/noninertial.hpp"

namespace hbundle {

struct EvolutionConfig {
  double dt = 1e-3;
  int steps = 1000;
  int record_every = 1;

  void validate() const;
  double duration() const { return dt * steps; }
};

struct TraceRow {
  double t;
  double norm;
  std::vector<double> mean_x;  // one per axis
  std::vector<double> mean_p;
  double energy;
  std::optional<double> fidelity;  // 1 - |<ref|psi>| when a reference is given
};

struct ObservableTrace {
  int dims = 1;
  std::vector<TraceRow> rows;

  bool empty() const { return rows.empty(); }
};

struct Evolution {
  StateVector state;
  ObservableTrace trace;
};

/// Admissibility lost during a run; `step` is the first offending step.
class EvolutionError : public SupportError {
 public:
  EvolutionError(const std::string& what, int step) : SupportError(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

using Reference = std::function<StateVector(double t)>;

/// Strang splitting exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2). For a rotating
/// Hamiltonian the kinetic factor is exp(-i Hfree dt) exp(i w J dt), the J
/// part applied as an exact rotation by -w dt, and m w^2 rho^2 / 2 joins V.
Evolution evolve(const StateVector& psi0, const EffectiveHamiltonian& h, const EvolutionConfig& cfg,
                 const Reference& reference = {});

enum class PhaseSign { Correct, Flipped };

/// psi'(x') = exp(i m g (x' t - g t^3 / 6)) psi(x' - g t^2 / 2): a space
/// translation by -g t^2/2, then a boost by -g t, then the constant phase.
/// PhaseSign::Flipped negates the whole phase (diagnostic).
StateVector accelerated_frame_map(const StateVector& psi, double t, double g,
                              PhaseSign sign = PhaseSign::Correct);

/// P^2/2m - m g X in 1D.
EffectiveHamiltonian uniform_field(double mass, double g);

struct EquivalenceResult {
  double defect;  // 1 - |<mapped free | direct>|
  StateVector mapped;
  StateVector direct;
};

/// Free evolution to T mapped by accelerated_frame_map, against direct evolution
/// under the uniform field; T is rounded to a whole number of cfg.dt steps.
EquivalenceResult equivalence_check(const StateVector& psi0, double g, double duration,
                                    const EvolutionConfig& cfg, PhaseSign sign = PhaseSign::Correct);

}  // namespace hbundle
