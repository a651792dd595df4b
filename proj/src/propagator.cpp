#include "hbundle/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hbundle {

namespace {

TraceRow observe(const StateVector& psi, double t, const EffectiveHamiltonian& h, const Reference& reference) {
  const int dims = psi.space().dims();
  TraceRow row{t, norm(psi), {}, {}, 0.0, std::nullopt};
  const StateVector unit = normalized(psi);
  for (int a = 0; a < dims; ++a) {
    row.mean_x.push_back(mean_position(unit, a));
    row.mean_p.push_back(mean_momentum(unit, a));
  }
  row.energy = h.expectation(unit);
  if (reference) row.fidelity = std::max(0.0, fidelity_defect(reference(t), unit));
  return row;
}

}  // namespace

void EvolutionConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("EvolutionConfig: dt must be positive");
  if (steps < 0) throw std::invalid_argument("EvolutionConfig: steps must be >= 0");
  if (record_every < 1) throw std::invalid_argument("EvolutionConfig: record_every must be >= 1");
}

Evolution evolve(const StateVector& psi0, const EffectiveHamiltonian& h, const EvolutionConfig& cfg,
                 const Reference& reference) {
  cfg.validate();
  const GridSpace& g = psi0.space();
  const int dims = g.dims();
  const bool rotating = h.rotation_rate != 0.0;
  if (rotating && dims != 2) throw DimensionError("evolve: a rotating Hamiltonian needs a 2D grid");
  std::vector<double> shift(static_cast<std::size_t>(dims), 0.0);
  if (!h.momentum_shift.empty()) {
    if (static_cast<int>(h.momentum_shift.size()) != dims)
      throw DimensionError("evolve: one momentum shift per axis expected");
    shift = h.momentum_shift;
  }
  bool shifted = false;
  for (double s : shift) shifted = shifted || s != 0.0;
  if (rotating && shifted)
    throw std::invalid_argument("evolve: constant momentum shift and rotation cannot be combined");
  require_admissible(psi0, "evolve");

  const double m = h.mass;
  const double mw2 = 0.5 * m * h.rotation_rate * h.rotation_rate;
  // exp(-i V dt/2) in position space, precomputed.
  Amplitudes half_v(static_cast<Eigen::Index>(g.size()));
  Amplitudes kinetic(static_cast<Eigen::Index>(g.size()));
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto [i0, i1] = g.unflatten(f);
    const double x1 = g.x(i0), x2 = dims == 2 ? g.x(i1) : 0.0;
    double v = h.potential ? h.potential(x1, x2) : 0.0;
    v += h.constant_offset;
    if (rotating) v += mw2 * (x1 * x1 + x2 * x2);
    half_v[static_cast<Eigen::Index>(f)] = std::polar(1.0, -0.5 * cfg.dt * v);
    double k2 = (g.k(i0) + shift[0]) * (g.k(i0) + shift[0]);
    if (dims == 2) k2 += (g.k(i1) + shift[1]) * (g.k(i1) + shift[1]);
    kinetic[static_cast<Eigen::Index>(f)] = std::polar(1.0, -cfg.dt * k2 / (2.0 * m));
  }

  Evolution out{in_rep(psi0, Rep::Position), {dims, {}}};
  out.trace.rows.push_back(observe(out.state, 0.0, h, reference));
  const Admissibility adm;
  for (int step = 1; step <= cfg.steps; ++step) {
    StateVector& psi = out.state;
    psi = multiply_in(psi, Rep::Position, [&](std::size_t f) { return half_v[static_cast<Eigen::Index>(f)]; });
    psi = multiply_in(psi, Rep::Momentum, [&](std::size_t f) { return kinetic[static_cast<Eigen::Index>(f)]; });
    try {
      if (rotating) psi = rotate(psi, -h.rotation_rate * cfg.dt, adm);
    } catch (const SupportError& e) {
      throw EvolutionError(std::string("evolve: step ") + std::to_string(step) + ": " + e.what(), step);
    }
    psi = multiply_in(psi, Rep::Position, [&](std::size_t f) { return half_v[static_cast<Eigen::Index>(f)]; });

    const double edge = edge_mass(psi, Rep::Position, adm);
    if (edge > adm.max_edge_mass) {
      std::ostringstream msg;
      msg << "evolve: step " << step << " (t = " << step * cfg.dt << "): edge mass " << edge
          << " exceeds " << adm.max_edge_mass;
      throw EvolutionError(msg.str(), step);
    }
    if (step % cfg.record_every == 0 || step == cfg.steps) {
      const double momentum_edge = edge_mass(psi, Rep::Momentum, adm);
      if (momentum_edge > adm.max_edge_mass) {
        std::ostringstream msg;
        msg << "evolve: step " << step << ": momentum edge mass " << momentum_edge << " exceeds "
            << adm.max_edge_mass;
        throw EvolutionError(msg.str(), step);
      }
      out.trace.rows.push_back(observe(psi, step * cfg.dt, h, reference));
    }
  }
  return out;
}

StateVector accelerated_frame_map(const StateVector& psi, double t, double g, PhaseSign sign) {
  if (psi.space().dims() != 1) throw DimensionError("accelerated_frame_map: 1D only");
  const double s = sign == PhaseSign::Correct ? 1.0 : -1.0;
  const double m = psi.space().mass();
  const StateVector moved = space_translate(psi, -0.5 * g * t * t);
  // boost(eta) multiplies by exp(-i m eta x); eta = -s g t gives exp(i s m g t x).
  const StateVector phased = boost(moved, -s * g * t);
  return std::polar(1.0, -s * m * g * g * t * t * t / 6.0) * phased;
}

EffectiveHamiltonian uniform_field(double mass, double g) {
  EffectiveHamiltonian h;
  h.mass = mass;
  h.momentum_shift = {0.0};
  h.potential = [mass, g](double x, double) { return -mass * g * x; };
  return h;
}

EquivalenceResult equivalence_check(const StateVector& psi0, double g, double duration,
                                    const EvolutionConfig& cfg, PhaseSign sign) {
  cfg.validate();
  if (psi0.space().dims() != 1) throw DimensionError("equivalence_check: 1D only");
  EvolutionConfig run = cfg;
  run.steps = static_cast<int>(std::lround(duration / cfg.dt));
  run.record_every = std::max(1, run.steps);
  const double m = psi0.space().mass();
  const double t = run.duration();
  const Evolution free = evolve(psi0, free_hamiltonian(1, m), run);
  const Evolution field = evolve(psi0, uniform_field(m, g), run);
  StateVector mapped = accelerated_frame_map(free.state, t, g, sign);
  const double defect = 1.0 - std::abs(inner(normalized(mapped), normalized(field.state)));
  return {std::max(defect, 0.0), std::move(mapped), field.state};
}

}  // namespace hbundle
