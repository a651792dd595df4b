#include "hbundle/galilei.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "hbundle/fft.hpp"

namespace hbundle {

namespace {

void check_axis(const GridSpace& g, int axis, const char* what) {
  if (axis < 0 || axis >= g.dims()) {
    std::ostringstream msg;
    msg << what << ": axis " << axis << " invalid on a " << g.dims() << "D grid";
    throw DimensionError(msg.str());
  }
}

void reject_overflow(double outside, const Admissibility& adm, const std::string& what) {
  if (outside > adm.max_edge_mass) {
    std::ostringstream msg;
    msg << what << ": " << outside << " of the probability would leave the grid window";
    throw SupportError(msg.str());
  }
}

// Shear of a 2D position-space array: every line along `axis` is translated
// by shift * (coordinate along the other axis), psi(x_a) -> psi(x_a - d).
void shear(Amplitudes& data, const GridSpace& g, int axis, double shift) {
  const int n = g.points();
  fft::transform_axis(data, 2, n, axis, fft::Direction::Forward);
  const double inv_n = 1.0 / n;
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto idx = g.unflatten(f);
    const int along = idx[static_cast<std::size_t>(axis)];
    const int across = idx[static_cast<std::size_t>(1 - axis)];
    const double d = shift * g.x(across);
    data[static_cast<Eigen::Index>(f)] *= std::polar(inv_n, -g.k(along) * d);
  }
  fft::transform_axis(data, 2, n, axis, fft::Direction::Backward);
}

double mass_outside_disk(const StateVector& pos, double radius) {
  const GridSpace& g = pos.space();
  const Amplitudes& a = pos.amplitudes();
  double outside = 0.0;
  const double total = a.abs2().sum();
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto [i0, i1] = g.unflatten(f);
    const double r2 = g.x(i0) * g.x(i0) + g.x(i1) * g.x(i1);
    if (r2 > radius * radius) outside += std::norm(a[static_cast<Eigen::Index>(f)]);
  }
  return total == 0.0 ? 0.0 : outside / total;
}

}  // namespace

StateVector time_translate(const StateVector& state, double tau) {
  if (tau == 0.0) return state;
  const GridSpace& g = state.space();
  const double rate = -tau * 0.5 / g.mass();
  return multiply_in(state, Rep::Momentum, [&](std::size_t f) {
    const auto [j0, j1] = g.unflatten(f);
    double k2 = g.k(j0) * g.k(j0);
    if (g.dims() == 2) k2 += g.k(j1) * g.k(j1);
    return std::polar(1.0, rate * k2);
  });
}

StateVector space_translate(const StateVector& state, double zeta, int axis,
                            const Admissibility& adm) {
  const GridSpace& g = state.space();
  check_axis(g, axis, "space_translate");
  if (zeta == 0.0) return state;
  // Content at x moves to x - zeta.
  const double lo = -0.5 * g.extent() + adm.edge_points * g.dx();
  const double hi = 0.5 * g.extent() - (adm.edge_points + 1) * g.dx();
  reject_overflow(mass_outside(state, Rep::Position, axis, lo + zeta, hi + zeta), adm,
                  "space_translate");
  return multiply_in(state, Rep::Momentum, [&](std::size_t f) {
    return std::polar(1.0, g.k(g.unflatten(f)[static_cast<std::size_t>(axis)]) * zeta);
  });
}

StateVector boost(const StateVector& state, double eta, int axis, const Admissibility& adm) {
  const GridSpace& g = state.space();
  check_axis(g, axis, "boost");
  if (eta == 0.0) return state;
  const double shift = g.mass() * eta;
  const double lo = -g.k_max() + adm.edge_points * g.dk();
  const double hi = g.k_max() - (adm.edge_points + 1) * g.dk();
  reject_overflow(mass_outside(state, Rep::Momentum, axis, lo + shift, hi + shift), adm, "boost");
  return multiply_in(state, Rep::Position, [&](std::size_t f) {
    return std::polar(1.0, -shift * g.x(g.unflatten(f)[static_cast<std::size_t>(axis)]));
  });
}

StateVector rotate(const StateVector& state, double theta, const Admissibility& adm) {
  const GridSpace& g = state.space();
  if (g.dims() != 2) throw DimensionError("rotate: needs a 2D grid");
  if (theta == 0.0) return state;
  StateVector pos = in_rep(state, Rep::Position);
  const double disk = 0.5 * g.extent() - adm.edge_points * g.dx();
  reject_overflow(mass_outside_disk(pos, disk), adm, "rotate");

  const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(theta) / (0.5 * std::numbers::pi))));
  const double step = theta / pieces;
  const double tan_half = std::tan(0.5 * step);
  const double sin_full = std::sin(step);

  // R(a) = [[1,-t],[0,1]] [[1,0],[s,1]] [[1,-t],[0,1]] with t = tan(a/2),
  // s = sin(a); (R psi)(x) = psi(R^-1 x).
  Amplitudes data = pos.amplitudes();
  for (int p = 0; p < pieces; ++p) {
    shear(data, g, 0, -tan_half);
    shear(data, g, 1, sin_full);
    shear(data, g, 0, -tan_half);
  }
  return in_rep(StateVector(state.space_ptr(), std::move(data), Rep::Position), state.rep());
}

// ---------------------------------------------------------------------------

const char* to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::TimeTranslate: return "T";
    case FactorKind::SpaceTranslate: return "S";
    case FactorKind::Boost: return "B";
    case FactorKind::Rotate: return "R";
  }
  return "?";
}

GroupWord GroupWord::inverse() const {
  std::vector<Factor> out(factors_.rbegin(), factors_.rend());
  for (auto& f : out) f.parameter = -f.parameter;
  return GroupWord(std::move(out));
}

GroupWord operator*(const GroupWord& a, const GroupWord& b) {
  std::vector<Factor> out = a.factors_;
  out.insert(out.end(), b.factors_.begin(), b.factors_.end());
  return GroupWord(std::move(out));
}

std::string GroupWord::describe() const {
  std::ostringstream out;
  for (const auto& f : factors_) {
    out << to_string(f.kind);
    if (f.kind == FactorKind::SpaceTranslate || f.kind == FactorKind::Boost) out << f.axis + 1;
    out << "(" << f.parameter << ")";
  }
  return out.str();
}

StateVector apply_factor(const StateVector& state, const Factor& factor, const Admissibility& adm) {
  switch (factor.kind) {
    case FactorKind::TimeTranslate: return time_translate(state, factor.parameter);
    case FactorKind::SpaceTranslate: return space_translate(state, factor.parameter, factor.axis, adm);
    case FactorKind::Boost: return boost(state, factor.parameter, factor.axis, adm);
    case FactorKind::Rotate: return rotate(state, -factor.parameter, adm);
  }
  throw std::invalid_argument("apply_factor: unknown factor kind");
}

StateVector transport(const StateVector& state, const GroupWord& word, const Admissibility& adm) {
  StateVector out = state;
  const auto& factors = word.factors();
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
    out = apply_factor(out, *it, adm);
    if (it->kind == FactorKind::TimeTranslate && it->parameter != 0.0) {
      const double edge = edge_mass(out, Rep::Position, adm);
      if (edge > adm.max_edge_mass) {
        std::ostringstream msg;
        msg << "transport: time translation by " << it->parameter
            << " spreads the packet into the grid edge (edge mass " << edge << ")";
        throw SupportError(msg.str());
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void validate(const GalileiCoord& c) {
  if (!std::isfinite(c.t) || !std::isfinite(c.x) || !std::isfinite(c.v))
    throw std::invalid_argument("GalileiCoord: coordinates must be finite");
}

void validate(const RotatingCoord& c) {
  if (!std::isfinite(c.t) || !std::isfinite(c.radius) || !std::isfinite(c.theta) ||
      !std::isfinite(c.v))
    throw std::invalid_argument("RotatingCoord: coordinates must be finite");
  if (c.radius < 0.0) throw std::invalid_argument("RotatingCoord: radius must be >= 0");
}

GroupWord section_word(const GalileiCoord& c) {
  validate(c);
  return {{FactorKind::TimeTranslate, -c.t, 0},
          {FactorKind::SpaceTranslate, -c.x, 0},
          {FactorKind::Boost, -c.v, 0}};
}

GroupWord rotating_word(const RotatingCoord& c) {
  validate(c);
  return {{FactorKind::Boost, c.v, 1},
          {FactorKind::Rotate, c.theta, 0},
          {FactorKind::SpaceTranslate, c.radius * std::cos(c.theta), 0},
          {FactorKind::SpaceTranslate, c.radius * std::sin(c.theta), 1},
          {FactorKind::TimeTranslate, c.t, 0}};
}

}  // namespace hbundle
