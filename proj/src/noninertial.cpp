#include "hbundle/noninertial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace hbundle {

namespace {

constexpr cplx I{0.0, 1.0};

OperatorTag momentum_tag(int dims, int axis) {
  if (dims == 1) return OperatorTag::P;
  return axis == 0 ? OperatorTag::P1 : OperatorTag::P2;
}

void check_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw std::invalid_argument(std::string("FrameCurve: ") + what + " must be finite");
}

}  // namespace

FrameCurve::FrameCurve(Kind kind, double g, double omega, double radius, Order order)
    : kind_(kind), g_(g), omega_(omega), radius_(radius), order_(order) {}

FrameCurve FrameCurve::linear_accel(double g, Order order) {
  check_finite(g, "g");
  return FrameCurve(Kind::LinearAccel, g, 0.0, 0.0, order);
}

FrameCurve FrameCurve::circular(double omega, double radius) {
  check_finite(omega, "omega");
  check_finite(radius, "radius");
  if (radius < 0.0) throw std::invalid_argument("FrameCurve: radius must be >= 0");
  return FrameCurve(Kind::Circular, 0.0, omega, radius, Order::Chart);
}

GalileiCoord FrameCurve::linear_coord(double t) const {
  if (kind_ != Kind::LinearAccel) throw std::logic_error("FrameCurve: not a linear-acceleration curve");
  return {t, 0.5 * g_ * t * t, g_ * t};
}

RotatingCoord FrameCurve::circular_coord(double t) const {
  if (kind_ != Kind::Circular) throw std::logic_error("FrameCurve: not a circular curve");
  return {t, radius_, omega_ * t, radius_ * omega_};
}

std::vector<double> FrameCurve::velocity(double t) const {
  if (kind_ == Kind::LinearAccel) return {g_ * t};
  const double theta = omega_ * t;
  return {-radius_ * omega_ * std::sin(theta), radius_ * omega_ * std::cos(theta)};
}

std::vector<double> FrameCurve::position(double t) const {
  if (kind_ == Kind::LinearAccel) return {0.5 * g_ * t * t};
  const double theta = omega_ * t;
  return {radius_ * std::cos(theta), radius_ * std::sin(theta)};
}

GroupWord FrameCurve::word(double t) const {
  if (kind_ == Kind::Circular) return rotating_word(circular_coord(t));
  const GalileiCoord c = linear_coord(t);
  if (order_ == Order::Chart)
    return {{FactorKind::Boost, -c.v, 0}, {FactorKind::SpaceTranslate, -c.x, 0}, {FactorKind::TimeTranslate, t, 0}};
  return {{FactorKind::TimeTranslate, t, 0}, {FactorKind::SpaceTranslate, -c.x, 0}, {FactorKind::Boost, -c.v, 0}};
}

std::string FrameCurve::describe() const {
  std::ostringstream out;
  if (kind_ == Kind::LinearAccel)
    out << "linear-accel(g=" << g_ << ", order=" << (order_ == Order::Chart ? "U_-v U_-x U_t" : "U_t U_-x U_-v") << ")";
  else
    out << "circular(omega=" << omega_ << ", r=" << radius_ << ")";
  return out.str();
}

// ---------------------------------------------------------------------------

StateVector EffectiveHamiltonian::apply_kinetic(const StateVector& psi) const {
  const GridSpace& g = psi.space();
  const int dims = g.dims();
  if (!momentum_shift.empty() && static_cast<int>(momentum_shift.size()) != dims)
    throw DimensionError("EffectiveHamiltonian: one momentum shift per axis expected");
  if (rotation_rate != 0.0 && dims != 2) throw DimensionError("EffectiveHamiltonian: rotation needs 2D");
  const double mw = mass * rotation_rate;

  StateVector out = zero_state(psi.space_ptr(), Rep::Position);
  for (int axis = 0; axis < dims; ++axis) {
    const double shift = momentum_shift.empty() ? 0.0 : momentum_shift[static_cast<std::size_t>(axis)];
    auto covariant = [&](const StateVector& s) {
      StateVector r = hbundle::apply(momentum_tag(dims, axis), s);
      if (shift != 0.0) r += shift * s;
      if (mw != 0.0) {
        r += multiply_in(s, Rep::Position, [&](std::size_t f) {
          const auto [i0, i1] = g.unflatten(f);
          return cplx(axis == 0 ? mw * g.x(i1) : -mw * g.x(i0), 0.0);
        });
      }
      return r;
    };
    out += in_rep(covariant(covariant(psi)), Rep::Position);
  }
  out *= cplx(0.5 / mass, 0.0);
  return in_rep(out, psi.rep());
}

StateVector EffectiveHamiltonian::apply(const StateVector& psi) const {
  StateVector out = apply_kinetic(psi);
  const GridSpace& g = psi.space();
  if (potential) {
    out += multiply_in(psi, Rep::Position, [&](std::size_t f) {
      const auto [i0, i1] = g.unflatten(f);
      return cplx(potential(g.x(i0), g.dims() == 2 ? g.x(i1) : 0.0), 0.0);
    });
  }
  if (constant_offset != 0.0) out += constant_offset * psi;
  return out;
}

double EffectiveHamiltonian::expectation(const StateVector& psi) const {
  return (inner(psi, apply(psi)) / inner(psi, psi)).real();
}

Action EffectiveHamiltonian::action() const {
  EffectiveHamiltonian self = *this;
  return [self](const StateVector& psi) { return self.apply(psi); };
}

EffectiveHamiltonian free_hamiltonian(int dims, double mass) {
  EffectiveHamiltonian h;
  h.mass = mass;
  h.momentum_shift.assign(static_cast<std::size_t>(dims), 0.0);
  return h;
}

StateVector numeric_effective_hamiltonian(const FrameCurve& curve, double t, const StateVector& psi, double h,
                                          bool richardson) {
  if (psi.space().dims() != curve.dims()) throw DimensionError("numeric_effective_hamiltonian: grid dimension does not match the curve");
  if (!(h > 0.0)) throw std::invalid_argument("numeric_effective_hamiltonian: h must be positive");
  require_admissible(psi, "numeric_effective_hamiltonian");
  const StateVector base = transport(psi, curve.word(t).inverse());
  auto central = [&](double step) {
    const StateVector plus = transport(base, curve.word(t + step));
    const StateVector minus = transport(base, curve.word(t - step));
    return (I * (0.5 / step)) * (plus - minus);
  };
  if (!richardson) return central(h);
  return (1.0 / 3.0) * (4.0 * central(0.5 * h) - central(h));
}

EffectiveHamiltonian analytic_effective_hamiltonian(const FrameCurve& curve, double t, double mass) {
  EffectiveHamiltonian h;
  h.mass = mass;
  if (curve.kind() == FrameCurve::Kind::LinearAccel) {
    const GalileiCoord c = curve.linear_coord(t);
    const double g = curve.g();
    if (curve.order() == FrameCurve::Order::Chart) {
      h.momentum_shift = {0.0};
      const double x = c.x;
      h.potential = [mass, g, x](double x1, double) { return -mass * g * (x1 + x); };
    } else {
      // P^2/2m + 2 v P - m g X + m v^2 / 2, written as (P + 2 m v)^2 / 2m + ...
      h.momentum_shift = {2.0 * mass * c.v};
      h.potential = [mass, g](double x1, double) { return -mass * g * x1; };
      h.constant_offset = -1.5 * mass * c.v * c.v;
    }
    return h;
  }
  const double w = curve.omega(), r = curve.radius();
  h.momentum_shift = {0.0, 0.0};
  h.rotation_rate = w;
  h.potential = [mass, w, r](double x1, double x2) {
    return -0.5 * mass * w * w * ((x1 + r) * (x1 + r) + x2 * x2);
  };
  return h;
}

// ---------------------------------------------------------------------------

ModIdentity compare_mod_identity(const Action& a, const Action& b, const std::vector<StateVector>& states) {
  if (states.size() < 2) throw std::invalid_argument("compare_mod_identity: needs at least two states");
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXcd gram(n, n);
  std::vector<StateVector> unit;
  for (const auto& s : states) {
    require_admissible(s, "compare_mod_identity");
    unit.push_back(normalized(s));
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      gram(i, j) = inner(unit[static_cast<std::size_t>(i)], unit[static_cast<std::size_t>(j)]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  if ((eig.eigenvalues().array() > 1e-10).count() < 2)
    throw std::invalid_argument("compare_mod_identity: states span fewer than two dimensions");

  std::vector<Amplitudes> diff, psi;
  std::vector<double> best;
  for (const auto& u : unit) {
    const StateVector d = in_rep(b(u) - a(u), Rep::Position);
    const StateVector p = in_rep(u, Rep::Position);
    best.push_back(inner(p, d).real());
    diff.push_back(d.amplitudes());
    psi.push_back(p.amplitudes());
  }
  // Position-space norm weight sqrt(dx^dims).
  const GridSpace& g = unit.front().space();
  const double scale_x = std::sqrt(std::pow(g.dx(), g.dims()));
  auto worst = [&](double c) {
    double w = 0.0;
    for (std::size_t k = 0; k < diff.size(); ++k)
      w = std::max(w, (diff[k] - c * psi[k]).matrix().norm() * scale_x);
    return w;
  };

  // The objective is convex in c and minimized between the per-state optima.
  double lo = *std::min_element(best.begin(), best.end());
  double hi = *std::max_element(best.begin(), best.end());
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
  double f1 = worst(x1), f2 = worst(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    if (f1 < f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = worst(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = worst(x2);
    }
  }
  const double c = 0.5 * (lo + hi);
  return {worst(c), c};
}

double hermiticity_defect(const Action& a, const std::vector<StateVector>& states) {
  std::vector<StateVector> images;
  for (const auto& s : states) images.push_back(a(s));
  double out = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = 0; j < states.size(); ++j)
      out = std::max(out, std::abs(inner(states[i], images[j]) - inner(images[i], states[j])));
  return out;
}

double expectation_slope(const Action& a, const GridPtr& space, double center, double delta, int axis, double sigma) {
  if (axis < 0 || axis >= space->dims()) throw DimensionError("expectation_slope: bad axis");
  auto at = [&](double pos) {
    std::vector<double> cx(static_cast<std::size_t>(space->dims()), 0.0);
    std::vector<double> ck(cx.size(), 0.0);
    cx[static_cast<std::size_t>(axis)] = pos;
    const StateVector psi = gaussian(space, cx, ck, sigma);
    return inner(psi, a(psi)).real();
  };
  return (at(center + delta) - at(center - delta)) / (2.0 * delta);
}

}  // namespace hbundle
