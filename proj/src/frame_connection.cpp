#include "hbundle/frame_connection.hpp"

#include <cmath>
#include <stdexcept>

namespace hbundle {

namespace {

constexpr cplx I{0.0, 1.0};

void require_1d(const StateVector& psi, const char* what) {
  if (psi.space().dims() != 1) throw DimensionError(std::string(what) + ": the Galilei chart is 1D");
}

void check_step(double h, const char* what) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument(std::string(what) + ": h must be positive");
}

FrameCoord moved(FrameCoord c, Direction d, double by) {
  switch (d) {
    case Direction::T: c.t += by; break;
    case Direction::X: c.x += by; break;
    case Direction::V: c.v += by; break;
  }
  return c;
}

StateVector numeric_component(Direction mu, const FrameCoord& c, const StateVector& psi, double h) {
  const StateVector plus = transport(psi, section_word(moved(c, mu, h)).inverse());
  const StateVector minus = transport(psi, section_word(moved(c, mu, -h)).inverse());
  const GroupWord u = section_word(c);
  return (0.5 / h) * (transport(plus, u) - transport(minus, u));
}

using Component = std::function<StateVector(Direction, const FrameCoord&, const StateVector&)>;

}  // namespace

const char* to_string(Direction d) {
  switch (d) {
    case Direction::T: return "t";
    case Direction::X: return "x";
    case Direction::V: return "v";
  }
  return "?";
}

StateVector heisenberg_position(const StateVector& psi, double t) {
  return time_translate(apply(OperatorTag::X, time_translate(psi, t)), -t);
}

StateVector numeric_connection(Direction mu, const FrameCoord& coord, const StateVector& psi,
                               double h, bool richardson) {
  require_1d(psi, "numeric_connection");
  check_step(h, "numeric_connection");
  validate(coord);
  require_admissible(psi, "numeric_connection");
  const StateVector coarse = numeric_component(mu, coord, psi, h);
  if (!richardson) return coarse;
  const StateVector fine = numeric_component(mu, coord, psi, 0.5 * h);
  return (1.0 / 3.0) * (4.0 * fine - coarse);
}

ConnectionComponent analytic_connection(Direction mu, const FrameCoord& coord) {
  validate(coord);
  switch (mu) {
    case Direction::T:
      return {mu, coord, [](const StateVector& psi) { return -I * apply(OperatorTag::Hfree, psi); }};
    case Direction::X:
      return {mu, coord, [](const StateVector& psi) { return I * apply(OperatorTag::P, psi); }};
    case Direction::V:
      return {mu, coord, [coord](const StateVector& psi) {
                require_1d(psi, "analytic_connection");
                const double m = psi.space().mass();
                return (-I * m) * (heisenberg_position(psi, coord.t) - coord.x * psi);
              }};
  }
  throw std::invalid_argument("analytic_connection: unknown direction");
}

StateVector curvature_residual(Direction mu, Direction nu, const FrameCoord& coord,
                               const StateVector& psi, double h, CurvatureMethod method) {
  if (mu == nu) throw std::invalid_argument("curvature_residual: directions must differ");
  require_1d(psi, "curvature_residual");
  check_step(h, "curvature_residual");
  validate(coord);
  require_admissible(psi, "curvature_residual");

  Component w;
  if (method == CurvatureMethod::Analytic)
    w = [](Direction d, const FrameCoord& c, const StateVector& s) { return analytic_connection(d, c)(s); };
  else
    w = [h](Direction d, const FrameCoord& c, const StateVector& s) { return numeric_component(d, c, s, h); };

  auto derivative = [&](Direction along, Direction comp) {
    return (0.5 / h) * (w(comp, moved(coord, along, h), psi) - w(comp, moved(coord, along, -h), psi));
  };
  const StateVector wnu = w(nu, coord, psi);
  const StateVector wmu = w(mu, coord, psi);
  return derivative(mu, nu) - derivative(nu, mu) + w(mu, coord, wnu) - w(nu, coord, wmu);
}

double curvature_scale(Direction mu, Direction nu, const StateVector& psi) {
  auto has = [&](Direction d) { return mu == d || nu == d; };
  if (mu == nu) throw std::invalid_argument("curvature_scale: directions must differ");
  if (has(Direction::T) && has(Direction::X)) return norm(apply(OperatorTag::Hfree, psi));
  if (has(Direction::T) && has(Direction::V)) return norm(apply(OperatorTag::P, psi)) / psi.space().mass();
  return norm(psi);
}

cplx ccr_expectation(const StateVector& psi, bool check_admissible) {
  require_1d(psi, "ccr_expectation");
  if (check_admissible) require_admissible(psi, "ccr_expectation");
  const StateVector xp = apply(OperatorTag::X, apply(OperatorTag::P, psi));
  const StateVector px = apply(OperatorTag::P, apply(OperatorTag::X, psi));
  return inner(psi, xp - px) / inner(psi, psi);
}

StateVector seam_packet(const GridPtr& space, double sigma) {
  if (space->dims() != 1) throw DimensionError("seam_packet: 1D only");
  const double length = space->extent();
  Amplitudes a(space->points());
  for (int i = 0; i < space->points(); ++i) {
    const double d = std::remainder(space->x(i) + 0.5 * length, length);
    a[i] = std::exp(-0.5 * d * d / (sigma * sigma));
  }
  return normalized(StateVector(space, std::move(a), Rep::Position));
}

}  // namespace hbundle
