#pragma once

// The flat connection w = U dU^-1 of the 1D Galilei chart, U = U_-t U_-x U_-v,
// evaluated on states. Closed form:
//   w_t = -i H,  w_x = i P,  w_v = -i m (X(t) - x),  X(t) = U_t^dag X U_t.

#include <functional>
#include <utility>

#include "hbundle/galilei.hpp"

namespace hbundle {

enum class Direction { T, X, V };

const char* to_string(Direction d);

using FrameCoord = GalileiCoord;

struct ConnectionComponent {
  Direction direction;
  FrameCoord coord;
  std::function<StateVector(const StateVector&)> action;

  StateVector operator()(const StateVector& psi) const { return action(psi); }
};

/// U_t^dag X U_t psi, by conjugating with free evolution.
StateVector heisenberg_position(const StateVector& psi, double t);

/// U(c) d_mu[U(c)^-1] psi by central differences of step h, optionally
/// Richardson-extrapolated from steps h and h/2.
StateVector numeric_connection(Direction mu, const FrameCoord& coord, const StateVector& psi,
                               double h = 1e-3, bool richardson = false);

ConnectionComponent analytic_connection(Direction mu, const FrameCoord& coord);

enum class CurvatureMethod {
  // Closed-form components, coordinate derivatives by central differences.
  Analytic,
  // Components from numeric_connection, then the same derivatives. Its
  // residual carries the O(h^2) truncation of both stages.
  Numeric,
};

/// (d_mu w_nu - d_nu w_mu + [w_mu, w_nu]) psi for mu != nu.
StateVector curvature_residual(Direction mu, Direction nu, const FrameCoord& coord,
                               const StateVector& psi, double h = 1e-3,
                               CurvatureMethod method = CurvatureMethod::Analytic);

/// Natural size of each pair's terms: |H psi| for (t,x), |P psi / m| for
/// (t,v), |psi| for (x,v).
double curvature_scale(Direction mu, Direction nu, const StateVector& psi);

/// <psi|(XP - PX)|psi> / <psi|psi>. With check_admissible = false the state
/// is used as given, which shows how the periodic boundary breaks the relation.
cplx ccr_expectation(const StateVector& psi, bool check_admissible = true);

/// Gaussian centred on the periodic seam x = -L/2 = L/2; deliberately
/// inadmissible, for diagnostics.
StateVector seam_packet(const GridPtr& space, double sigma);

}  // namespace hbundle
