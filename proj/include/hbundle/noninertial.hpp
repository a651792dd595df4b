#pragma once

// Curves of frames (uniform linear acceleration, uniform rotation) and the
// Hamiltonians i (dU/dt) U^-1 they induce.

#include <functional>
#include <string>
#include <vector>

#include "hbundle/galilei.hpp"

namespace hbundle {

using Action = std::function<StateVector(const StateVector&)>;

class FrameCurve {
 public:
  enum class Kind { LinearAccel, Circular };

  // Factor order of the linear-acceleration word. Chart: U_-v U_-x U_t,
  // the order of the parallel section with the chart's coordinate signs.
  // Reversed: U_t U_-x U_-v, kept for comparison.
  enum class Order { Chart, Reversed };

  static FrameCurve linear_accel(double g, Order order = Order::Chart);
  static FrameCurve circular(double omega, double radius);

  Kind kind() const { return kind_; }
  Order order() const { return order_; }
  double g() const { return g_; }
  double omega() const { return omega_; }
  double radius() const { return radius_; }
  int dims() const { return kind_ == Kind::LinearAccel ? 1 : 2; }

  /// x = g t^2 / 2, v = g t.
  GalileiCoord linear_coord(double t) const;
  /// theta = omega t, speed r omega.
  RotatingCoord circular_coord(double t) const;
  /// Frame velocity: (v) or (-r omega sin theta, r omega cos theta).
  std::vector<double> velocity(double t) const;
  /// Frame position: (x) or (r cos theta, r sin theta).
  std::vector<double> position(double t) const;

  GroupWord word(double t) const;
  std::string describe() const;

 private:
  FrameCurve(Kind kind, double g, double omega, double radius, Order order);

  Kind kind_;
  double g_ = 0.0;
  double omega_ = 0.0;
  double radius_ = 0.0;
  Order order_ = Order::Chart;
};

/// sum_i (P_i + shift_i + A_i(X))^2 / 2m + V(X) + offset, where the
/// position-dependent part of the shift is the rotating-frame gauge term
/// A = (m omega X2, -m omega X1).
struct EffectiveHamiltonian {
  double mass = 1.0;
  std::vector<double> momentum_shift;  // one entry per axis
  double rotation_rate = 0.0;
  std::function<double(double x1, double x2)> potential;  // x2 = 0 in 1D
  double constant_offset = 0.0;

  StateVector apply(const StateVector& psi) const;
  /// The shifted kinetic term alone.
  StateVector apply_kinetic(const StateVector& psi) const;
  double expectation(const StateVector& psi) const;
  Action action() const;
};

EffectiveHamiltonian free_hamiltonian(int dims, double mass);

/// i [U(t+h) - U(t-h)] U(t)^-1 psi / 2h with U the curve's transport word,
/// optionally Richardson-extrapolated from steps h and h/2.
StateVector numeric_effective_hamiltonian(const FrameCurve& curve, double t, const StateVector& psi,
                                          double h = 1e-3, bool richardson = false);

/// Closed forms. LinearAccel (chart order): P^2/2m - m g (X + x(t)).
/// Circular: ((P1 + m w X2)^2 + (P2 - m w X1)^2)/2m - m w^2 ((X1 + r)^2 + X2^2)/2.
/// Reversed linear order: (P + 2 m v)^2/2m - m g X - 3 m v^2/2.
EffectiveHamiltonian analytic_effective_hamiltonian(const FrameCurve& curve, double t, double mass);

struct ModIdentity {
  double residual;  // min over c of max over states of |(A + c - B) psi| / |psi|
  double offset;    // the minimizing c: B - A as a multiple of the identity
};

/// Requires at least two linearly independent states.
ModIdentity compare_mod_identity(const Action& a, const Action& b, const std::vector<StateVector>& states);

/// max over pairs |<phi|A psi> - <A phi|psi>|.
double hermiticity_defect(const Action& a, const std::vector<StateVector>& states);

/// d<A>/da along `axis` from Gaussians centred at a +- delta (other axes at 0),
/// by a central difference of expectation values.
double expectation_slope(const Action& a, const GridPtr& space, double center, double delta,
                         int axis = 0, double sigma = 1.0);

}  // namespace hbundle
