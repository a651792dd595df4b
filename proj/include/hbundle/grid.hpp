#pragma once

// Discretized position/momentum Hilbert spaces on periodic 1D and 2D grids.
//
// Units: hbar = c = 1. Position samples sit at x_i = -L/2 + i dx, momenta in
// FFT order mapped to signed values in [-pi N/L, pi N/L). Amplitudes in the
// momentum representation approximate the continuum transform
//
//     psi~(k) = (2 pi)^(-1/2) \int psi(x) exp(-i k x) dx
//
// so that sums weighted by dx^dims (position) or dk^dims (momentum)
// approximate continuum integrals directly.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hbundle {

using cplx = std::complex<double>;
using Amplitudes = Eigen::ArrayXcd;

enum class Rep { Position, Momentum };

const char* to_string(Rep rep);

class GridSpace {
public:
  GridSpace(int dims, int points, double extent, double mass);

  int dims() const { return dims_; }
  int points() const { return points_; }
  double extent() const { return extent_; }
  double mass() const { return mass_; }
  double dx() const { return dx_; }
  double dk() const { return dk_; }
  /// Half-width of the momentum window, pi N / L.
  double k_max() const;
  std::size_t size() const { return size_; }

  double x(int i) const { return x_[static_cast<std::size_t>(i)]; }
  double k(int j) const { return k_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& x_samples() const { return x_; }
  const std::vector<double>& k_samples() const { return k_; }

  /// Per-axis grid indices of a flat (row-major, axis 0 slowest) index.
  std::array<int, 2> unflatten(std::size_t flat) const;

  // exp(-i k_j x_0) with x_0 = -L/2; the offset between the DFT and the
  // continuum transform of a grid that starts at -L/2.
  const std::vector<cplx>& origin_phase() const { return origin_phase_; }

  bool operator==(const GridSpace& other) const;

private:
  int dims_;
  int points_;
  double extent_;
  double mass_;
  double dx_;
  double dk_;
  std::size_t size_;
  std::vector<double> x_;
  std::vector<double> k_;
  std::vector<cplx> origin_phase_;
};

using GridPtr = std::shared_ptr<const GridSpace>;

/// Rejects dims outside {1,2}, N < 8, and nonpositive extent or mass.
GridPtr make_grid(int dims, int points, double extent, double mass);

class StateVector {
public:
  StateVector(GridPtr space, Amplitudes amplitudes, Rep rep);

  const GridSpace& space() const { return *space_; }
  const GridPtr& space_ptr() const { return space_; }
  Rep rep() const { return rep_; }
  const Amplitudes& amplitudes() const { return amplitudes_; }

  StateVector& operator+=(const StateVector& other);
  StateVector& operator-=(const StateVector& other);
  StateVector& operator*=(cplx factor);

private:
  GridPtr space_;
  Amplitudes amplitudes_;
  Rep rep_;
};

StateVector operator+(StateVector lhs, const StateVector& rhs);
StateVector operator-(StateVector lhs, const StateVector& rhs);
StateVector operator*(cplx factor, StateVector state);
StateVector operator*(double factor, StateVector state);

StateVector zero_state(const GridPtr& space, Rep rep = Rep::Position);

StateVector to_momentum(const StateVector& state);
StateVector to_position(const StateVector& state);
/// Converts if needed; never throws on a representation mismatch.
StateVector in_rep(const StateVector& state, Rep rep);

/// Multiplies by f(flat index) in the requested representation and returns
/// the result in the input's representation.
StateVector multiply_in(const StateVector& state, Rep rep,
                        const std::function<cplx(std::size_t)>& factor);

/// <phi|psi>, with psi converted to phi's representation if needed.
cplx inner(const StateVector& phi, const StateVector& psi);
double norm(const StateVector& state);
StateVector normalized(const StateVector& state);

/// 1 - |<phi|psi>| for normalized inputs; insensitive to global phase.
double fidelity_defect(const StateVector& phi, const StateVector& psi);
/// min over phases of ||psi - e^{i a} phi||.
double phase_aligned_distance(const StateVector& phi, const StateVector& psi);

enum class OperatorTag { X, X1, X2, P, P1, P2, Hfree, K, J };

const char* to_string(OperatorTag tag);

/// Generator actions. X/P/K act in 1D; X1, X2, P1, P2, J in 2D; Hfree in both.
StateVector apply(OperatorTag op, const StateVector& state);

double mean_position(const StateVector& state, int axis = 0);
double mean_momentum(const StateVector& state, int axis = 0);
/// <psi|op|psi> / <psi|psi>.
cplx expectation(OperatorTag op, const StateVector& state);

/// Minimum-uncertainty packet (pi sigma^2)^(-dims/4) exp(-|x-x0|^2/(2 sigma^2) + i k0.x),
/// renormalized on the grid. Requires +-5 sigma (position) and +-5/sigma
/// (momentum) around the centers to fit inside the grid.
StateVector gaussian(const GridPtr& space, std::span<const double> center_x,
                     std::span<const double> center_k, double sigma);
StateVector gaussian(const GridPtr& space, double center_x, double center_k, double sigma);

class SupportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A state is admissible when the probability in the outermost edge_points
// samples of every axis, in both representations, is at most max_edge_mass.
struct Admissibility {
  int edge_points = 2;
  double max_edge_mass = 1e-9;
};

double edge_mass(const StateVector& state, Rep rep, const Admissibility& adm = {});
bool is_admissible(const StateVector& state, const Admissibility& adm = {});
void require_admissible(const StateVector& state, const std::string& context,
                        const Admissibility& adm = {});

/// Probability of samples whose coordinate along `axis` (in `rep`) lies
/// outside [lo, hi].
double mass_outside(const StateVector& state, Rep rep, int axis, double lo, double hi);

}  // namespace hbundle
