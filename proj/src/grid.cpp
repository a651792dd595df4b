#include "hbundle/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "hbundle/fft.hpp"

namespace hbundle {

namespace {

constexpr double kPi = std::numbers::pi;

double cell_volume(const GridSpace& g, Rep rep) {
  const double d = rep == Rep::Position ? g.dx() : g.dk();
  return g.dims() == 1 ? d : d * d;
}

void require_same_space(const StateVector& a, const StateVector& b, const char* what) {
  if (a.space_ptr() != b.space_ptr() && !(a.space() == b.space())) {
    throw std::invalid_argument(std::string(what) + ": states live on different grids");
  }
}

// Rank of FFT index j in ascending signed-momentum order.
int signed_rank(int j, int n) { return (j + n / 2) % n; }

}  // namespace

const char* to_string(Rep rep) { return rep == Rep::Position ? "position" : "momentum"; }

GridSpace::GridSpace(int dims, int points, double extent, double mass)
    : dims_(dims),
      points_(points),
      extent_(extent),
      mass_(mass),
      dx_(extent / points),
      dk_(2.0 * kPi / extent),
      size_(dims == 1 ? static_cast<std::size_t>(points)
                      : static_cast<std::size_t>(points) * static_cast<std::size_t>(points)) {
  x_.resize(static_cast<std::size_t>(points));
  k_.resize(static_cast<std::size_t>(points));
  origin_phase_.resize(static_cast<std::size_t>(points));
  const double x0 = -0.5 * extent;
  for (int i = 0; i < points; ++i) {
    x_[static_cast<std::size_t>(i)] = x0 + i * dx_;
    const int signed_j = i <= (points - 1) / 2 ? i : i - points;
    const double k = signed_j * dk_;
    k_[static_cast<std::size_t>(i)] = k;
    origin_phase_[static_cast<std::size_t>(i)] = std::polar(1.0, -k * x0);
  }
}

double GridSpace::k_max() const { return kPi * points_ / extent_; }

std::array<int, 2> GridSpace::unflatten(std::size_t flat) const {
  if (dims_ == 1) return {static_cast<int>(flat), 0};
  const auto n = static_cast<std::size_t>(points_);
  return {static_cast<int>(flat / n), static_cast<int>(flat % n)};
}

bool GridSpace::operator==(const GridSpace& other) const {
  return dims_ == other.dims_ && points_ == other.points_ && extent_ == other.extent_ &&
         mass_ == other.mass_;
}

GridPtr make_grid(int dims, int points, double extent, double mass) {
  if (dims != 1 && dims != 2) throw std::invalid_argument("make_grid: dims must be 1 or 2");
  if (points < 8) throw std::invalid_argument("make_grid: need at least 8 points per axis");
  if (!(extent > 0.0) || !std::isfinite(extent))
    throw std::invalid_argument("make_grid: extent must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw std::invalid_argument("make_grid: mass must be positive");
  return std::make_shared<const GridSpace>(dims, points, extent, mass);
}

// ---------------------------------------------------------------------------

StateVector::StateVector(GridPtr space, Amplitudes amplitudes, Rep rep)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)), rep_(rep) {
  if (!space_) throw std::invalid_argument("StateVector: null grid");
  if (static_cast<std::size_t>(amplitudes_.size()) != space_->size())
    throw std::invalid_argument("StateVector: amplitude count does not match grid");
}

StateVector& StateVector::operator+=(const StateVector& other) {
  require_same_space(*this, other, "operator+=");
  if (other.rep_ == rep_) {
    amplitudes_ += other.amplitudes_;
  } else {
    amplitudes_ += in_rep(other, rep_).amplitudes_;
  }
  return *this;
}

StateVector& StateVector::operator-=(const StateVector& other) {
  require_same_space(*this, other, "operator-=");
  if (other.rep_ == rep_) {
    amplitudes_ -= other.amplitudes_;
  } else {
    amplitudes_ -= in_rep(other, rep_).amplitudes_;
  }
  return *this;
}

StateVector& StateVector::operator*=(cplx factor) {
  amplitudes_ *= factor;
  return *this;
}

StateVector operator+(StateVector lhs, const StateVector& rhs) { return lhs += rhs; }
StateVector operator-(StateVector lhs, const StateVector& rhs) { return lhs -= rhs; }
StateVector operator*(cplx factor, StateVector state) { return state *= factor; }
StateVector operator*(double factor, StateVector state) { return state *= cplx(factor, 0.0); }

StateVector zero_state(const GridPtr& space, Rep rep) {
  return {space, Amplitudes::Zero(static_cast<Eigen::Index>(space->size())), rep};
}

// ---------------------------------------------------------------------------

StateVector to_momentum(const StateVector& state) {
  if (state.rep() != Rep::Position)
    throw std::invalid_argument("to_momentum: state is already in the momentum representation");
  const GridSpace& g = state.space();
  Amplitudes data = state.amplitudes();
  fft::transform(data, g.dims(), g.points(), fft::Direction::Forward);
  const double scale = std::pow(g.dx() / std::sqrt(2.0 * kPi), g.dims());
  const auto& phase = g.origin_phase();
  if (g.dims() == 1) {
    for (Eigen::Index j = 0; j < data.size(); ++j) data[j] *= scale * phase[static_cast<std::size_t>(j)];
  } else {
    for (std::size_t f = 0; f < g.size(); ++f) {
      const auto [j0, j1] = g.unflatten(f);
      data[static_cast<Eigen::Index>(f)] *=
          scale * phase[static_cast<std::size_t>(j0)] * phase[static_cast<std::size_t>(j1)];
    }
  }
  return {state.space_ptr(), std::move(data), Rep::Momentum};
}

StateVector to_position(const StateVector& state) {
  if (state.rep() != Rep::Momentum)
    throw std::invalid_argument("to_position: state is already in the position representation");
  const GridSpace& g = state.space();
  Amplitudes data = state.amplitudes();
  const double scale = std::pow(g.dk() / std::sqrt(2.0 * kPi), g.dims());
  const auto& phase = g.origin_phase();
  if (g.dims() == 1) {
    for (Eigen::Index j = 0; j < data.size(); ++j)
      data[j] *= scale * std::conj(phase[static_cast<std::size_t>(j)]);
  } else {
    for (std::size_t f = 0; f < g.size(); ++f) {
      const auto [j0, j1] = g.unflatten(f);
      data[static_cast<Eigen::Index>(f)] *=
          scale * std::conj(phase[static_cast<std::size_t>(j0)] * phase[static_cast<std::size_t>(j1)]);
    }
  }
  fft::transform(data, g.dims(), g.points(), fft::Direction::Backward);
  return {state.space_ptr(), std::move(data), Rep::Position};
}

StateVector in_rep(const StateVector& state, Rep rep) {
  if (state.rep() == rep) return state;
  return rep == Rep::Momentum ? to_momentum(state) : to_position(state);
}

StateVector multiply_in(const StateVector& state, Rep rep,
                        const std::function<cplx(std::size_t)>& factor) {
  StateVector work = in_rep(state, rep);
  Amplitudes data = work.amplitudes();
  for (Eigen::Index f = 0; f < data.size(); ++f) data[f] *= factor(static_cast<std::size_t>(f));
  return in_rep(StateVector(state.space_ptr(), std::move(data), rep), state.rep());
}

// ---------------------------------------------------------------------------

cplx inner(const StateVector& phi, const StateVector& psi) {
  require_same_space(phi, psi, "inner");
  const Amplitudes& a = phi.amplitudes();
  const Amplitudes b = psi.rep() == phi.rep() ? psi.amplitudes() : in_rep(psi, phi.rep()).amplitudes();
  return (a.conjugate() * b).sum() * cell_volume(phi.space(), phi.rep());
}

double norm(const StateVector& state) {
  return std::sqrt(state.amplitudes().abs2().sum() * cell_volume(state.space(), state.rep()));
}

StateVector normalized(const StateVector& state) {
  const double n = norm(state);
  if (n == 0.0) throw std::invalid_argument("normalized: zero state");
  return (1.0 / n) * state;
}

double fidelity_defect(const StateVector& phi, const StateVector& psi) {
  return 1.0 - std::abs(inner(phi, psi)) / (norm(phi) * norm(psi));
}

double phase_aligned_distance(const StateVector& phi, const StateVector& psi) {
  const cplx overlap = inner(phi, psi);
  const cplx phase = overlap == cplx{} ? cplx(1.0) : overlap / std::abs(overlap);
  return norm(psi - phase * phi);
}

// ---------------------------------------------------------------------------

const char* to_string(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::X: return "X";
    case OperatorTag::X1: return "X1";
    case OperatorTag::X2: return "X2";
    case OperatorTag::P: return "P";
    case OperatorTag::P1: return "P1";
    case OperatorTag::P2: return "P2";
    case OperatorTag::Hfree: return "Hfree";
    case OperatorTag::K: return "K";
    case OperatorTag::J: return "J";
  }
  return "?";
}

namespace {

void require_dims(OperatorTag op, const GridSpace& g, int dims) {
  if (g.dims() != dims) {
    std::ostringstream msg;
    msg << "apply(" << to_string(op) << "): operator needs a " << dims << "D grid, got "
        << g.dims() << "D";
    throw DimensionError(msg.str());
  }
}

StateVector multiply_axis(const StateVector& state, Rep rep, int axis) {
  const GridSpace& g = state.space();
  const auto& values = rep == Rep::Position ? g.x_samples() : g.k_samples();
  return multiply_in(state, rep, [&](std::size_t f) {
    const auto idx = g.unflatten(f);
    return cplx(values[static_cast<std::size_t>(idx[static_cast<std::size_t>(axis)])], 0.0);
  });
}

}  // namespace

StateVector apply(OperatorTag op, const StateVector& state) {
  const GridSpace& g = state.space();
  switch (op) {
    case OperatorTag::X:
      require_dims(op, g, 1);
      return multiply_axis(state, Rep::Position, 0);
    case OperatorTag::X1:
      require_dims(op, g, 2);
      return multiply_axis(state, Rep::Position, 0);
    case OperatorTag::X2:
      require_dims(op, g, 2);
      return multiply_axis(state, Rep::Position, 1);
    case OperatorTag::P:
      require_dims(op, g, 1);
      return multiply_axis(state, Rep::Momentum, 0);
    case OperatorTag::P1:
      require_dims(op, g, 2);
      return multiply_axis(state, Rep::Momentum, 0);
    case OperatorTag::P2:
      require_dims(op, g, 2);
      return multiply_axis(state, Rep::Momentum, 1);
    case OperatorTag::K:
      require_dims(op, g, 1);
      return g.mass() * multiply_axis(state, Rep::Position, 0);
    case OperatorTag::Hfree: {
      const double inv2m = 0.5 / g.mass();
      return multiply_in(state, Rep::Momentum, [&](std::size_t f) {
        const auto [j0, j1] = g.unflatten(f);
        double k2 = g.k(j0) * g.k(j0);
        if (g.dims() == 2) k2 += g.k(j1) * g.k(j1);
        return cplx(k2 * inv2m, 0.0);
      });
    }
    case OperatorTag::J:
      require_dims(op, g, 2);
      return apply(OperatorTag::X1, apply(OperatorTag::P2, state)) -
             apply(OperatorTag::X2, apply(OperatorTag::P1, state));
  }
  throw std::invalid_argument("apply: unknown operator");
}

cplx expectation(OperatorTag op, const StateVector& state) {
  return inner(state, apply(op, state)) / inner(state, state).real();
}

double mean_position(const StateVector& state, int axis) {
  const GridSpace& g = state.space();
  const StateVector pos = in_rep(state, Rep::Position);
  const Amplitudes& a = pos.amplitudes();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    const double w = std::norm(a[static_cast<Eigen::Index>(f)]);
    num += w * g.x(g.unflatten(f)[static_cast<std::size_t>(axis)]);
    den += w;
  }
  return num / den;
}

double mean_momentum(const StateVector& state, int axis) {
  const GridSpace& g = state.space();
  const StateVector mom = in_rep(state, Rep::Momentum);
  const Amplitudes& a = mom.amplitudes();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    const double w = std::norm(a[static_cast<Eigen::Index>(f)]);
    num += w * g.k(g.unflatten(f)[static_cast<std::size_t>(axis)]);
    den += w;
  }
  return num / den;
}

// ---------------------------------------------------------------------------

StateVector gaussian(const GridPtr& space, std::span<const double> center_x,
                     std::span<const double> center_k, double sigma) {
  const GridSpace& g = *space;
  const auto dims = static_cast<std::size_t>(g.dims());
  if (center_x.size() != dims || center_k.size() != dims)
    throw DimensionError("gaussian: center dimension does not match grid");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian: sigma must be positive");
  for (std::size_t a = 0; a < dims; ++a) {
    if (std::abs(center_x[a]) + 5.0 * sigma > 0.5 * g.extent()) {
      std::ostringstream msg;
      msg << "gaussian: position support " << center_x[a] << " +- " << 5.0 * sigma
          << " exceeds extent +-" << 0.5 * g.extent();
      throw SupportError(msg.str());
    }
    if (std::abs(center_k[a]) + 5.0 / sigma > g.k_max()) {
      std::ostringstream msg;
      msg << "gaussian: momentum support " << center_k[a] << " +- " << 5.0 / sigma
          << " exceeds momentum window +-" << g.k_max();
      throw SupportError(msg.str());
    }
  }
  Amplitudes data(static_cast<Eigen::Index>(g.size()));
  const double inv2s2 = 0.5 / (sigma * sigma);
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto idx = g.unflatten(f);
    double exponent = 0.0;
    double phase = 0.0;
    for (std::size_t a = 0; a < dims; ++a) {
      const double x = g.x(idx[a]);
      exponent -= (x - center_x[a]) * (x - center_x[a]) * inv2s2;
      phase += center_k[a] * x;
    }
    data[static_cast<Eigen::Index>(f)] = std::polar(std::exp(exponent), phase);
  }
  return normalized(StateVector(space, std::move(data), Rep::Position));
}

StateVector gaussian(const GridPtr& space, double center_x, double center_k, double sigma) {
  const double cx[1] = {center_x};
  const double ck[1] = {center_k};
  return gaussian(space, cx, ck, sigma);
}

// ---------------------------------------------------------------------------

double edge_mass(const StateVector& state, Rep rep, const Admissibility& adm) {
  const GridSpace& g = state.space();
  const StateVector work = in_rep(state, rep);
  const Amplitudes& a = work.amplitudes();
  const int n = g.points();
  const int band = adm.edge_points;
  const double total = a.abs2().sum();
  if (total == 0.0) return 0.0;
  double worst = 0.0;
  for (int axis = 0; axis < g.dims(); ++axis) {
    double edge = 0.0;
    for (std::size_t f = 0; f < g.size(); ++f) {
      int i = g.unflatten(f)[static_cast<std::size_t>(axis)];
      if (rep == Rep::Momentum) i = signed_rank(i, n);
      if (i < band || i >= n - band) edge += std::norm(a[static_cast<Eigen::Index>(f)]);
    }
    worst = std::max(worst, edge / total);
  }
  return worst;
}

bool is_admissible(const StateVector& state, const Admissibility& adm) {
  return edge_mass(state, Rep::Position, adm) <= adm.max_edge_mass &&
         edge_mass(state, Rep::Momentum, adm) <= adm.max_edge_mass;
}

void require_admissible(const StateVector& state, const std::string& context,
                        const Admissibility& adm) {
  const double px = edge_mass(state, Rep::Position, adm);
  const double pk = edge_mass(state, Rep::Momentum, adm);
  if (px > adm.max_edge_mass || pk > adm.max_edge_mass) {
    std::ostringstream msg;
    msg << context << ": state reaches the grid boundary (edge mass position=" << px
        << ", momentum=" << pk << ", limit " << adm.max_edge_mass << ")";
    throw SupportError(msg.str());
  }
}

double mass_outside(const StateVector& state, Rep rep, int axis, double lo, double hi) {
  const GridSpace& g = state.space();
  const StateVector work = in_rep(state, rep);
  const Amplitudes& a = work.amplitudes();
  const auto& values = rep == Rep::Position ? g.x_samples() : g.k_samples();
  const double total = a.abs2().sum();
  if (total == 0.0) return 0.0;
  double outside = 0.0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    const double c = values[static_cast<std::size_t>(g.unflatten(f)[static_cast<std::size_t>(axis)])];
    if (c < lo || c > hi) outside += std::norm(a[static_cast<Eigen::Index>(f)]);
  }
  return outside / total;
}

}  // namespace hbundle
