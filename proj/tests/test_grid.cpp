#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hbundle/grid.hpp"
#include "support/dense_oracle.hpp"
#include "support/generators.hpp"

using namespace hbundle;
using std::numbers::pi;

namespace {

GridPtr grid1() { return make_grid(1, 256, 40.0, 1.0); }
GridPtr grid2() { return make_grid(2, 128, 20.0, 1.0); }

StateVector plane_wave(const GridPtr& g, double k0) {
  Amplitudes a(static_cast<Eigen::Index>(g->size()));
  for (int i = 0; i < g->points(); ++i) a[i] = std::polar(1.0 / std::sqrt(g->extent()), k0 * g->x(i));
  return {g, a, Rep::Position};
}

// Trapezoid quadrature of (2 pi)^(-1/2) \int psi(x) e^{-ikx} dx for the
// analytic packet on a fine grid unrelated to the simulation grid.
cplx continuum_fourier(double x0, double k0, double sigma, double k) {
  const int n = 40001;
  const double lo = x0 - 30.0 * sigma;
  const double h = 60.0 * sigma / (n - 1);
  const double amp = std::pow(pi * sigma * sigma, -0.25);
  cplx sum{};
  for (int i = 0; i < n; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    sum += w * amp * std::exp(-(x - x0) * (x - x0) / (2 * sigma * sigma)) *
           std::polar(1.0, (k0 - k) * x);
  }
  return sum * h / std::sqrt(2.0 * pi);
}

}  // namespace

TEST_CASE("make_grid derives spacings") {
  auto g = make_grid(1, 256, 40.0, 1.0);
  CHECK(g->dx() == 0.15625);
  CHECK(g->dk() == doctest::Approx(2 * pi / 40.0).epsilon(1e-15));
  CHECK(g->dx() * g->dk() * g->points() == doctest::Approx(2 * pi).epsilon(1e-15));
  CHECK(g->x(0) == -20.0);
  CHECK(g->k(128) == doctest::Approx(-g->k_max()));
  CHECK(g->k(127) < g->k_max());

  auto g2 = make_grid(2, 128, 20.0, 2.0);
  CHECK(g2->size() == 128u * 128u);
  CHECK(g2->dx() == 0.15625);
  CHECK(g2->mass() == 2.0);
}

TEST_CASE("make_grid rejects bad parameters") {
  CHECK_THROWS_AS(make_grid(1, 4, 10.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(3, 64, 10.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 64, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 64, 10.0, -1.0), std::invalid_argument);
}

TEST_CASE("representation round trip and norm") {
  auto g = grid1();
  for (const auto& psi : testing::random_states(g, 11, 6)) {
    const StateVector k = to_momentum(psi);
    CHECK(std::abs(norm(k) - norm(psi)) <= 1e-12);
    const StateVector back = to_position(k);
    CHECK((back.amplitudes() - psi.amplitudes()).abs().maxCoeff() <= 1e-12);
  }
  auto g2d = grid2();
  const double c[2] = {1.0, -0.5};
  const double kk[2] = {0.5, 1.0};
  const StateVector psi2 = gaussian(g2d, c, kk, 1.0);
  CHECK(std::abs(norm(to_momentum(psi2)) - 1.0) <= 1e-12);
  CHECK((to_position(to_momentum(psi2)).amplitudes() - psi2.amplitudes()).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("representation mismatch is rejected") {
  auto g = grid1();
  const StateVector psi = gaussian(g, 0.0, 0.0, 1.0);
  CHECK_THROWS_AS(to_position(psi), std::invalid_argument);
  CHECK_THROWS_AS(to_momentum(to_momentum(psi)), std::invalid_argument);
}

TEST_CASE("on-grid plane wave lands in a single momentum bin") {
  auto g = grid1();
  const double k0 = 5 * g->dk();
  const StateVector k = to_momentum(plane_wave(g, k0));
  const Amplitudes& a = k.amplitudes();
  Eigen::Index peak = 0;
  a.abs().maxCoeff(&peak);
  CHECK(g->k(static_cast<int>(peak)) == doctest::Approx(k0));
  double off = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j)
    if (j != peak) off = std::max(off, std::abs(a[j]));
  CHECK(off <= 1e-12 * std::abs(a[peak]));
}

TEST_CASE("Gaussian momentum amplitudes match the continuum Fourier integral") {
  auto g = grid1();
  const StateVector k = to_momentum(gaussian(g, 0.0, 2.0, 1.0));
  double worst = 0.0;
  for (int j = 0; j < g->points(); j += 3) {
    worst = std::max(worst, std::abs(k.amplitudes()[j] - continuum_fourier(0.0, 2.0, 1.0, g->k(j))));
  }
  CHECK(worst <= 1e-8);
  // Displaced packet exercises the origin phase.
  const StateVector k2 = to_momentum(gaussian(g, 3.0, -1.0, 1.3));
  worst = 0.0;
  for (int j = 0; j < g->points(); j += 5) {
    worst = std::max(worst, std::abs(k2.amplitudes()[j] - continuum_fourier(3.0, -1.0, 1.3, g->k(j))));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("generator actions") {
  auto g = grid1();
  SUBCASE("P on an on-grid plane wave") {
    const double k0 = 7 * g->dk();
    const StateVector pw = plane_wave(g, k0);
    const StateVector out = apply(OperatorTag::P, pw);
    CHECK((out.amplitudes() - k0 * pw.amplitudes()).abs().maxCoeff() <= 1e-12);
  }
  SUBCASE("K is m X exactly") {
    auto gm = make_grid(1, 256, 40.0, 2.5);
    const StateVector psi = gaussian(gm, 1.0, 0.5, 1.0);
    const StateVector k = apply(OperatorTag::K, psi);
    const StateVector x = apply(OperatorTag::X, psi);
    CHECK((k.amplitudes() - 2.5 * x.amplitudes()).abs().maxCoeff() == 0.0);
  }
  SUBCASE("<X> of displaced Gaussian") {
    const StateVector psi = gaussian(g, 1.0, 0.0, 1.0);
    CHECK(std::abs(expectation(OperatorTag::X, psi) - cplx(1.0)) <= 1e-8);
  }
  SUBCASE("apply restores the input representation") {
    const StateVector psi = to_momentum(gaussian(g, 1.0, 0.0, 1.0));
    CHECK(apply(OperatorTag::X, psi).rep() == Rep::Momentum);
    CHECK(apply(OperatorTag::P, to_position(psi)).rep() == Rep::Position);
  }
  SUBCASE("dimension mismatch") {
    const StateVector psi = gaussian(g, 0.0, 0.0, 1.0);
    CHECK_THROWS_AS(apply(OperatorTag::J, psi), DimensionError);
    CHECK_THROWS_AS(apply(OperatorTag::X1, psi), DimensionError);
    const double c[2] = {0, 0};
    const StateVector psi2 = gaussian(grid2(), c, c, 1.0);
    CHECK_THROWS_AS(apply(OperatorTag::X, psi2), DimensionError);
    CHECK_THROWS_AS(apply(OperatorTag::K, psi2), DimensionError);
  }
}

TEST_CASE("gaussian moments against the analytic packet") {
  auto g = grid1();
  const StateVector psi = gaussian(g, 0.0, 0.0, 1.0);
  CHECK(std::abs(norm(psi) - 1.0) <= 1e-12);
  CHECK(std::abs(mean_position(psi)) <= 1e-8);
  CHECK(std::abs(mean_momentum(psi)) <= 1e-8);
  const cplx x2 = inner(apply(OperatorTag::X, psi), apply(OperatorTag::X, psi));
  CHECK(std::abs(x2 - cplx(0.5)) <= 1e-8);

  const StateVector moving = gaussian(g, 0.0, 3.0, 1.0);
  CHECK(std::abs(mean_momentum(moving) - 3.0) <= 1e-8);

  // <P^2> = k0^2 + 1/(2 sigma^2)
  const StateVector wide = gaussian(g, -2.0, 1.5, 1.7);
  const double p2 = inner(wide, apply(OperatorTag::P, apply(OperatorTag::P, wide))).real();
  CHECK(std::abs(p2 - (1.5 * 1.5 + 0.5 / (1.7 * 1.7))) <= 1e-8);

  CHECK_THROWS_AS(gaussian(g, 19.0, 0.0, 2.0), SupportError);
  CHECK_THROWS_AS(gaussian(g, 0.0, 19.0, 1.0), SupportError);
}

TEST_CASE("inner product") {
  auto g = grid1();
  const StateVector a = gaussian(g, 0.0, 0.0, 1.0);
  const StateVector b = gaussian(g, 2.0, 0.0, 1.0);
  CHECK(std::abs(inner(a, a) - cplx(1.0)) <= 1e-12);
  // |psi|^2 has variance sigma^2/2, so the overlap is exp(-d^2 / (4 sigma^2)).
  CHECK(std::abs(inner(a, b) - cplx(std::exp(-1.0))) <= 1e-8);
  const StateVector w1 = gaussian(g, -1.0, 0.0, 1.5);
  const StateVector w2 = gaussian(g, 2.0, 0.0, 1.5);
  CHECK(std::abs(inner(w1, w2) - cplx(std::exp(-9.0 / (4 * 2.25)))) <= 1e-8);

  const StateVector c = testing::cat_state(g, -3.0, 2.0, 1.0);
  const StateVector d = to_momentum(gaussian(g, 1.0, -0.7, 1.1));
  CHECK(std::abs(inner(c, d) - std::conj(inner(d, c))) <= 1e-15);
  CHECK(std::abs(norm(c) - std::sqrt(inner(c, c).real())) <= 1e-15);

  auto other = make_grid(1, 128, 40.0, 1.0);
  CHECK_THROWS_AS(inner(a, gaussian(other, 0.0, 0.0, 1.0)), std::invalid_argument);
}

TEST_CASE("hermiticity of generators on admissible states") {
  auto g = grid1();
  const auto states = testing::random_states(g, 21, 5);
  for (OperatorTag op : {OperatorTag::X, OperatorTag::P, OperatorTag::Hfree, OperatorTag::K}) {
    for (std::size_t i = 0; i + 1 < states.size(); ++i) {
      const cplx lhs = inner(states[i], apply(op, states[i + 1]));
      const cplx rhs = inner(apply(op, states[i]), states[i + 1]);
      CHECK(std::abs(lhs - rhs) <= 1e-10);
    }
  }
  auto g2 = grid2();
  const double ca[2] = {1.0, -0.5}, ka[2] = {0.3, 0.8};
  const double cb[2] = {-0.7, 1.2}, kb[2] = {-0.5, 0.2};
  const StateVector a = gaussian(g2, ca, ka, 1.0);
  const StateVector b = gaussian(g2, cb, kb, 1.3);
  for (OperatorTag op : {OperatorTag::X1, OperatorTag::X2, OperatorTag::P1, OperatorTag::P2,
                         OperatorTag::Hfree, OperatorTag::J}) {
    CHECK(std::abs(inner(a, apply(op, b)) - inner(apply(op, a), b)) <= 1e-10);
  }
}

TEST_CASE("canonical commutator on admissible packets") {
  auto g = grid1();
  for (const auto& psi : testing::random_states(g, 31, 8)) {
    const StateVector xp = apply(OperatorTag::X, apply(OperatorTag::P, psi));
    const StateVector px = apply(OperatorTag::P, apply(OperatorTag::X, psi));
    CHECK(std::abs(inner(psi, xp - px) - cplx(0.0, 1.0)) <= 1e-8);
  }
}

TEST_CASE("rotation generator expectation") {
  auto g = grid2();
  for (double x0 : {1.0, 2.5}) {
    for (double k0 : {-1.0, 0.7}) {
      const double c[2] = {x0, 0.0};
      const double k[2] = {0.0, k0};
      const StateVector psi = gaussian(g, c, k, 1.0);
      CHECK(std::abs(expectation(OperatorTag::J, psi) - cplx(x0 * k0)) <= 1e-8);
    }
  }
}

TEST_CASE("state actions agree with dense matrices on N=64") {
  auto g = make_grid(1, 64, 20.0, 1.5);
  const StateVector psi = testing::cat_state(g, -2.0, 3.0, 0.8);
  const oracle::Vector v = oracle::to_vector(psi);
  auto diff = [&](OperatorTag op, const oracle::Matrix& m) {
    return (oracle::to_vector(apply(op, psi)) - m * v).cwiseAbs().maxCoeff();
  };
  CHECK(diff(OperatorTag::X, oracle::X(*g)) <= 1e-8);
  CHECK(diff(OperatorTag::P, oracle::P(*g)) <= 1e-8);
  CHECK(diff(OperatorTag::Hfree, oracle::Hfree(*g)) <= 1e-8);
  CHECK(diff(OperatorTag::K, g->mass() * oracle::X(*g)) <= 1e-8);
}

TEST_CASE("admissibility") {
  auto g = grid1();
  CHECK(is_admissible(gaussian(g, 0.0, 0.0, 1.0)));
  CHECK(is_admissible(gaussian(g, 15.0, 0.0, 1.0)));
  // Built by hand so it bypasses the gaussian() support check.
  Amplitudes a(256);
  for (int i = 0; i < 256; ++i) a[i] = std::exp(-0.5 * std::pow(g->x(i) - 19.5, 2));
  const StateVector edge(g, a, Rep::Position);
  CHECK_FALSE(is_admissible(edge));
  CHECK_THROWS_AS(require_admissible(edge, "test"), SupportError);
  const StateVector centred = gaussian(g, 0.0, 0.0, 1.0);
  CHECK(mass_outside(centred, Rep::Position, 0, -100.0, 100.0) == 0.0);
  const double right = mass_outside(centred, Rep::Position, 0, -100.0, 0.3);
  const double left = mass_outside(centred, Rep::Position, 0, 0.3 - 0.5 * g->dx(), 100.0);
  CHECK(left + right == doctest::Approx(1.0).epsilon(1e-12));
}
