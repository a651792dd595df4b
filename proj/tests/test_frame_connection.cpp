#include <cmath>

#include "doctest.h"
#include "hbundle/frame_connection.hpp"
#include "support/dense_oracle.hpp"
#include "support/generators.hpp"

using namespace hbundle;

namespace {

constexpr cplx I{0.0, 1.0};

GridPtr grid(double m = 1.0) { return make_grid(1, 256, 40.0, m); }

const FrameCoord kCoords[] = {{0.0, 0.0, 0.0}, {0.7, 0.3, 0.0}, {-0.5, 1.0, 0.4}, {1.0, -2.0, -0.3},
                              {0.2, 0.5, 0.25}};

double rel(const StateVector& a, const StateVector& b) { return norm(a - b) / norm(b); }

}  // namespace

TEST_CASE("Heisenberg position") {
  for (double m : {1.0, 2.5}) {
    auto g = grid(m);
    for (const auto& psi : testing::random_states(g, 31, 5, 5.0, 1.5)) {
      for (double t : {-1.0, 0.4, 1.5}) {
        const StateVector expected = apply(OperatorTag::X, psi) + (t / m) * apply(OperatorTag::P, psi);
        CHECK(norm(heisenberg_position(psi, t) - expected) <= 1e-8 * norm(psi));
      }
    }
  }
  CHECK(norm(heisenberg_position(gaussian(grid(), 1.0, 0.0, 1.0), 0.0) -
             apply(OperatorTag::X, gaussian(grid(), 1.0, 0.0, 1.0))) == 0.0);
}

TEST_CASE("analytic components") {
  auto g = grid();
  SUBCASE("w_x on a plane wave") {
    const double k0 = 8 * g->dk();
    Amplitudes a(256);
    for (int i = 0; i < 256; ++i) a[i] = std::polar(1.0, k0 * g->x(i));
    const StateVector pw(g, a, Rep::Position);
    CHECK(norm(analytic_connection(Direction::X, {})(pw) - (I * k0) * pw) <= 1e-12 * norm(pw));
  }
  SUBCASE("w_v at the origin is -i m X") {
    auto g2 = grid(2.0);
    const StateVector psi = gaussian(g2, 1.0, 0.5, 1.0);
    const StateVector expected = (-2.0 * I) * apply(OperatorTag::X, psi);
    CHECK(norm(analytic_connection(Direction::V, {})(psi) - expected) <= 1e-14);
  }
  SUBCASE("i w is hermitian") {
    const auto states = testing::random_states(g, 8, 4, 5.0, 1.5);
    for (Direction d : {Direction::T, Direction::X, Direction::V}) {
      const auto w = analytic_connection(d, {0.6, -0.4, 0.2});
      for (std::size_t a = 0; a < states.size(); ++a)
        for (std::size_t b = 0; b < states.size(); ++b) {
          const cplx lhs = inner(states[a], I * w(states[b]));
          const cplx rhs = inner(I * w(states[a]), states[b]);
          CHECK(std::abs(lhs - rhs) <= 1e-8);
        }
    }
  }
  SUBCASE("dense oracle on N = 64") {
    auto g64 = make_grid(1, 64, 20.0, 1.3);
    const StateVector psi = gaussian(g64, 0.8, 0.6, 1.0);
    const auto v = oracle::to_vector(psi);
    const oracle::Matrix x = oracle::X(*g64), p = oracle::P(*g64), h = oracle::Hfree(*g64);
    const double t = 0.6, x0 = -0.4;
    // U_t^dag X U_t with U_t = exp(-i H t)
    const oracle::Matrix xt = oracle::expm_hermitian(h, -t) * x * oracle::expm_hermitian(h, t);
    const oracle::Vector wv = -I * 1.3 * (xt * v - x0 * v);
    const FrameCoord c{t, x0, 0.1};
    CHECK((oracle::to_vector(analytic_connection(Direction::V, c)(psi)) - wv).norm() <= 1e-8);
    CHECK((oracle::to_vector(analytic_connection(Direction::T, c)(psi)) + I * (h * v)).norm() <= 1e-8);
    CHECK((oracle::to_vector(analytic_connection(Direction::X, c)(psi)) - I * (p * v)).norm() <= 1e-8);
  }
}

TEST_CASE("numeric connection agrees with the closed form") {
  auto g = grid();
  // Broad packet: narrow momentum spread, close to a plane wave.
  const StateVector psi = gaussian(g, 0.5, 1.0, 3.0);

  CHECK(rel(numeric_connection(Direction::T, {}, psi), -I * apply(OperatorTag::Hfree, psi)) <= 1e-6);
  CHECK(rel(numeric_connection(Direction::X, {}, psi), I * apply(OperatorTag::P, psi)) <= 1e-6);

  for (const auto& state : testing::random_states(g, 44, 4, 5.0, 1.5))
    for (const FrameCoord& c : kCoords)
      for (Direction d : {Direction::T, Direction::X, Direction::V}) {
        const StateVector exact = analytic_connection(d, c)(state);
        const double e1 = rel(numeric_connection(d, c, state, 1e-3), exact);
        const double e2 = rel(numeric_connection(d, c, state, 5e-4), exact);
        CHECK(e1 <= 1e-5);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
        CHECK(rel(numeric_connection(d, c, state, 1e-3, true), exact) <= 1e-9);
      }

  SUBCASE("errors") {
    CHECK_THROWS_AS(numeric_connection(Direction::X, {0, 40.0, 0}, psi), SupportError);
    CHECK_THROWS_AS(numeric_connection(Direction::T, {}, psi, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(numeric_connection(Direction::T, {}, seam_packet(g, 1.0)), SupportError);
    const double c[2] = {0, 0};
    CHECK_THROWS_AS(numeric_connection(Direction::T, {}, gaussian(make_grid(2, 32, 20, 1), c, c, 1.0)),
                    DimensionError);
  }
}

TEST_CASE("the connection is flat") {
  auto g = grid();
  const auto states = testing::random_states(g, 5, 5, 5.0, 2.0);
  for (const auto& psi : states)
    for (const FrameCoord& c : kCoords) {
      auto res = [&](Direction a, Direction b, double h, CurvatureMethod m) {
        return norm(curvature_residual(a, b, c, psi, h, m)) / curvature_scale(a, b, psi);
      };
      CHECK(res(Direction::T, Direction::X, 1e-3, CurvatureMethod::Analytic) <= 1e-10);
      CHECK(res(Direction::X, Direction::V, 1e-3, CurvatureMethod::Analytic) <= 1e-6);
      CHECK(res(Direction::T, Direction::V, 1e-3, CurvatureMethod::Analytic) <= 1e-5);

      // Finite-difference components converge at second order.
      for (auto [a, b] : {std::pair{Direction::T, Direction::V}, std::pair{Direction::X, Direction::V}}) {
        const double coarse = res(a, b, 1e-3, CurvatureMethod::Numeric);
        const double fine = res(a, b, 5e-4, CurvatureMethod::Numeric);
        CHECK(coarse <= 1e-5);
        CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
      }
      // sin(Hh) and sin(Ph) commute exactly: only round-off remains.
      CHECK(res(Direction::T, Direction::X, 1e-3, CurvatureMethod::Numeric) <= 1e-8);
    }

  const StateVector psi = states.front();
  CHECK(norm(curvature_residual(Direction::V, Direction::X, {}, psi) +
             curvature_residual(Direction::X, Direction::V, {}, psi)) <= 1e-12);
  CHECK_THROWS_AS(curvature_residual(Direction::T, Direction::T, {}, psi), std::invalid_argument);
}

TEST_CASE("canonical commutation relation") {
  auto g = grid();
  for (const auto& psi : testing::random_states(g, 99, 6)) {
    CHECK(std::abs(ccr_expectation(psi) - I) <= 1e-8);
    CHECK(std::abs(ccr_expectation(boost(psi, 0.6)) - I) <= 1e-8);
  }
  const StateVector seam = seam_packet(g, 1.0);
  CHECK_FALSE(is_admissible(seam));
  CHECK_THROWS_AS(ccr_expectation(seam), SupportError);
  CHECK(std::abs(ccr_expectation(seam, false) - I) > 1e-3);
}
