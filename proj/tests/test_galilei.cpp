#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hbundle/galilei.hpp"
#include "support/generators.hpp"

using namespace hbundle;
using std::numbers::pi;

namespace {

GridPtr grid1(double m = 1.0) { return make_grid(1, 256, 40.0, m); }
GridPtr grid2() { return make_grid(2, 128, 20.0, 1.0); }

StateVector packet2(const GridPtr& g, double x1, double x2, double k1, double k2, double s) {
  const double c[2] = {x1, x2};
  const double k[2] = {k1, k2};
  return gaussian(g, c, k, s);
}

double variance_x(const StateVector& psi) {
  const double mx = mean_position(psi);
  const StateVector xpsi = apply(OperatorTag::X, psi);
  return inner(xpsi, xpsi).real() - mx * mx;
}

}  // namespace

TEST_CASE("time translation") {
  auto g = grid1();
  const StateVector psi = gaussian(g, 0.5, 1.0, 1.0);
  CHECK(time_translate(psi, 0.0).amplitudes().isApprox(psi.amplitudes(), 0.0));

  SUBCASE("plane wave phase") {
    const double k0 = 6 * g->dk();
    Amplitudes a(256);
    for (int i = 0; i < 256; ++i) a[i] = std::polar(1.0, k0 * g->x(i));
    const StateVector pw(g, a, Rep::Position);
    const StateVector out = time_translate(pw, 0.8);
    const cplx expected = std::polar(1.0, -k0 * k0 * 0.8 / 2.0);
    CHECK((out.amplitudes() - expected * a).abs().maxCoeff() <= 1e-12);
  }
  SUBCASE("free spreading matches the analytic variance") {
    // var(t) = sigma^2/2 + t^2 / (2 m^2 sigma^2), <X>(t) = x0 + k0 t / m
    for (double m : {1.0, 2.0}) {
      auto gm = grid1(m);
      const StateVector p0 = gaussian(gm, 0.0, 0.0, 1.0);
      const StateVector pt = time_translate(p0, 1.0);
      CHECK(std::abs(variance_x(pt) - (0.5 + 0.5 / (m * m))) <= 1e-6);
      const StateVector moving = time_translate(gaussian(gm, -1.0, 1.5, 1.2), 1.3);
      CHECK(std::abs(mean_position(moving) - (-1.0 + 1.5 * 1.3 / m)) <= 1e-8);
    }
  }
  CHECK(std::abs(norm(time_translate(psi, 2.5)) - 1.0) <= 1e-12);
}

TEST_CASE("space translation follows x' = x - zeta") {
  auto g = grid1();
  const StateVector psi = gaussian(g, 0.0, 0.0, 1.0);
  CHECK(space_translate(psi, 0.0).amplitudes().isApprox(psi.amplitudes(), 0.0));
  const StateVector shifted = space_translate(psi, 1.0);
  CHECK(std::abs(mean_position(shifted) + 1.0) <= 1e-8);
  CHECK(std::abs(norm(shifted) - 1.0) <= 1e-12);
  // Translation by a multiple of dx is an exact sample shift.
  const StateVector by_cell = space_translate(psi, 4 * g->dx());
  CHECK(std::abs(by_cell.amplitudes()[100] - psi.amplitudes()[104]) <= 1e-13);
  CHECK_THROWS_AS(space_translate(gaussian(g, 10.0, 0.0, 1.0), -12.0), SupportError);
  CHECK_THROWS_AS(space_translate(psi, 1.0, 1), DimensionError);
}

TEST_CASE("boost shifts momentum by -m eta") {
  auto g = grid1();
  const StateVector psi = gaussian(g, 0.3, 2.0, 1.0);
  CHECK(boost(psi, 0.0).amplitudes().isApprox(psi.amplitudes(), 0.0));
  const StateVector b = boost(psi, 0.5);
  CHECK(std::abs(mean_momentum(b) - 1.5) <= 1e-10);
  CHECK(std::abs(mean_position(b) - mean_position(psi)) <= 1e-10);

  auto g3 = grid1(3.0);
  const StateVector heavy = gaussian(g3, 0.0, 1.0, 1.0);
  CHECK(std::abs(mean_momentum(boost(heavy, 0.7)) - (1.0 - 2.1)) <= 1e-10);

  SUBCASE("composition") {
    const StateVector two = boost(boost(psi, 0.3), 0.45);
    const StateVector one = boost(psi, 0.75);
    CHECK(fidelity_defect(two, one) <= 1e-12);
  }
  CHECK_THROWS_AS(boost(psi, 30.0), SupportError);
  CHECK_THROWS_AS(boost(psi, -18.0), SupportError);
}

TEST_CASE("primitive factors are unitary") {
  auto g = grid1();
  for (const auto& psi : testing::random_states(g, 5, 6)) {
    CHECK(std::abs(norm(time_translate(psi, 0.9)) - 1.0) <= 1e-12);
    CHECK(std::abs(norm(space_translate(psi, -1.7)) - 1.0) <= 1e-12);
    CHECK(std::abs(norm(boost(psi, 0.8)) - 1.0) <= 1e-12);
  }
  auto g2 = grid2();
  const StateVector psi2 = packet2(g2, 1.0, -0.5, 0.5, 0.2, 1.0);
  CHECK(std::abs(norm(rotate(psi2, 0.7)) - 1.0) <= 1e-12);
  CHECK(std::abs(norm(rotate(psi2, -2.9)) - 1.0) <= 1e-12);
}

TEST_CASE("Weyl relation: boost(eta) after translate(zeta) picks up exp(i m eta zeta)") {
  for (double m : {1.0, 1.7}) {
    auto g = grid1(m);
    for (const auto& p : testing::random_packets(17, 4, 4.0, 1.5)) {
      const StateVector psi = gaussian(g, p.x0, p.k0, p.sigma);
      const double eta = 0.4, zeta = -1.3;
      const StateVector tb = space_translate(boost(psi, eta), zeta);
      const StateVector bt = boost(space_translate(psi, zeta), eta);
      // bt = exp(i m eta zeta) tb
      const cplx ratio = inner(tb, bt);
      CHECK(std::abs(std::abs(ratio) - 1.0) <= 1e-10);
      CHECK(std::abs(std::arg(ratio) - m * eta * zeta) <= 1e-10);
    }
  }
}

TEST_CASE("rotation") {
  auto g = grid2();
  const StateVector psi = packet2(g, 2.0, 0.0, 0.0, 0.0, 1.0);
  CHECK(rotate(psi, 0.0).amplitudes().isApprox(psi.amplitudes(), 0.0));

  SUBCASE("full turn") {
    CHECK(fidelity_defect(rotate(psi, 2 * pi), psi) <= 1e-8);
    const StateVector moving = packet2(g, 1.5, -1.0, 0.7, 0.4, 1.1);
    CHECK(fidelity_defect(rotate(moving, -2 * pi), moving) <= 1e-8);
  }
  SUBCASE("quarter turn moves (x0, 0) to (0, x0)") {
    const StateVector r = rotate(psi, pi / 2);
    CHECK(std::abs(mean_position(r, 0)) <= 1e-6);
    CHECK(std::abs(mean_position(r, 1) - 2.0) <= 1e-6);
  }
  SUBCASE("matches the coordinate-rotated analytic packet") {
    for (double theta : {0.3, 1.2, -2.4, 3.9}) {
      const double x1 = 1.5, x2 = -0.8, k1 = 0.6, k2 = -0.3;
      const StateVector in = packet2(g, x1, x2, k1, k2, 1.1);
      const double c = std::cos(theta), s = std::sin(theta);
      const StateVector expected =
          packet2(g, c * x1 - s * x2, s * x1 + c * x2, c * k1 - s * k2, s * k1 + c * k2, 1.1);
      CHECK(norm(rotate(in, theta) - expected) <= 1e-6);
    }
  }
  SUBCASE("angular momentum is conserved") {
    const StateVector m = packet2(g, 1.5, 0.5, -0.4, 0.9, 1.0);
    const double j0 = expectation(OperatorTag::J, m).real();
    CHECK(std::abs(expectation(OperatorTag::J, rotate(m, 1.1)).real() - j0) <= 1e-8);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(rotate(gaussian(make_grid(1, 64, 20.0, 1.0), 0.0, 0.0, 1.0), 0.5),
                    DimensionError);
    const StateVector corner = packet2(g, 4.5, 4.5, 0.0, 0.0, 1.0);
    CHECK_THROWS_AS(rotate(corner, 0.5), SupportError);
  }
}

TEST_CASE("group words") {
  auto g = grid1();
  const StateVector psi = gaussian(g, 0.4, 0.6, 1.0);

  CHECK(transport(psi, GroupWord{}).amplitudes().isApprox(psi.amplitudes(), 0.0));

  SUBCASE("inverse word") {
    for (GalileiCoord c : {GalileiCoord{0.7, 0.3, 0.2}, GalileiCoord{-1.1, 2.0, -0.4},
                           GalileiCoord{0.0, -1.5, 0.9}}) {
      const GroupWord w = section_word(c);
      const StateVector there = transport(psi, w);
      const StateVector back = transport(there, w.inverse());
      CHECK(fidelity_defect(back, psi) <= 1e-10);
      // Inverse of the coordinates, applied in reverse order.
      const GroupWord manual{{FactorKind::Boost, c.v, 0},
                             {FactorKind::SpaceTranslate, c.x, 0},
                             {FactorKind::TimeTranslate, c.t, 0}};
      CHECK(fidelity_defect(transport(there, manual), psi) <= 1e-10);
    }
  }
  SUBCASE("time translations compose") {
    const GroupWord a{{FactorKind::TimeTranslate, 0.4, 0}};
    const GroupWord b{{FactorKind::TimeTranslate, 0.9, 0}};
    const GroupWord ab{{FactorKind::TimeTranslate, 1.3, 0}};
    CHECK(fidelity_defect(transport(transport(psi, a), b), transport(psi, ab)) <= 1e-12);
    CHECK(fidelity_defect(transport(psi, b * a), transport(psi, ab)) <= 1e-12);
  }
  SUBCASE("section word order is U_-t U_-x U_-v") {
    const GalileiCoord c{0.5, 1.0, 0.3};
    const StateVector manual = time_translate(space_translate(boost(psi, -0.3), -1.0), -0.5);
    CHECK(norm(transport(psi, section_word(c)) - manual) <= 1e-14);
  }
  SUBCASE("rotating word") {
    auto g2 = grid2();
    const StateVector p2 = packet2(g2, 0.5, -0.3, 0.2, 0.1, 1.0);
    const RotatingCoord c{0.4, 2.0, 0.2, 1.0};
    const GroupWord w = rotating_word(c);
    CHECK(w.factors().size() == 5u);
    CHECK(fidelity_defect(transport(transport(p2, w), w.inverse()), p2) <= 1e-10);
    CHECK_THROWS_AS(rotating_word(RotatingCoord{0, -1.0, 0, 0}), std::invalid_argument);
  }
  SUBCASE("spreading into the edge is reported") {
    const StateVector narrow = gaussian(g, 12.0, 0.0, 0.4);
    const GroupWord long_time{{FactorKind::TimeTranslate, 30.0, 0}};
    CHECK_THROWS_AS(transport(narrow, long_time), SupportError);
  }
}
