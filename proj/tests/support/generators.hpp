#pragma once

// Seeded generators for property-style tests.

#include <random>
#include <vector>

#include "hbundle/grid.hpp"

namespace hbundle::testing {

struct PacketParams {
  double x0;
  double k0;
  double sigma;
};

/// Gaussians comfortably inside a 1D N=256, L=40 grid.
inline std::vector<PacketParams> random_packets(std::uint64_t seed, int count,
                                                double max_x = 6.0, double max_k = 2.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-max_x, max_x);
  std::uniform_real_distribution<double> uk(-max_k, max_k);
  std::uniform_real_distribution<double> us(0.8, 1.6);
  std::vector<PacketParams> out;
  for (int i = 0; i < count; ++i) out.push_back({ux(rng), uk(rng), us(rng)});
  return out;
}

inline std::vector<StateVector> random_states(const GridPtr& g, std::uint64_t seed, int count,
                                              double max_x = 6.0, double max_k = 2.0) {
  std::vector<StateVector> out;
  for (const auto& p : random_packets(seed, count, max_x, max_k))
    out.push_back(gaussian(g, p.x0, p.k0, p.sigma));
  return out;
}

/// Superposition of two packets; not a Gaussian, still admissible.
inline StateVector cat_state(const GridPtr& g, double a, double b, double k) {
  return normalized(gaussian(g, a, k, 1.0) + cplx(0.3, 0.4) * gaussian(g, b, -k, 1.2));
}

}  // namespace hbundle::testing
