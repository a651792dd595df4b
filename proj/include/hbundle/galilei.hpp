#pragma once

// Unitary actions of Galilean transformations on grid states.
//
// Conventions (hbar = 1):
//   time translation   U_tau  = exp(-i H tau)      momentum-diagonal
//   space translation  U_zeta = exp(+i P zeta)     psi(x) -> psi(x + zeta)
//   boost              U_eta  = exp(-i K eta)      K = m X, |k> -> |k - m eta>
//   rotation (2D)      U_theta = exp(+i J theta)   J = X1 P2 - X2 P1
//
// The free function rotate() is the active counter-clockwise rotation
// exp(-i J theta); the Rotate factor of a GroupWord is U_theta = rotate(-theta).

#include <string>
#include <vector>

#include "hbundle/grid.hpp"

namespace hbundle {

StateVector time_translate(const StateVector& state, double tau);

/// Rejects translations that push probability into the edge band.
StateVector space_translate(const StateVector& state, double zeta, int axis = 0,
                            const Admissibility& adm = {});

/// Position-space phase exp(-i m eta x_axis); exact for any real eta.
/// Rejects boosts whose shifted momentum distribution leaves the window.
StateVector boost(const StateVector& state, double eta, int axis = 0,
                  const Admissibility& adm = {});

/// Active rotation by theta about the origin via three spectral shears per
/// sub-rotation; sub-rotations are at most pi/2 so every shear angle is at
/// most pi/4. Requires the packet to sit inside the inscribed disk.
StateVector rotate(const StateVector& state, double theta, const Admissibility& adm = {});

enum class FactorKind { TimeTranslate, SpaceTranslate, Boost, Rotate };

const char* to_string(FactorKind kind);

struct Factor {
  FactorKind kind;
  double parameter;
  int axis = 0;
};

/// Ordered product of primitive factors, written left to right as in
/// U_a U_b U_c; the rightmost factor acts first.
class GroupWord {
public:
  GroupWord() = default;
  GroupWord(std::initializer_list<Factor> factors) : factors_(factors) {}
  explicit GroupWord(std::vector<Factor> factors) : factors_(std::move(factors)) {}

  const std::vector<Factor>& factors() const { return factors_; }
  bool empty() const { return factors_.empty(); }

  /// Reversed order with negated parameters.
  GroupWord inverse() const;

  /// Concatenation: (a * b) acts as a after b.
  friend GroupWord operator*(const GroupWord& a, const GroupWord& b);

  std::string describe() const;

private:
  std::vector<Factor> factors_;
};

StateVector apply_factor(const StateVector& state, const Factor& factor,
                         const Admissibility& adm = {});

/// Applies the factors right to left; after each time translation the
/// state is checked against the edge band.
StateVector transport(const StateVector& state, const GroupWord& word,
                      const Admissibility& adm = {});

// Coordinates on the manifold of frames.
struct GalileiCoord {
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;
};

struct RotatingCoord {
  double t = 0.0;
  double radius = 0.0;
  double theta = 0.0;
  double v = 0.0;
};

void validate(const GalileiCoord& c);
void validate(const RotatingCoord& c);

/// Parallel section of the 1D Galilei chart: U_{-t} U_{-x} U_{-v}.
GroupWord section_word(const GalileiCoord& c);

/// Rotating chart: U_v U_theta U_r U_t with r = radius (cos theta, sin theta)
/// and the boost along X2.
GroupWord rotating_word(const RotatingCoord& c);

}  // namespace hbundle
