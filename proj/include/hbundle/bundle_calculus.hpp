#pragma once

// Matrix-valued differential forms on a rectangular coordinate patch, with
// derivatives taken by central differences of step h.

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace hbundle::bundle {

using Matrix = Eigen::MatrixXcd;
using Point = Eigen::VectorXd;
using Indices = std::array<int, 3>;

class PatchBoundaryError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class NonUnitaryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Patch {
  Point lower;
  Point upper;
  double h = 1e-2;

  int dims() const { return static_cast<int>(lower.size()); }
  /// True if the point lies at least margin * h inside every face.
  bool contains(const Point& p, int margin) const;
  void validate() const;
};

/// Evenly spaced points covering the part of the patch that lies margin * h
/// inside the faces, per_axis points along each coordinate.
std::vector<Point> sample_points(const Patch& patch, int margin, int per_axis);

class MatrixFormField {
 public:
  using Component = std::function<Matrix(const Point&, const Indices&)>;

  /// `margin` counts stencil widths lost to derivatives already taken; the
  /// field refuses evaluation closer than margin * h to the patch boundary.
  MatrixFormField(int degree, Patch patch, int fiber, Component fn, int margin = 0);

  int degree() const { return degree_; }
  int fiber() const { return fiber_; }
  int margin() const { return margin_; }
  const Patch& patch() const { return patch_; }

  Matrix operator()(const Point& p, const Indices& idx) const;
  Matrix operator()(const Point& p, int mu) const { return (*this)(p, {mu, 0, 0}); }
  Matrix operator()(const Point& p, int mu, int nu) const { return (*this)(p, {mu, nu, 0}); }
  Matrix operator()(const Point& p, int mu, int nu, int lambda) const {
    return (*this)(p, {mu, nu, lambda});
  }

  /// Index tuples with strictly increasing entries, one per independent component.
  std::vector<Indices> independent_indices() const;

 private:
  int degree_;
  Patch patch_;
  int fiber_;
  Component fn_;
  int margin_;
};

class GaugeField {
 public:
  using Function = std::function<Matrix(const Point&)>;

  GaugeField(int fiber, Function fn, double tolerance = 1e-12);

  int fiber() const { return fiber_; }
  /// Throws NonUnitaryError if U(p) is not unitary to the tolerance.
  Matrix operator()(const Point& p) const;
  double unitarity_defect(const Point& p) const;

 private:
  int fiber_;
  Function fn_;
  double tolerance_;
};

/// Central difference along coordinate mu of any matrix function.
Matrix partial(const std::function<Matrix(const Point&)>& f, const Point& p, int mu, double h);

/// Degree 1 -> 2: d_mu w_nu - d_nu w_mu. Degree 2 -> 3: cyclic sum of d_l W_mn.
MatrixFormField exterior_derivative(const MatrixFormField& w);

/// Omega_mn = d_mu w_nu - d_nu w_mu + [w_mu, w_nu].
MatrixFormField curvature(const MatrixFormField& w);

/// U^-1 w_mu U + U^-1 d_mu U, the derivative of U by central differences.
MatrixFormField gauge_transform(const MatrixFormField& w, const GaugeField& u);

/// U d(U^-1), built with central differences on the given patch.
MatrixFormField pure_gauge(const GaugeField& u, const Patch& patch);

/// dOmega - (Omega^w - w^Omega); components are cyclic sums over (l, m, n).
MatrixFormField bianchi_residual(const MatrixFormField& w);

/// Largest Frobenius norm of any independent component over the points.
double max_norm(const MatrixFormField& f, const std::vector<Point>& points);

/// Largest Frobenius norm of w + w^dagger over the points, for 1-forms.
double antihermitian_defect(const MatrixFormField& w, const std::vector<Point>& points);

/// Smooth anti-hermitian 1-form: each component is i times a hermitian
/// trigonometric polynomial in the coordinates.
MatrixFormField random_connection(const Patch& patch, int fiber, std::uint64_t seed, int modes = 2);

/// Smooth unitary field exp(i K(p)) with K a random hermitian trigonometric polynomial.
GaugeField random_gauge(int dims, int fiber, std::uint64_t seed, int modes = 2);

MatrixFormField constant_connection(const Patch& patch, const std::vector<Matrix>& components);

}  // namespace hbundle::bundle
