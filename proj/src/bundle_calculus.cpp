#include "hbundle/bundle_calculus.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace hbundle::bundle {

namespace {

using cplx = std::complex<double>;

void check_indices(const Indices& idx, int degree, int dims) {
  for (int a = 0; a < degree; ++a)
    if (idx[static_cast<std::size_t>(a)] < 0 || idx[static_cast<std::size_t>(a)] >= dims)
      throw std::out_of_range("MatrixFormField: direction index out of range");
}

Point shifted(const Point& p, int mu, double d) {
  Point q = p;
  q[mu] += d;
  return q;
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

// U^-1 dU of a unitary field is anti-hermitian; the difference quotient is
// only so up to O(h^2), so keep the anti-hermitian part.
Matrix antihermitian_part(const Matrix& m) { return 0.5 * (m - m.adjoint()); }

struct TrigPolynomial {
  std::vector<Matrix> amplitudes;  // hermitian
  std::vector<Point> wavevectors;
  std::vector<double> phases;

  Matrix operator()(const Point& p) const {
    Matrix out = Matrix::Zero(amplitudes.front().rows(), amplitudes.front().cols());
    for (std::size_t k = 0; k < amplitudes.size(); ++k)
      out += std::cos(wavevectors[k].dot(p) + phases[k]) * amplitudes[k];
    return out;
  }
};

Matrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

TrigPolynomial random_trig(int dims, int n, int modes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> q(-2.0, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  TrigPolynomial t;
  for (int k = 0; k < modes; ++k) {
    t.amplitudes.push_back(random_hermitian(n, rng) / std::sqrt(static_cast<double>(n)));
    Point w(dims);
    for (int a = 0; a < dims; ++a) w[a] = q(rng);
    t.wavevectors.push_back(w);
    t.phases.push_back(phase(rng));
  }
  return t;
}

}  // namespace

bool Patch::contains(const Point& p, int margin) const {
  if (p.size() != lower.size()) return false;
  const double slack = 1e-9 * h;
  for (int a = 0; a < dims(); ++a) {
    if (p[a] < lower[a] + margin * h - slack || p[a] > upper[a] - margin * h + slack) return false;
  }
  return true;
}

void Patch::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw std::invalid_argument("Patch: lower and upper corners need the same nonzero dimension");
  if (!(h > 0.0)) throw std::invalid_argument("Patch: step h must be positive");
  for (int a = 0; a < dims(); ++a)
    if (!(upper[a] > lower[a])) throw std::invalid_argument("Patch: empty coordinate range");
}

std::vector<Point> sample_points(const Patch& patch, int margin, int per_axis) {
  patch.validate();
  if (per_axis < 1) throw std::invalid_argument("sample_points: per_axis must be >= 1");
  const int d = patch.dims();
  Point lo(d), hi(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = patch.lower[a] + margin * patch.h;
    hi[a] = patch.upper[a] - margin * patch.h;
    if (lo[a] > hi[a]) throw PatchBoundaryError("sample_points: patch too small for the stencil");
  }
  std::vector<Point> out;
  std::vector<int> counter(static_cast<std::size_t>(d), 0);
  while (true) {
    Point p(d);
    for (int a = 0; a < d; ++a) {
      const double s = per_axis == 1 ? 0.5 : static_cast<double>(counter[static_cast<std::size_t>(a)]) / (per_axis - 1);
      p[a] = lo[a] + s * (hi[a] - lo[a]);
    }
    out.push_back(p);
    int a = 0;
    while (a < d && ++counter[static_cast<std::size_t>(a)] == per_axis) counter[static_cast<std::size_t>(a++)] = 0;
    if (a == d) break;
  }
  return out;
}

MatrixFormField::MatrixFormField(int degree, Patch patch, int fiber, Component fn, int margin)
    : degree_(degree), patch_(std::move(patch)), fiber_(fiber), fn_(std::move(fn)), margin_(margin) {
  patch_.validate();
  if (degree_ < 1 || degree_ > 3) throw std::invalid_argument("MatrixFormField: degree must be 1, 2 or 3");
  if (fiber_ < 1) throw std::invalid_argument("MatrixFormField: fiber dimension must be >= 1");
  if (degree_ > patch_.dims())
    throw std::invalid_argument("MatrixFormField: degree exceeds the patch dimension");
}

Matrix MatrixFormField::operator()(const Point& p, const Indices& idx) const {
  check_indices(idx, degree_, patch_.dims());
  if (!patch_.contains(p, margin_)) {
    std::ostringstream msg;
    msg << "MatrixFormField: point [" << p.transpose() << "] is within " << margin_
        << " stencil widths of the patch boundary";
    throw PatchBoundaryError(msg.str());
  }
  return fn_(p, idx);
}

std::vector<Indices> MatrixFormField::independent_indices() const {
  std::vector<Indices> out;
  const int d = patch_.dims();
  if (degree_ == 1)
    for (int a = 0; a < d; ++a) out.push_back({a, 0, 0});
  if (degree_ == 2)
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) out.push_back({a, b, 0});
  if (degree_ == 3)
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b)
        for (int c = b + 1; c < d; ++c) out.push_back({a, b, c});
  return out;
}

GaugeField::GaugeField(int fiber, Function fn, double tolerance)
    : fiber_(fiber), fn_(std::move(fn)), tolerance_(tolerance) {}

double GaugeField::unitarity_defect(const Point& p) const {
  const Matrix u = fn_(p);
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).norm();
}

Matrix GaugeField::operator()(const Point& p) const {
  Matrix u = fn_(p);
  if (u.rows() != fiber_ || u.cols() != fiber_)
    throw std::invalid_argument("GaugeField: matrix has the wrong fiber dimension");
  const double defect = (u.adjoint() * u - Matrix::Identity(fiber_, fiber_)).norm();
  if (defect > tolerance_) {
    std::ostringstream msg;
    msg << "GaugeField: U is not unitary at [" << p.transpose() << "], |U^dag U - 1| = " << defect;
    throw NonUnitaryError(msg.str());
  }
  return u;
}

Matrix partial(const std::function<Matrix(const Point&)>& f, const Point& p, int mu, double h) {
  return (f(shifted(p, mu, h)) - f(shifted(p, mu, -h))) / (2.0 * h);
}

MatrixFormField exterior_derivative(const MatrixFormField& w) {
  if (w.degree() > 2) throw std::invalid_argument("exterior_derivative: degree must be 1 or 2");
  const double h = w.patch().h;
  if (w.degree() == 1) {
    return MatrixFormField(
        2, w.patch(), w.fiber(),
        [w, h](const Point& p, const Indices& i) -> Matrix {
          const int mu = i[0], nu = i[1];
          if (mu == nu) return Matrix::Zero(w.fiber(), w.fiber());
          auto wn = [&](const Point& q) { return w(q, nu); };
          auto wm = [&](const Point& q) { return w(q, mu); };
          return partial(wn, p, mu, h) - partial(wm, p, nu, h);
        },
        w.margin() + 1);
  }
  return MatrixFormField(
      3, w.patch(), w.fiber(),
      [w, h](const Point& p, const Indices& i) -> Matrix {
        Matrix out = Matrix::Zero(w.fiber(), w.fiber());
        for (int c = 0; c < 3; ++c) {
          const int l = i[static_cast<std::size_t>(c)];
          const int m = i[static_cast<std::size_t>((c + 1) % 3)];
          const int n = i[static_cast<std::size_t>((c + 2) % 3)];
          out += partial([&](const Point& q) { return w(q, m, n); }, p, l, h);
        }
        return out;
      },
      w.margin() + 1);
}

MatrixFormField curvature(const MatrixFormField& w) {
  if (w.degree() != 1) throw std::invalid_argument("curvature: needs a 1-form");
  const MatrixFormField dw = exterior_derivative(w);
  return MatrixFormField(
      2, w.patch(), w.fiber(),
      [w, dw](const Point& p, const Indices& i) -> Matrix {
        return dw(p, i) + commutator(w(p, i[0]), w(p, i[1]));
      },
      dw.margin());
}

MatrixFormField gauge_transform(const MatrixFormField& w, const GaugeField& u) {
  if (w.degree() != 1) throw std::invalid_argument("gauge_transform: needs a 1-form");
  if (u.fiber() != w.fiber()) throw std::invalid_argument("gauge_transform: fiber dimensions differ");
  const double h = w.patch().h;
  // Fail early on a field that is not unitary anywhere on a coarse sample.
  for (const Point& p : sample_points(w.patch(), 0, 3)) u(p);
  return MatrixFormField(
      1, w.patch(), w.fiber(),
      [w, u, h](const Point& p, const Indices& i) -> Matrix {
        const Matrix up = u(p);
        const Matrix uinv = up.adjoint();
        const Matrix du = partial([&](const Point& q) { return u(q); }, p, i[0], h);
        return uinv * w(p, i[0]) * up + antihermitian_part(uinv * du);
      },
      std::max(w.margin(), 1));
}

MatrixFormField pure_gauge(const GaugeField& u, const Patch& patch) {
  const double h = patch.h;
  for (const Point& p : sample_points(patch, 0, 3)) u(p);
  return MatrixFormField(
      1, patch, u.fiber(),
      [u, h](const Point& p, const Indices& i) -> Matrix {
        const Matrix dinv = partial([&](const Point& q) { return Matrix(u(q).adjoint()); }, p, i[0], h);
        return antihermitian_part(u(p) * dinv);
      },
      1);
}

MatrixFormField bianchi_residual(const MatrixFormField& w) {
  if (w.degree() != 1) throw std::invalid_argument("bianchi_residual: needs a 1-form");
  if (w.patch().dims() < 3) throw std::invalid_argument("bianchi_residual: needs at least 3 coordinates");
  const MatrixFormField omega = curvature(w);
  const MatrixFormField d_omega = exterior_derivative(omega);
  return MatrixFormField(
      3, w.patch(), w.fiber(),
      [w, omega, d_omega](const Point& p, const Indices& i) -> Matrix {
        // (Omega^w - w^Omega)_lmn = cyclic sum of [Omega_mn, w_l]
        Matrix wedge = Matrix::Zero(w.fiber(), w.fiber());
        for (int c = 0; c < 3; ++c) {
          const int l = i[static_cast<std::size_t>(c)];
          const int m = i[static_cast<std::size_t>((c + 1) % 3)];
          const int n = i[static_cast<std::size_t>((c + 2) % 3)];
          wedge += commutator(omega(p, m, n), w(p, l));
        }
        return d_omega(p, i) - wedge;
      },
      d_omega.margin());
}

double max_norm(const MatrixFormField& f, const std::vector<Point>& points) {
  double out = 0.0;
  const auto idx = f.independent_indices();
  for (const Point& p : points)
    for (const Indices& i : idx) out = std::max(out, f(p, i).norm());
  return out;
}

double antihermitian_defect(const MatrixFormField& w, const std::vector<Point>& points) {
  if (w.degree() != 1) throw std::invalid_argument("antihermitian_defect: needs a 1-form");
  double out = 0.0;
  for (const Point& p : points)
    for (int mu = 0; mu < w.patch().dims(); ++mu) {
      const Matrix m = w(p, mu);
      out = std::max(out, (m + m.adjoint()).norm());
    }
  return out;
}

MatrixFormField random_connection(const Patch& patch, int fiber, std::uint64_t seed, int modes) {
  std::mt19937_64 rng(seed);
  std::vector<TrigPolynomial> parts;
  for (int mu = 0; mu < patch.dims(); ++mu) parts.push_back(random_trig(patch.dims(), fiber, modes, rng));
  return MatrixFormField(1, patch, fiber, [parts](const Point& p, const Indices& i) -> Matrix {
    return cplx(0.0, 1.0) * parts[static_cast<std::size_t>(i[0])](p);
  });
}

GaugeField random_gauge(int dims, int fiber, std::uint64_t seed, int modes) {
  std::mt19937_64 rng(seed);
  const TrigPolynomial k = random_trig(dims, fiber, modes, rng);
  return GaugeField(fiber, [k](const Point& p) -> Matrix {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(k(p));
    const Eigen::VectorXd& lam = eig.eigenvalues();
    Eigen::VectorXcd phases(lam.size());
    for (Eigen::Index j = 0; j < lam.size(); ++j) phases[j] = std::polar(1.0, lam[j]);
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
  });
}

MatrixFormField constant_connection(const Patch& patch, const std::vector<Matrix>& components) {
  if (static_cast<int>(components.size()) != patch.dims())
    throw std::invalid_argument("constant_connection: one matrix per coordinate expected");
  const int n = static_cast<int>(components.front().rows());
  return MatrixFormField(1, patch, n, [components](const Point&, const Indices& i) -> Matrix {
    return components[static_cast<std::size_t>(i[0])];
  });
}

}  // namespace hbundle::bundle
