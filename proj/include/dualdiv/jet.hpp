#pragma once

// Second-order forward-mode automatic differentiation.
//
// A Jet<N> carries a value together with its gradient and Hessian with
// respect to N seed variables. The model and criterion code is written as
// templates on the scalar type, so the same expression yields values
// (double), or values plus exact first and second derivatives (Jet<N>).

#include <Eigen/Core>
#include <cmath>
#include <limits>

namespace dualdiv {

template <int N>
struct Jet {
  using Vector = Eigen::Matrix<double, N, 1>;
  using Matrix = Eigen::Matrix<double, N, N>;

  double v = 0.0;
  Vector g = Vector::Zero();
  Matrix h = Matrix::Zero();

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: implicit promotion of constants
  Jet(double value, const Vector& grad, const Matrix& hess) : v(value), g(grad), h(hess) {}

  static Jet variable(double value, int index) {
    Jet j(value);
    j.g[index] = 1.0;
    return j;
  }

  Jet& operator+=(const Jet& o) { v += o.v; g += o.g; h += o.h; return *this; }
  Jet& operator-=(const Jet& o) { v -= o.v; g -= o.g; h -= o.h; return *this; }
  Jet& operator*=(const Jet& o) { *this = *this * o; return *this; }
  Jet& operator/=(const Jet& o) { *this = *this / o; return *this; }

  friend Jet operator-(const Jet& a) { return Jet(-a.v, -a.g, -a.h); }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double b) { a.v += b; return a; }
  friend Jet operator+(double a, Jet b) { b.v += a; return b; }
  friend Jet operator-(Jet a, double b) { a.v -= b; return a; }
  friend Jet operator-(double a, const Jet& b) { return Jet(a - b.v, -b.g, -b.h); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    const Matrix cross = a.g * b.g.transpose();
    return Jet(a.v * b.v, a.g * b.v + b.g * a.v,
               a.h * b.v + b.h * a.v + cross + cross.transpose());
  }
  friend Jet operator*(Jet a, double b) { a.v *= b; a.g *= b; a.h *= b; return a; }
  friend Jet operator*(double a, Jet b) { return b * a; }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
  friend Jet operator/(Jet a, double b) { return a * (1.0 / b); }
  friend Jet operator/(double a, const Jet& b) { return reciprocal(b) * a; }

  friend bool operator<(const Jet& a, const Jet& b) { return a.v < b.v; }
  friend bool operator>(const Jet& a, const Jet& b) { return a.v > b.v; }
  friend bool operator<(const Jet& a, double b) { return a.v < b; }
  friend bool operator>(const Jet& a, double b) { return a.v > b; }
  friend bool operator<=(const Jet& a, double b) { return a.v <= b; }
  friend bool operator>=(const Jet& a, double b) { return a.v >= b; }

  // f(a) given f(a.v), f'(a.v), f''(a.v).
  static Jet chain(const Jet& a, double f0, double f1, double f2) {
    return Jet(f0, f1 * a.g, f1 * a.h + f2 * (a.g * a.g.transpose()));
  }

  friend Jet reciprocal(const Jet& a) {
    const double r = 1.0 / a.v;
    return chain(a, r, -r * r, 2.0 * r * r * r);
  }
  friend Jet exp(const Jet& a) {
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
  }
  friend Jet expm1(const Jet& a) {
    const double e = std::exp(a.v);
    return chain(a, std::expm1(a.v), e, e);
  }
  friend Jet log(const Jet& a) {
    const double r = 1.0 / a.v;
    return chain(a, std::log(a.v), r, -r * r);
  }
  friend Jet log1p(const Jet& a) {
    const double r = 1.0 / (1.0 + a.v);
    return chain(a, std::log1p(a.v), r, -r * r);
  }
  friend Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
  }
  friend Jet pow(const Jet& a, double p) {
    const double f = std::pow(a.v, p);
    return chain(a, f, p * f / a.v, p * (p - 1.0) * f / (a.v * a.v));
  }
};

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Jet<N>& j) { return j.v; }

template <typename Scalar>
bool is_finite(const Scalar& x) { return std::isfinite(value_of(x)); }

}  // namespace dualdiv

namespace Eigen {

template <int N>
struct NumTraits<dualdiv::Jet<N>> : GenericNumTraits<double> {
  using Real = dualdiv::Jet<N>;
  using NonInteger = dualdiv::Jet<N>;
  using Nested = dualdiv::Jet<N>;
  using Literal = dualdiv::Jet<N>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 1 + N + N * N,
    MulCost = 3 * (1 + N + N * N),
  };
  static Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static Real dummy_precision() { return Real(1e-12); }
};

}  // namespace Eigen
