#pragma once

// Second-order forward-mode differentiation in two variables.
//
// A Jet2 carries a value together with its gradient and Hessian with respect
// to the plane coordinates (x, y). Seed the coordinates with Jet2::var_x /
// Jet2::var_y, write the formula once, and read all derivatives off the
// result. Products and compositions follow the exact chain rule, so the
// derivatives are accurate to round-off.

#include <array>
#include <cmath>

namespace qfi {

struct Jet2 {
  double v = 0.0;
  double gx = 0.0, gy = 0.0;
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;

  constexpr Jet2() = default;
  constexpr Jet2(double value) : v(value) {}  // NOLINT: implicit constants are intended
  constexpr Jet2(double value, double dx, double dy, double dxx, double dxy, double dyy)
      : v(value), gx(dx), gy(dy), hxx(dxx), hxy(dxy), hyy(dyy) {}

  static constexpr Jet2 var_x(double x) { return {x, 1.0, 0.0, 0.0, 0.0, 0.0}; }
  static constexpr Jet2 var_y(double y) { return {y, 0.0, 1.0, 0.0, 0.0, 0.0}; }

  std::array<double, 2> grad() const { return {gx, gy}; }

  Jet2& operator+=(const Jet2& o) {
    v += o.v; gx += o.gx; gy += o.gy; hxx += o.hxx; hxy += o.hxy; hyy += o.hyy;
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    v -= o.v; gx -= o.gx; gy -= o.gy; hxx -= o.hxx; hxy -= o.hxy; hyy -= o.hyy;
    return *this;
  }
  Jet2& operator*=(double s) {
    v *= s; gx *= s; gy *= s; hxx *= s; hxy *= s; hyy *= s;
    return *this;
  }
};

/// Composition f(u) given f, f', f'' evaluated at u.v.
inline Jet2 lift(const Jet2& u, double f0, double f1, double f2) {
  return {f0,
          f1 * u.gx,
          f1 * u.gy,
          f2 * u.gx * u.gx + f1 * u.hxx,
          f2 * u.gx * u.gy + f1 * u.hxy,
          f2 * u.gy * u.gy + f1 * u.hyy};
}

/// Composition f(a, b) of a bivariate function with its partials up to order two.
inline Jet2 lift2(const Jet2& a, const Jet2& b, double f, double fa, double fb, double faa,
                  double fab, double fbb) {
  return {f,
          fa * a.gx + fb * b.gx,
          fa * a.gy + fb * b.gy,
          fa * a.hxx + fb * b.hxx + faa * a.gx * a.gx + fbb * b.gx * b.gx + 2.0 * fab * a.gx * b.gx,
          fa * a.hxy + fb * b.hxy + faa * a.gx * a.gy + fbb * b.gx * b.gy +
              fab * (a.gx * b.gy + a.gy * b.gx),
          fa * a.hyy + fb * b.hyy + faa * a.gy * a.gy + fbb * b.gy * b.gy + 2.0 * fab * a.gy * b.gy};
}

inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.gx, -a.gy, -a.hxx, -a.hxy, -a.hyy}; }
inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator+(Jet2 a, double b) { a.v += b; return a; }
inline Jet2 operator+(double a, Jet2 b) { b.v += a; return b; }
inline Jet2 operator-(Jet2 a, double b) { a.v -= b; return a; }
inline Jet2 operator-(double a, const Jet2& b) { return a + (-b); }
inline Jet2 operator*(Jet2 a, double s) { return a *= s; }
inline Jet2 operator*(double s, Jet2 a) { return a *= s; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v,
          a.v * b.gx + b.v * a.gx,
          a.v * b.gy + b.v * a.gy,
          a.v * b.hxx + b.v * a.hxx + 2.0 * a.gx * b.gx,
          a.v * b.hxy + b.v * a.hxy + a.gx * b.gy + a.gy * b.gx,
          a.v * b.hyy + b.v * a.hyy + 2.0 * a.gy * b.gy};
}

inline Jet2 reciprocal(const Jet2& u) {
  const double r = 1.0 / u.v;
  return lift(u, r, -r * r, 2.0 * r * r * r);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }
inline Jet2 operator/(const Jet2& a, double s) { return a * (1.0 / s); }
inline Jet2 operator/(double s, const Jet2& b) { return s * reciprocal(b); }

inline Jet2 square(const Jet2& u) { return u * u; }

inline Jet2 sqrt(const Jet2& u) {
  const double s = std::sqrt(u.v);
  return lift(u, s, 0.5 / s, -0.25 / (s * u.v));
}

inline Jet2 exp(const Jet2& u) {
  const double e = std::exp(u.v);
  return lift(u, e, e, e);
}

inline Jet2 log(const Jet2& u) { return lift(u, std::log(u.v), 1.0 / u.v, -1.0 / (u.v * u.v)); }

inline Jet2 sin(const Jet2& u) {
  const double s = std::sin(u.v), c = std::cos(u.v);
  return lift(u, s, c, -s);
}

inline Jet2 cos(const Jet2& u) {
  const double s = std::sin(u.v), c = std::cos(u.v);
  return lift(u, c, -s, -c);
}

inline Jet2 abs(const Jet2& u) { return u.v < 0.0 ? -u : u; }

/// u^p for real p; u must be positive unless p is a non-negative integer.
inline Jet2 pow(const Jet2& u, double p) {
  const double f0 = std::pow(u.v, p);
  const double f1 = p * std::pow(u.v, p - 1.0);
  const double f2 = p * (p - 1.0) * std::pow(u.v, p - 2.0);
  return lift(u, f0, f1, f2);
}

/// Branch of the polar angle of (x, y), cut along the negative x half-axis.
inline Jet2 atan2(const Jet2& y, const Jet2& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  const double r4 = r2 * r2;
  // partials of atan2(Y, X) in the order (Y, X)
  return lift2(y, x, std::atan2(y.v, x.v), x.v / r2, -y.v / r2, -2.0 * x.v * y.v / r4,
               (y.v * y.v - x.v * x.v) / r4, 2.0 * x.v * y.v / r4);
}

}  // namespace qfi
