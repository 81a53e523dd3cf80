#pragma once

// Closed-form and quadrature solutions of the equations of motion for the
// entries whose first integrals determine the orbit directly.

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "qfi/catalog.hpp"
#include "qfi/errors.hpp"

namespace qfi {

/// The quadrature integrand [2 (E - F)]^{-1/2} is not real on the path.
class QuadratureDomain : public Error {
 public:
  using Error::Error;
};

/// One-dimensional motion qdd = -F'(q) solved by inverting
///   t - t0 = +- integral dq / sqrt(2 (E - F(q))).
/// Turning points are located by an outward march and bracketed root
/// finding; near each turning point the substitution q = b - (b - m) u^2
/// removes the inverse square-root singularity.
class QuadratureInversion {
 public:
  /// Returns {F(q), F'(q)}.
  using Potential = std::function<std::array<double, 2>(double)>;

  QuadratureInversion(Potential f, double q0, double v0);

  /// q(t0 + tau). Throws QuadratureDomain when the orbit escapes.
  double position(double tau) const;

  double energy() const { return e_; }
  bool equilibrium() const { return equilibrium_; }
  /// Time between the two turning points, if the motion is bounded.
  std::optional<double> half_period() const;

 private:
  double F(double u) const;
  double dF(double u) const;
  std::optional<double> turning_point(double start, double dir) const;
  double duration(double lo, double hi) const;  // time from lo to hi, lo <= hi
  double branch_time(double u) const;           // signed time from u0 along the forward branch
  double branch_position(double sigma) const;

  Potential f_;
  double sign_ = 1.0;  // orientation that makes the initial motion point to +u
  double u0_ = 0.0;
  double e_ = 0.0;
  bool equilibrium_ = false;
  std::optional<double> a_, b_;  // turning points below and above u0
  double ta_ = 0.0, tb_ = 0.0;   // branch times from a to u0 and from u0 to b
};

struct ClosedFormSolution {
  std::function<Vec2(double t)> position;
  std::map<std::string, double> constants;  // fitted from the initial state
  std::string method;
};

/// V3b: exponentials fitted through L42+-, L43+-. V2: y from L31, x by
/// quadrature inversion of Q31. V27: both coordinates by quadrature.
/// Throws BadParams for other entries, QuadratureDomain.
ClosedFormSolution closed_form_solution(const CatalogEntry& entry, const State& s0);

}  // namespace qfi
