#pragma once

// Potentials V(x, y) on the Euclidean plane as evaluable scalar fields.

#include <array>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>

#include "qfi/jet.hpp"
#include "qfi/univariate.hpp"

namespace qfi {

using Vec2 = std::array<double, 2>;

/// Symmetric 2x2 matrix; the off-diagonal entry is stored once.
struct Sym2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
};

/// Named real and function-valued parameters of a potential.
struct ParamValues {
  std::map<std::string, double> reals;
  std::map<std::string, Fn1> functions;

  double real(const std::string& name) const;
  const Fn1& function(const std::string& name) const;
};

class PotentialSpec {
 public:
  /// V as a function of seeded coordinate jets.
  using Field = std::function<Jet2(const Jet2& x, const Jet2& y)>;
  /// Euclidean distance to the singular set (+inf when there is none).
  using Distance = std::function<double(double x, double y)>;

  static constexpr double kNoSingularity = std::numeric_limits<double>::infinity();

  PotentialSpec(std::string name, ParamValues params, Field field, Distance singular_distance,
                std::string singular_description = "none");

  const std::string& name() const { return name_; }
  const ParamValues& params() const { return params_; }
  const std::string& singular_description() const { return singular_description_; }

  double singular_distance(double x, double y) const { return distance_(x, y); }
  bool is_singular(double x, double y) const;

  /// Value, gradient and Hessian at (x, y). Throws SingularPoint.
  Jet2 jet(double x, double y) const;

  /// V composed with arbitrary coordinate jets (chain rule through x(.), y(.)).
  Jet2 at(const Jet2& x, const Jet2& y) const;

  double value(double x, double y) const { return jet(x, y).v; }
  Vec2 gradient(double x, double y) const;
  Sym2 hessian(double x, double y) const;

  /// The same potential multiplied by a constant factor.
  PotentialSpec scaled(double factor) const;

 private:
  std::string name_;
  ParamValues params_;
  Field field_;
  Distance distance_;
  std::string singular_description_;
};

/// Points closer than this to the singular set count as singular.
inline constexpr double kSingularEps = 1e-12;

double evaluate(const PotentialSpec& spec, double x, double y);

/// Central-difference derivatives; the singular-set check covers the whole stencil.
Vec2 fd_gradient(const PotentialSpec& spec, double x, double y, double h = 1e-4);
Sym2 fd_hessian(const PotentialSpec& spec, double x, double y, double h = 1e-4);

// Distance helpers for building singular sets.
double distance_to_point(double x, double y, double px, double py);
/// Distance to the line {(x, y) : a x + b y = c}.
double distance_to_line(double x, double y, double a, double b, double c);

}  // namespace qfi
