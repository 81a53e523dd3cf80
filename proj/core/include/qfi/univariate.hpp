#pragma once

// Twice-differentiable functions of one variable, used for the free
// function parameters (F, F1, F2) of the potential families.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qfi/jet.hpp"

namespace qfi {

class Fn1 {
 public:
  /// Returns {f(u), f'(u), f''(u)}.
  using Eval = std::function<std::array<double, 3>(double)>;

  Fn1() = default;
  Fn1(std::string name, Eval eval, std::vector<double> poly = {})
      : name_(std::move(name)), eval_(std::move(eval)), poly_(std::move(poly)) {}

  const std::string& name() const { return name_; }
  std::array<double, 3> derivatives(double u) const { return eval_(u); }
  double operator()(double u) const { return eval_(u)[0]; }
  Jet2 operator()(const Jet2& u) const {
    const auto d = eval_(u.v);
    return lift(u, d[0], d[1], d[2]);
  }

  /// JSON form this function was built from (a name or {"poly": [...]}).
  nlohmann::json to_json() const;

 private:
  std::string name_;
  Eval eval_;
  std::vector<double> poly_;  // coefficients when built by polynomial()
};

/// sum_k coeffs[k] * u^k
Fn1 polynomial(std::vector<double> coeffs);

/// Built-in named closures: zero, linear, quadratic (u^2/2), square, cubic,
/// quartic, inverse_square (1/u^2). Throws UnknownName.
Fn1 named_function(const std::string& name);

std::vector<std::string> named_function_names();

/// Accepts a name string or an object {"poly": [c0, c1, ...]}.
Fn1 function_from_json(const nlohmann::json& j);

}  // namespace qfi
