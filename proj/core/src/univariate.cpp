#include "qfi/univariate.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfi/errors.hpp"

namespace qfi {

namespace {

std::string poly_name(const std::vector<double>& c) {
  std::ostringstream os;
  os.precision(17);
  os << "poly[";
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
  os << "]";
  return os.str();
}

}  // namespace

Fn1 polynomial(std::vector<double> coeffs) {
  auto name = poly_name(coeffs);
  auto copy = coeffs;
  return Fn1(std::move(name), [c = std::move(coeffs)](double u) -> std::array<double, 3> {
    // Horner for the value and both derivatives
    double f = 0.0, d1 = 0.0, d2 = 0.0;
    for (auto k = c.size(); k-- > 0;) {
      d2 = d2 * u + 2.0 * d1;
      d1 = d1 * u + f;
      f = f * u + c[k];
    }
    return {f, d1, d2};
  }, std::move(copy));
}

Fn1 named_function(const std::string& name) {
  if (name == "zero") return Fn1(name, [](double) -> std::array<double, 3> { return {0, 0, 0}; });
  if (name == "linear") return Fn1(name, [](double u) -> std::array<double, 3> { return {u, 1, 0}; });
  if (name == "quadratic")
    return Fn1(name, [](double u) -> std::array<double, 3> { return {0.5 * u * u, u, 1}; });
  if (name == "square")
    return Fn1(name, [](double u) -> std::array<double, 3> { return {u * u, 2 * u, 2}; });
  if (name == "cubic")
    return Fn1(name, [](double u) -> std::array<double, 3> { return {u * u * u, 3 * u * u, 6 * u}; });
  if (name == "quartic")
    return Fn1(name, [](double u) -> std::array<double, 3> {
      return {u * u * u * u, 4 * u * u * u, 12 * u * u};
    });
  if (name == "inverse_square")
    return Fn1(name, [](double u) -> std::array<double, 3> {
      const double i2 = 1.0 / (u * u);
      return {i2, -2.0 * i2 / u, 6.0 * i2 * i2};
    });
  throw UnknownName("unknown function '" + name + "'");
}

std::vector<std::string> named_function_names() {
  return {"zero", "linear", "quadratic", "square", "cubic", "quartic", "inverse_square"};
}

nlohmann::json Fn1::to_json() const {
  if (!poly_.empty()) return nlohmann::json{{"poly", poly_}};
  return name_;
}

Fn1 function_from_json(const nlohmann::json& j) {
  if (j.is_string()) return named_function(j.get<std::string>());
  if (j.is_object() && j.contains("poly") && j.size() == 1) {
    const auto& p = j.at("poly");
    if (!p.is_array() || p.empty()) throw BadParams("'poly' must be a non-empty array");
    std::vector<double> c;
    for (const auto& e : p) {
      if (!e.is_number()) throw BadParams("'poly' coefficients must be numbers");
      c.push_back(e.get<double>());
    }
    return polynomial(std::move(c));
  }
  throw BadParams("function parameter must be a name or {\"poly\": [...]}, got " + j.dump());
}

}  // namespace qfi
