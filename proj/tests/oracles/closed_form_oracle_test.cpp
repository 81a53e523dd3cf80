// Closed-form solutions against the reference integrator and against
// elementary formulas.

#include <cmath>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "oracle_rk4.hpp"
#include "qfi/closed_form.hpp"

using namespace qfi;

namespace {

double max_error(const ClosedFormSolution& sol, const std::vector<State>& orbit) {
  double worst = 0.0;
  for (std::size_t i = 0; i < orbit.size(); i += 50) {
    const Vec2 p = sol.position(orbit[i].t);
    const double scale = std::max(1.0, std::hypot(orbit[i].x, orbit[i].y));
    worst = std::max(worst, std::hypot(p[0] - orbit[i].x, p[1] - orbit[i].y) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("closed forms follow the reference integrator on [0, 5]") {
  const std::vector<std::pair<const char*, State>> cases{
      {"V3b", {0, 0.2, -0.1, 0.05, 0.1}},
      {"V3b", {0.7, -0.4, 0.3, 0.0, -0.2}},
      {"V2", {0, 0.5, 0.5, 0.3, 0.2}},
      {"V2", {1.0, -1.2, 0.0, 0.0, 1.0}},
      {"V27", {0, 0.5, 0.7, 0.3, -0.2}},
      {"V27", {0.3, 1.5, -0.6, -0.8, 0.0}}};
  for (const auto& [name, s0] : cases) {
    CAPTURE(name);
    const auto e = instantiate(name);
    const auto sol = closed_form_solution(e, s0);
    const auto orbit = testing::oracle_rk4(e.potential, s0, 1e-3, 5000);
    CHECK(max_error(sol, orbit) <= 1e-6);
  }
}

TEST_CASE("V2 has the quadratic y(t)") {
  const double c = 0.8;
  const auto e = instantiate("V2", {{"c", c}});
  const State s0{0, 0.4, 0.3, -0.2, 0.9};
  const auto sol = closed_form_solution(e, s0);
  for (double t = 0; t <= 5; t += 0.25)
    CHECK(sol.position(t)[1] == doctest::Approx(0.3 + 0.9 * t - 0.5 * c * t * t).epsilon(1e-12));
}

TEST_CASE("V3b exponentials from the fitted constants") {
  const double k = 0.7;
  const auto e = instantiate("V3b", {{"k", k}});
  const State s0{0, 0.3, -0.5, 0.2, 0.4};
  const auto sol = closed_form_solution(e, s0);
  for (double t = 0; t <= 5; t += 0.5) {
    // x = x0 cosh kt + vx0 sinh(kt)/k
    CHECK(sol.position(t)[0] == doctest::Approx(0.3 * std::cosh(k * t) + 0.2 * std::sinh(k * t) / k).epsilon(1e-12));
    CHECK(sol.position(t)[1] == doctest::Approx(-0.5 * std::cosh(k * t) + 0.4 * std::sinh(k * t) / k).epsilon(1e-12));
  }
}

TEST_CASE("quartic well period from the complete elliptic integral") {
  // qdd = -4 q^3 from F = q^4, amplitude a: T = 2 K(1/sqrt 2) / a
  const double a = 0.8;
  QuadratureInversion q([](double u) { return std::array<double, 2>{std::pow(u, 4), 4 * std::pow(u, 3)}; }, a, 0.0);
  REQUIRE(q.half_period().has_value());
  const double K = std::comp_ellint_1(1.0 / std::sqrt(2.0));
  CHECK(2 * *q.half_period() == doctest::Approx(2 * K / a).epsilon(1e-9));
}
