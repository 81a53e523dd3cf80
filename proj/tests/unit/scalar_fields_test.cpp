#include <cmath>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "generators.hpp"
#include "qfi/errors.hpp"
#include "qfi/potential.hpp"
#include "qfi/potentials.hpp"

using namespace qfi;
using nlohmann::json;

TEST_CASE("evaluate at documented points") {
  CHECK(evaluate(make_potential("V1a", {{"c", 2.0}, {"lambda", 3.0}}), 1, 1) == doctest::Approx(5.0));
  CHECK(evaluate(make_potential("V3b", {{"k", 1.0}}), 0, 0) == 0.0);
  CHECK(evaluate(make_potential("Vs1", {{"k", 1.0}, {"b", 1.0}, {"c", 1.0}}), 1, 1) == doctest::Approx(3.0));
}

TEST_CASE("evaluate on the singular set throws") {
  const auto vs1 = make_potential("Vs1");
  CHECK_THROWS_AS(evaluate(vs1, 0.0, 1.0), SingularPoint);
  CHECK_THROWS_AS(vs1.jet(1.0, 0.0), SingularPoint);
  const auto v22 = make_potential("V22", {{"A", 4.0}});
  CHECK_THROWS_AS(evaluate(v22, 2.0, 0.0), SingularPoint);
  CHECK_THROWS_AS(evaluate(v22, -2.0, 0.0), SingularPoint);
  CHECK_NOTHROW(evaluate(v22, 0.0, 0.0));
}

TEST_CASE("finite differences at documented points") {
  const auto v1a = make_potential("V1a", {{"c", 2.0}, {"lambda", 3.0}});
  const Vec2 g = fd_gradient(v1a, -0.7, 1.9);
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(g[1] == doctest::Approx(3.0).epsilon(1e-9));

  const Vec2 g3 = fd_gradient(make_potential("V3b", {{"k", 1.0}}), 1, 2);
  CHECK(g3[0] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(g3[1] == doctest::Approx(-2.0).epsilon(1e-8));

  // b / x^2 alone: d2/dx2 x^-2 = 6 x^-4
  const auto vs1 = make_potential("Vs1", {{"k", 0.0}, {"b", 1.0}, {"c", 0.0}});
  CHECK(vs1.hessian(1, 0).xx == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(fd_hessian(vs1, 1, 0).xx == doctest::Approx(6.0).epsilon(1e-5));
}

TEST_CASE("fd stencil touching the singular set throws") {
  const auto vs1 = make_potential("Vs1");
  CHECK_THROWS_AS(fd_gradient(vs1, 1e-4, 1.0), SingularPoint);
}

TEST_CASE("analytic derivatives agree with central differences for every family") {
  for (const auto& fam : potential_families()) {
    CAPTURE(fam.name);
    const auto spec = make_potential(fam.name);
    testing::Gen gen(17);
    for (int i = 0; i < 100; ++i) {
      const Vec2 p = gen.point(spec);
      const Jet2 j = spec.jet(p[0], p[1]);
      const Vec2 g = fd_gradient(spec, p[0], p[1]);
      const Sym2 h = fd_hessian(spec, p[0], p[1]);
      CHECK(std::abs(j.gx - g[0]) <= 1e-5 * (1 + std::abs(j.gx)));
      CHECK(std::abs(j.gy - g[1]) <= 1e-5 * (1 + std::abs(j.gy)));
      CHECK(std::abs(j.hxx - h.xx) <= 1e-5 * (1 + std::abs(j.hxx)));
      CHECK(std::abs(j.hxy - h.xy) <= 1e-5 * (1 + std::abs(j.hxy)));
      CHECK(std::abs(j.hyy - h.yy) <= 1e-5 * (1 + std::abs(j.hyy)));
    }
  }
}

TEST_CASE("jet arithmetic follows the chain rule") {
  // f = sin(x y) / (1 + x^2) + exp(y) sqrt(x^2 + 1)
  auto f = [](const Jet2& x, const Jet2& y) { return sin(x * y) / (1.0 + x * x) + exp(y) * sqrt(x * x + 1.0); };
  const auto spec = potential_from_closure("probe", f);
  testing::Gen gen(5);
  for (int i = 0; i < 50; ++i) {
    const Vec2 p = gen.point(spec);
    const Jet2 j = spec.jet(p[0], p[1]);
    const Sym2 h = fd_hessian(spec, p[0], p[1]);
    CHECK(testing::close_rel(j.hxy, h.xy, 1e-5));
    CHECK(testing::close_rel(j.hxx, h.xx, 1e-5));
  }
}

TEST_CASE("rescaled potential scales every derivative") {
  const auto v = make_potential("Vs2");
  const auto w = v.scaled(2.0);
  const Jet2 a = v.jet(0.8, 0.6), b = w.jet(0.8, 0.6);
  CHECK(b.v == doctest::Approx(2 * a.v));
  CHECK(b.hxy == doctest::Approx(2 * a.hxy));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(make_potential("V1b", {{"lambda", 0.0}}), BadParams);
  CHECK_THROWS_AS(make_potential("V3b", {{"k", 0.0}}), BadParams);
  CHECK_THROWS_AS(make_potential("V22", {{"A", -1.0}}), BadParams);
  CHECK_THROWS_AS(make_potential("V3a", {{"lambda", 0.0}}), BadParams);
  CHECK_THROWS_AS(make_potential("V1a", {{"nope", 1.0}}), BadParams);
  CHECK_THROWS_AS(make_potential("V1a", {{"c", "two"}}), BadParams);
  CHECK_THROWS_AS(make_potential("V27", {{"F1", "no_such_closure"}}), Error);
  CHECK_THROWS_AS(make_potential("nope"), UnknownName);
}

TEST_CASE("JSON instantiation") {
  const auto spec = potential_from_json({{"name", "V1a"}, {"params", {{"c", 2.0}}}});
  CHECK(spec.params().real("c") == 2.0);
  CHECK(spec.params().real("lambda") == 0.5);  // default
  CHECK_THROWS_AS(potential_from_json({{"name", "V1a"}}), BadParams);
  CHECK_THROWS_AS(potential_from_json({{"name", "missing"}, {"params", json::object()}}), UnknownName);

  const auto v27 = make_potential("V27", {{"F1", {{"poly", {0, 0, 1}}}}, {"F2", "cubic"}});
  CHECK(evaluate(v27, 2, 1) == doctest::Approx(4 + 1));
  const json round = params_to_json(v27.params());
  CHECK(round["F2"] == "cubic");
  CHECK(round["F1"]["poly"] == json::array({0.0, 0.0, 1.0}));
}

TEST_CASE("closures supplied as code") {
  const auto spec = potential_from_closure(
      "ring", [](const Jet2& x, const Jet2& y) { return 1.0 / (x * x + y * y); },
      [](double x, double y) { return std::hypot(x, y); });
  CHECK(evaluate(spec, 0, 2) == doctest::Approx(0.25));
  CHECK_THROWS_AS(evaluate(spec, 0, 0), SingularPoint);
  CHECK(spec.singular_description() == "user-defined");
}

TEST_CASE("V21b is V21a with l = 1/2 and half the coupling") {
  const double k = 0.7;
  const auto b = make_potential("V21b", {{"k", k}});
  const auto a = make_potential("V21a", {{"k", k / 2}, {"l", 0.5}});
  testing::Gen gen(3);
  for (int i = 0; i < 50; ++i) {
    const Vec2 p = gen.point(b);
    CHECK(evaluate(b, p[0], p[1]) == doctest::Approx(evaluate(a, p[0], p[1])).epsilon(1e-14));
  }
}

TEST_CASE("V24b is V24 with x and y exchanged") {
  const auto a = make_potential("V24"), b = make_potential("V24b");
  testing::Gen gen(4);
  for (int i = 0; i < 50; ++i) {
    const Vec2 p = gen.point(a);
    CHECK(evaluate(b, p[0], p[1]) == doctest::Approx(evaluate(a, p[1], p[0])).epsilon(1e-14));
  }
}
