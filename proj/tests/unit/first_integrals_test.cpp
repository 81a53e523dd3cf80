#include <cmath>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "generators.hpp"
#include "qfi/catalog.hpp"
#include "qfi/first_integral.hpp"
#include "qfi/potentials.hpp"

using namespace qfi;

namespace {

// Bracket of a PhaseJet with a bracket {G, K} whose gradient is exact.
double nested_bracket(const PhaseJet& f, const PhaseJet& g, const PhaseJet& k) {
  PhaseJet gk;
  gk.value = poisson_bracket(g, k);
  gk.grad = bracket_gradient(g, k);
  return poisson_bracket(f, gk);
}

}  // namespace

TEST_CASE("evaluate_fi at documented states") {
  const auto v3b = instantiate("V3b");
  CHECK(evaluate_fi(v3b.fi("L41b"), {0, 1, 0, 0, 1}) == doctest::Approx(-1.0));

  const auto v1a = instantiate("V1a", {{"c", 1.0}, {"lambda", 1.0}});
  CHECK(evaluate_fi(v1a.fi("H"), {0, 0, 0, 0, 0}) == 0.0);

  const auto v1b = instantiate("V1b", {{"lambda", 1.0}});
  CHECK(evaluate_fi(v1b.fi("L23"), {1, 0.3, 2, 0.1, 3}) == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("flow derivative of genuine and corrupted integrals") {
  const auto v1a = instantiate("V1a");
  testing::Gen gen(2);
  for (int i = 0; i < 20; ++i) {
    const State s = gen.state(v1a.potential);
    CHECK(std::abs(flow_derivative(v1a.fi("H"), v1a.potential, s)) <= 1e-12);
    CHECK(flow_derivative(v1a.fi("L11"), v1a.potential, s) == 0.0);
  }
  // H built from 2V is not conserved by the flow of V
  const auto wrong = hamiltonian(v1a.potential.scaled(2.0));
  CHECK(std::abs(flow_derivative(wrong, v1a.potential, {0, 0.4, 0.1, 1.0, 0.5})) > 0.1);
}

TEST_CASE("documented bracket values") {
  testing::Gen gen(31);
  for (double b : {0.0, 0.5, 2.0}) {
    const auto v1 = instantiate("V1", {{"b", b}});
    for (int i = 0; i < 10; ++i)
      CHECK(poisson_bracket(v1.fi("L21"), v1.fi("L22"), gen.state(v1.potential)) ==
            doctest::Approx(1 + b * b).epsilon(1e-12));
  }
  const auto v1a = instantiate("V1a", {{"c", 0.8}, {"lambda", 1.3}});
  for (int i = 0; i < 10; ++i)
    CHECK(poisson_bracket(v1a.fi("I2"), v1a.fi("I3"), gen.state(v1a.potential)) ==
          doctest::Approx(-0.8 * 1.3).epsilon(1e-12));

  const auto v3a = instantiate("V3a", {{"lambda", 1.7}, {"b1", 0.4}, {"b2", -0.9}});
  for (int i = 0; i < 10; ++i) {
    const State s = gen.state(v3a.potential);
    const double lhs = poisson_bracket(v3a.fi("L41"), v3a.fi("Q41"), s);
    CHECK(std::abs(lhs + evaluate_fi(v3a.fi("Q43"), s) - 1.7 * 0.4 * -0.9) <= 1e-10);
  }
}

TEST_CASE("independence ranks") {
  const auto v1a = instantiate("V1a");
  const auto states = random_states(v1a.potential, 10, 4);
  CHECK(independence_rank(v1a.select({"H", "I2", "I3"}), states) == 3);
  CHECK(independence_rank({v1a.fi("H"), v1a.fi("H").scaled(2.0)}, states) == 1);

  const auto v2 = instantiate("V2");
  CHECK(independence_rank(v2.select({"Q31", "Q32", "L31"}), random_states(v2.potential, 10, 4)) == 3);
}

TEST_CASE("Noether readout") {
  const auto v1a = instantiate("V1a", {{"c", 0.6}});
  const auto h = noether_readout(v1a.fi("H"));
  const State s{0.3, 0.5, -0.2, 0.7, 1.1};
  const Vec2 eta = h.eta(s);
  CHECK(eta[0] == doctest::Approx(-0.35));
  CHECK(eta[1] == doctest::Approx(-0.55));
  CHECK(h.gauge_f(s.t, s.x, s.y) == doctest::Approx(v1a.potential.value(s.x, s.y)));

  const auto l = noether_readout(v1a.fi("L11"));
  const Vec2 el = l.eta(s);
  CHECK(el[0] == doctest::Approx(-1.0));
  CHECK(el[1] == 0.0);
  CHECK(l.gauge_f(s.t, s.x, s.y) == doctest::Approx(0.6 * s.t));

  for (const char* name : {"V3b", "V274", "Vs4", "V1b"}) {
    const auto e = instantiate(name);
    for (const auto& s2 : random_states(e.potential, 20, 9))
      for (const auto& fi : e.fis) {
        CAPTURE(fi.name());
        const double i = evaluate_fi(fi, s2);
        CHECK(noether_readout(fi).reconstruct(s2) == doctest::Approx(i).epsilon(1e-12).scale(1.0));
      }
  }
}

TEST_CASE("bracket antisymmetry, bilinearity and Jacobi") {
  for (const auto& name : entry_names()) {
    CAPTURE(name);
    const auto e = instantiate(name);
    const auto& fis = e.fis;
    for (const auto& s : random_states(e.potential, 5, 13)) {
      std::vector<PhaseJet> jets;
      for (const auto& f : fis) jets.push_back(phase_jet(f, s));
      for (std::size_t i = 0; i < jets.size(); ++i)
        for (std::size_t j = 0; j < jets.size(); ++j) {
          CHECK(poisson_bracket(jets[i], jets[j]) + poisson_bracket(jets[j], jets[i]) == 0.0);
          for (std::size_t k = 0; k < jets.size(); ++k) {
            const double jac = nested_bracket(jets[i], jets[j], jets[k]) + nested_bracket(jets[j], jets[k], jets[i]) +
                               nested_bracket(jets[k], jets[i], jets[j]);
            CHECK(std::abs(jac) <= 1e-9);
          }
        }
      if (fis.size() >= 3) {
        const auto combo = linear_combination("C", {{2.5, fis[1]}, {-0.75, fis[2]}});
        const double lhs = poisson_bracket(fis[0], combo, s);
        const double rhs = 2.5 * poisson_bracket(fis[0], fis[1], s) - 0.75 * poisson_bracket(fis[0], fis[2], s);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(rhs)));
      }
    }
  }
}

TEST_CASE("flow derivative equals dI/dt + {I, H}") {
  for (const auto& name : entry_names()) {
    CAPTURE(name);
    const auto e = instantiate(name);
    const auto h = hamiltonian(e.potential);
    for (const auto& s : random_states(e.potential, 10, 21))
      for (const auto& fi : e.fis) {
        const double direct = flow_derivative(fi, e.potential, s);
        const double bracket = phase_jet(fi, s).dt + poisson_bracket(fi, h, s);
        CHECK(std::abs(direct - bracket) <= 1e-10 * (1 + std::abs(evaluate_fi(fi, s))));
      }
  }
}

TEST_CASE("{H, L22} evaluates to L21") {
  const auto v1 = instantiate("V1");
  for (const auto& s : random_states(v1.potential, 20, 8))
    CHECK(poisson_bracket(v1.fi("H"), v1.fi("L22"), s) ==
          doctest::Approx(evaluate_fi(v1.fi("L21"), s)).epsilon(1e-12));
}

TEST_CASE("every catalog integral has vanishing flow derivative") {
  for (const auto& name : entry_names()) {
    CAPTURE(name);
    const auto e = instantiate(name);
    for (const auto& s : random_states(e.potential, 100, 33))
      for (const auto& fi : e.fis) {
        CAPTURE(fi.name());
        CHECK(std::abs(flow_derivative(fi, e.potential, s)) <= 1e-10 * (1 + std::abs(evaluate_fi(fi, s))));
      }
  }
}

TEST_CASE("phase gradients match finite differences") {
  for (const char* name : {"V3b", "Vs4", "V22", "V274"}) {
    CAPTURE(name);
    const auto e = instantiate(name);
    for (const auto& s : random_states(e.potential, 5, 41))
      for (const auto& fi : e.fis) {
        const auto j = phase_jet(fi, s);
        const double h = 1e-5;
        for (int a = 0; a < 4; ++a) {
          State p = s, m = s;
          double* pp[4] = {&p.x, &p.y, &p.vx, &p.vy};
          double* mm[4] = {&m.x, &m.y, &m.vx, &m.vy};
          *pp[a] += h;
          *mm[a] -= h;
          const double fd = (evaluate_fi(fi, p) - evaluate_fi(fi, m)) / (2 * h);
          CHECK(std::abs(fd - j.grad[a]) <= 1e-5 * (1 + std::abs(j.grad[a])));
        }
      }
  }
}

TEST_CASE("time factors and tags") {
  CHECK(TimeFactor::power(2).value(3.0) == 9.0);
  CHECK(TimeFactor::power(0).derivative(3.0) == 0.0);
  CHECK(TimeFactor::exponential(-0.5).derivative(2.0) == doctest::Approx(-0.5 * std::exp(-1.0)));
  CHECK_THROWS_AS(TimeFactor::exponential(0.0), BadParams);

  const auto v1b = instantiate("V1b");
  CHECK(v1b.fi("H").time_dependence() == TimeDependence::Autonomous);
  CHECK(v1b.fi("L11").time_dependence() == TimeDependence::Polynomial);
  CHECK(v1b.fi("L23").time_dependence() == TimeDependence::Exponential);
  CHECK(v1b.fi("L11").kind() == FIKind::LFI);
  CHECK(v1b.fi("H").kind() == FIKind::QFI);
}

TEST_CASE("FI trace export") {
  const auto v1a = instantiate("V1a");
  const auto traj = integrate(v1a.potential, v1a.reference_ics, 0.1, 2);
  std::ostringstream os;
  write_fi_trace(os, traj, v1a.select({"H", "L11"}));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,H,L11");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);
}
