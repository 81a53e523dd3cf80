// Discovery against independent routes: the Bertrand-Darboux left side
// coded from its printed form, nullspace dimensions from a finite-difference
// collocation on a regular grid, scalar parts in closed form, and
// Integral-3 hits checked by conserving the exponential integral they induce.

#include <cmath>

#include <Eigen/Dense>
#include <doctest.h>
#include <nlohmann/json.hpp>

#include "generators.hpp"
#include "oracle_rk4.hpp"
#include "qfi/discovery.hpp"
#include "qfi/potentials.hpp"

using namespace qfi;
using nlohmann::json;

namespace {

struct Fd {
  double vx, vy, vxx, vxy, vyy;
};

// Second-order central differences of V only.
Fd fd_derivs(const PotentialSpec& spec, double x, double y, double h = 1e-4) {
  auto v = [&](double dx, double dy) { return spec.value(x + dx, y + dy); };
  return {(v(h, 0) - v(-h, 0)) / (2 * h),
          (v(0, h) - v(0, -h)) / (2 * h),
          (v(h, 0) - 2 * v(0, 0) + v(-h, 0)) / (h * h),
          (v(h, h) - v(h, -h) - v(-h, h) + v(-h, -h)) / (4 * h * h),
          (v(0, h) - 2 * v(0, 0) + v(0, -h)) / (h * h)};
}

double bd_printed(const KTParams& p, const Fd& d, double x, double y) {
  const auto [a, b, g, A, B, C] = p.to_array();
  return (g * x * y + a * x + b * y - C) * (d.vxx - d.vyy) +
         (g * (y * y - x * x) - 2 * b * x + 2 * a * y + A - B) * d.vxy - 3 * (g * x + b) * d.vy +
         3 * (g * y + a) * d.vx;
}

// Nullspace dimension of the BD operator from a 7 x 7 grid of [-2.4, 2.4]^2.
int grid_dimension(const PotentialSpec& spec) {
  Eigen::MatrixXd m(0, 6);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      const double x = -2.4 + 0.8 * i + 0.05, y = -2.4 + 0.8 * j + 0.07;
      if (spec.singular_distance(x, y) < 0.2 || std::hypot(x, y) < 0.3) continue;
      const Fd d = fd_derivs(spec, x, y);
      Eigen::RowVectorXd row(6);
      for (int k = 0; k < 6; ++k) {
        std::array<double, 6> e{};
        e[k] = 1.0;
        row(k) = bd_printed(KTParams::from_array(e.data()), d, x, y);
      }
      if (row.norm() > 0) row /= row.norm();
      m.conservativeResize(m.rows() + 1, 6);
      m.row(m.rows() - 1) = row;
    }
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  int rank = 0;
  for (int k = 0; k < sv.size(); ++k) rank += sv(k) > 1e-5 * std::max(1.0, sv(0));
  return 6 - rank;
}

}  // namespace

TEST_CASE("library BD residual matches the printed left side") {
  testing::Gen gen(3);
  for (const char* name : {"Vs1", "V22", "generic", "V28"}) {
    CAPTURE(name);
    const auto spec = make_potential(name);
    for (int i = 0; i < 50; ++i) {
      const Vec2 p = gen.point(spec, 0.3);
      const KTParams kt = gen.kt();
      const Jet2 j = spec.jet(p[0], p[1]);
      const Fd exact{j.gx, j.gy, j.hxx, j.hxy, j.hyy};
      CHECK(testing::close_rel(bd_residual(kt, spec, p[0], p[1]), bd_printed(kt, exact, p[0], p[1]), 1e-12));
    }
  }
}

TEST_CASE("nullspace dimension agrees with the grid oracle") {
  const std::vector<std::pair<std::string, json>> cases{
      {"free", json::object()},
      {"V27", {{"F1", "quartic"}, {"F2", "cubic"}}},
      {"Vs1", {{"k", 1.0}, {"b", 1.0}, {"c", 1.0}}},
      {"generic", json::object()},
      {"Vs2", json::object()},
      {"V3b", json::object()},
      {"V28", json::object()},
      {"V24", json::object()}};
  for (const auto& [name, params] : cases) {
    CAPTURE(name);
    const auto spec = make_potential(name, params);
    CHECK(nullspace_solve(bd_operator(), spec).basis.size() == static_cast<std::size_t>(grid_dimension(spec)));
  }
  CHECK(grid_dimension(make_potential("free")) == 6);
  CHECK(grid_dimension(make_potential("V27", {{"F1", "quartic"}, {"F2", "cubic"}})) == 2);
  CHECK(grid_dimension(make_potential("Vs1", {{"k", 1.0}, {"b", 1.0}, {"c", 1.0}})) == 3);
  CHECK(grid_dimension(make_potential("generic")) == 1);
}

TEST_CASE("reconstructed scalar parts match closed forms") {
  const double k = 1.0, b = 0.7, c = 0.4;
  const auto vs1 = make_potential("Vs1", {{"k", k}, {"b", b}, {"c", c}});
  // angular tensor: G = 2 b y^2/x^2 + 2 c x^2/y^2 up to a constant
  auto g_ang = [&](double x, double y) { return 2 * b * y * y / (x * x) + 2 * c * x * x / (y * y); };
  // x-separation tensor: G = k x^2 + 2 b / x^2 up to a constant
  auto g_sep = [&](double x, double) { return k * x * x + 2 * b / (x * x); };
  for (Vec2 t : {Vec2{0.5, 2.0}, Vec2{2.2, 0.6}, Vec2{1.7, 1.9}}) {
    const double ang = reconstruct_scalar({0, 0, 1, 0, 0, 0}, vs1, {1, 1}, t);
    CHECK(ang == doctest::Approx(g_ang(t[0], t[1]) - g_ang(1, 1)).epsilon(1e-11));
    const double sep = reconstruct_scalar({0, 0, 0, 1, 0, 0}, vs1, {1, 1}, t);
    CHECK(sep == doctest::Approx(g_sep(t[0], t[1]) - g_sep(1, 1)).epsilon(1e-11));
  }
}

TEST_CASE("Integral-3 hits induce conserved exponential integrals") {
  const auto spec = make_potential("V3b", {{"k", 1.0}});
  const auto scan = integral3_scan(spec);
  REQUIRE(!scan.hits.empty());

  // I = e^{lt} [-L_(a;b) qd^a qd^b + l L_a qd^a + L_a V^a]
  auto integral = [&](const LVecParams& p, const State& s) {
    const double x = s.x, y = s.y, l = p.lambda;
    const double lx = -2 * p.beta * y * y + 2 * p.alpha * x * y + p.A * x + p.a1 * y + p.a4;
    const double ly = -2 * p.alpha * x * x + 2 * p.beta * x * y + p.a3 * x + p.B * y + p.a2;
    const double kxx = 2 * p.alpha * y + p.A, kyy = 2 * p.beta * x + p.B;
    const double kxy = -p.beta * y - p.alpha * x + 0.5 * (p.a1 + p.a3);
    const Vec2 dv = spec.gradient(x, y);
    const double quad = kxx * s.vx * s.vx + 2 * kxy * s.vx * s.vy + kyy * s.vy * s.vy;
    return std::exp(l * s.t) * (-quad + l * (lx * s.vx + ly * s.vy) + lx * dv[0] + ly * dv[1]);
  };

  const auto orbit = testing::oracle_rk4(spec, {0, 0.3, -0.2, 0.1, 0.25}, 1e-3, 2000);
  for (const auto& hit : scan.hits) {
    CAPTURE(hit.lambda);
    for (const auto& p : hit.basis) {
      const double i0 = integral(p, orbit.front());
      double drift = 0.0;
      for (const auto& s : orbit) drift = std::max(drift, std::abs(integral(p, s) - i0));
      CHECK(drift <= 1e-8 * std::exp(hit.lambda * 2.0));
    }
  }

  // off-resonance the same construction is not conserved
  testing::Gen gen(5);
  const LVecParams off = gen.lvec(0.7);
  const double i0 = integral(off, orbit.front());
  double drift = 0.0;
  for (const auto& s : orbit) drift = std::max(drift, std::abs(integral(off, s) - i0));
  CHECK(drift > 1e-3);
}
