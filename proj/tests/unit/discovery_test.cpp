#include <cmath>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "generators.hpp"
#include "qfi/catalog.hpp"
#include "qfi/discovery.hpp"
#include "qfi/potentials.hpp"

using namespace qfi;
using nlohmann::json;

namespace {

const json kSeparable = {{"F1", "quartic"}, {"F2", "cubic"}};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Distance of v from the span of an orthonormal basis.
double off_span(std::vector<double> v, const std::vector<std::vector<double>>& basis) {
  for (const auto& b : basis) {
    const double c = dot(v, b);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
  }
  return std::sqrt(dot(v, v));
}

}  // namespace

TEST_CASE("Bertrand-Darboux residual examples") {
  testing::Gen gen(1);
  const KTParams trivial{0, 0, 0, 1, 1, 0};
  for (const char* name : {"generic", "Vs2", "V22"}) {
    const auto spec = make_potential(name);
    const Vec2 p = gen.point(spec);
    CHECK(bd_residual(trivial, spec, p[0], p[1]) == 0.0);
  }
  const auto v27 = make_potential("V27", kSeparable);
  CHECK(std::abs(bd_residual({0, 0, 0, 1, 0, 0}, v27, 0.7, -1.3)) <= 1e-14);
  CHECK(std::abs(bd_residual({0, 0, 1, 0, 0, 0}, make_potential("V3b", {{"k", 1.0}}), 1, 2)) <= 1e-14);
  CHECK_THROWS_AS(bd_residual(trivial, make_potential("Vs1"), 0.0, 1.0), SingularPoint);
}

TEST_CASE("LFI residual examples") {
  CHECK(lfi_residual({0.3, -1.2, 0.8, 0}, make_potential("free"), 0.4, 2.0) == 0.0);
  const double c = 0.9, l = -0.4, b1 = 0.6, b2 = 1.7;
  const auto v1a = make_potential("V1a", {{"c", c}, {"lambda", l}});
  CHECK(std::abs(lfi_residual({b1, b2, 0, b1 * c + b2 * l}, v1a, -1.1, 0.5)) <= 1e-14);
  CHECK(std::abs(lfi_residual({0, 0, 1, 0}, make_potential("V3b"), 1.3, -0.4)) <= 1e-14);
}

TEST_CASE("Integral-3 residual examples") {
  const auto r0 = integral3_residuals({}, make_potential("generic"), 0.5, 0.5);
  CHECK(r0 == std::array<double, 3>{0, 0, 0});
  testing::Gen gen(8);
  const auto v27 = make_potential("V27", kSeparable);
  const auto r = integral3_residuals(gen.lvec(0.8), v27, 0.9, 1.1);
  CHECK(std::abs(r[0]) + std::abs(r[1]) + std::abs(r[2]) > 1e-3);
}

TEST_CASE("residuals are linear in the parameters") {
  testing::Gen gen(12);
  for (const char* name : {"generic", "Vs1", "V22", "V3b"}) {
    CAPTURE(name);
    const auto spec = make_potential(name);
    for (int i = 0; i < 20; ++i) {
      const Vec2 x = gen.point(spec);
      const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2);

      const auto p = gen.kt(), q = gen.kt();
      std::array<double, 6> mix;
      for (int k = 0; k < 6; ++k) mix[k] = a * p.to_array()[k] + b * q.to_array()[k];
      const double lhs = bd_residual(KTParams::from_array(mix.data()), spec, x[0], x[1]);
      const double rhs = a * bd_residual(p, spec, x[0], x[1]) + b * bd_residual(q, spec, x[0], x[1]);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(lhs)));

      const auto u = gen.kv(), w = gen.kv();
      std::array<double, 4> kmix;
      for (int k = 0; k < 4; ++k) kmix[k] = a * u.to_array()[k] + b * w.to_array()[k];
      const double l1 = lfi_residual(KVParams::from_array(kmix.data()), spec, x[0], x[1]);
      const double l2 = a * lfi_residual(u, spec, x[0], x[1]) + b * lfi_residual(w, spec, x[0], x[1]);
      CHECK(std::abs(l1 - l2) <= 1e-12 * (1 + std::abs(l1)));

      const auto m = gen.lvec(0.7), n = gen.lvec(0.7);
      std::array<double, 8> lmix;
      for (int k = 0; k < 8; ++k) lmix[k] = a * m.coefficients()[k] + b * n.coefficients()[k];
      const auto r = integral3_residuals(LVecParams::from_coefficients(lmix.data(), 0.7), spec, x[0], x[1]);
      const auto rm = integral3_residuals(m, spec, x[0], x[1]), rn = integral3_residuals(n, spec, x[0], x[1]);
      for (int k = 0; k < 3; ++k) CHECK(std::abs(r[k] - (a * rm[k] + b * rn[k])) <= 1e-12 * (1 + std::abs(r[k])));
    }
  }
}

TEST_CASE("nullspace dimensions") {
  CHECK(nullspace_solve(bd_operator(), make_potential("free")).basis.size() == 6);
  CHECK(nullspace_solve(bd_operator(), make_potential("V27", kSeparable)).basis.size() == 2);
  CHECK(nullspace_solve(bd_operator(), make_potential("Vs1", {{"k", 1.0}, {"b", 1.0}, {"c", 1.0}})).basis.size() == 3);
  CHECK(nullspace_solve(bd_operator(), make_potential("generic")).basis.size() == 1);
  CHECK(nullspace_solve(lfi_operator(), make_potential("free")).basis.size() == 3);
  CHECK(nullspace_solve(lfi_operator(), make_potential("V3b")).basis.size() == 1);
}

TEST_CASE("nullspace result bookkeeping") {
  const auto r = nullspace_solve(bd_operator(), make_potential("Vs2"));
  CHECK(r.dim == 6);
  CHECK(r.n_points == 18);
  CHECK(r.n_holdout == 36);
  CHECK(r.singular_values.size() == 6);
  CHECK(r.singular_values.front() == doctest::Approx(1.0));
  CHECK(std::is_sorted(r.singular_values.rbegin(), r.singular_values.rend()));
  REQUIRE(r.residual_norms.size() == r.basis.size());
  for (double n : r.residual_norms) CHECK(n <= r.tolerance());
  for (std::size_t i = 0; i < r.basis.size(); ++i)
    for (std::size_t j = 0; j < r.basis.size(); ++j)
      CHECK(dot(r.basis[i], r.basis[j]) == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0));
}

TEST_CASE("too few collocation points") {
  NullspaceOptions opts;
  opts.n_points = 17;
  CHECK_THROWS_AS(nullspace_solve(bd_operator(), make_potential("free"), opts), InsufficientPoints);
}

TEST_CASE("a threshold that admits a false direction fails validation") {
  NullspaceOptions opts;
  opts.n_points = 18;
  opts.tol = 0.5;  // keeps genuinely nonzero directions of the generic potential
  CHECK_THROWS_AS(nullspace_solve(bd_operator(), make_potential("generic"), opts), ValidationFailed);
}

TEST_CASE("the trivial direction is in every BD nullspace") {
  const std::vector<double> trivial{0, 0, 0, M_SQRT1_2, M_SQRT1_2, 0};
  for (const auto& fam : potential_families()) {
    CAPTURE(fam.name);
    const auto r = nullspace_solve(bd_operator(), make_potential(fam.name));
    CHECK(off_span(trivial, r.basis) <= 1e-9);
  }
}

TEST_CASE("BD nullspace is invariant under rescaling V") {
  for (const char* name : {"Vs1", "V27", "V28", "generic"}) {
    CAPTURE(name);
    const auto spec = make_potential(name);
    const auto a = nullspace_solve(bd_operator(), spec), b = nullspace_solve(bd_operator(), spec.scaled(2.0));
    REQUIRE(a.basis.size() == b.basis.size());
    for (const auto& v : b.basis) CHECK(off_span(v, a.basis) <= 1e-9);
  }
}

TEST_CASE("scalar reconstruction examples") {
  const auto v27 = make_potential("V27", kSeparable);
  for (Vec2 t : {Vec2{1.2, -0.4}, Vec2{-2, 1}, Vec2{0.3, 2.2}}) {
    const double g = reconstruct_scalar({0, 0, 0, 1, 0, 0}, v27, {0, 0}, t);
    CHECK(g == doctest::Approx(2 * std::pow(t[0], 4)).epsilon(1e-12));
  }
  const auto vs2 = make_potential("Vs2");
  const double g = reconstruct_scalar({0, 0, 0, 0.5, 0.5, 0}, vs2, {1, 1}, {0.6, 1.8});
  CHECK(g == doctest::Approx(vs2.value(0.6, 1.8) - vs2.value(1, 1)).epsilon(1e-12));
  // the target lies across the singular line x = 0
  CHECK_THROWS_AS(reconstruct_scalar({0, 0, 0, 0.5, 0.5, 0}, vs2, {1, 1}, {-0.6, 1.8}), PathThroughSingularity);
}

TEST_CASE("reconstruction detours around the singular set") {
  // V24 is singular only at the origin, which the straight path passes through
  const auto v24 = make_potential("V24");
  const double g = reconstruct_scalar({0, 0, 0, 0.5, 0.5, 0}, v24, {-1, 0}, {1, 0});
  CHECK(g == doctest::Approx(v24.value(1, 0) - v24.value(-1, 0)).epsilon(1e-12));

  // a ring singular set that no straight path or detour from the base can avoid
  const auto ring = potential_from_closure(
      "ring", [](const Jet2& x, const Jet2& y) { return 1.0 / (x * x + y * y - 1.0); },
      [](double x, double y) { return std::abs(std::hypot(x, y) - 1.0); });
  CHECK_THROWS_AS(reconstruct_scalar({0, 0, 0, 0.5, 0.5, 0}, ring, {0, 0}, {3, 0}), PathThroughSingularity);
}

TEST_CASE("loop integrals vanish for admitted tensors") {
  const auto vs1 = make_potential("Vs1", {{"k", 1.0}, {"b", 1.0}, {"c", 1.0}});
  const std::vector<Vec2> square{{0.75, 0.75}, {1.25, 0.75}, {1.25, 1.25}, {0.75, 1.25}};
  CHECK(std::abs(loop_integral({0, 0, 1, 0, 0, 0}, vs1, square)) <= 1e-9);
  // a tensor that does not solve the BD equation gives a non-closed form
  CHECK(std::abs(loop_integral({1, 0, 0, 0, 0, 0}, vs1, square)) > 1e-4);
}

TEST_CASE("ScalarReconstruction gradient matches 2 C grad V") {
  const auto spec = make_potential("Vs4");
  const KTParams kt{0, 1, 0, 0, 0, 0};
  const ScalarReconstruction g(kt, spec);
  testing::Gen gen(19);
  for (int i = 0; i < 20; ++i) {
    const Vec2 p = gen.point(spec, 0.3);
    const Jet2 j = g.jet(p[0], p[1]);
    const KTMatrix c = kt_matrix(kt, Jet2(p[0]), Jet2(p[1]));
    const Vec2 dv = spec.gradient(p[0], p[1]);
    CHECK(j.gx == doctest::Approx(2 * (c.xx.v * dv[0] + c.xy.v * dv[1])).epsilon(1e-9));
    CHECK(j.gy == doctest::Approx(2 * (c.xy.v * dv[0] + c.yy.v * dv[1])).epsilon(1e-9));
  }
}

TEST_CASE("the gradient is also exact at the base point") {
  const auto spec = make_potential("Vs1");
  const KTParams kt{0, 0, 1, 0, 0, 0};
  const ScalarReconstruction g(kt, spec, Vec2{1, 1});
  const Jet2 j = g.jet(1, 1);
  const KTMatrix c = kt_matrix(kt, Jet2(1.0), Jet2(1.0));
  const Vec2 dv = spec.gradient(1, 1);
  CHECK(j.v == 0.0);
  CHECK(j.gx == doctest::Approx(2 * (c.xx.v * dv[0] + c.xy.v * dv[1])).epsilon(1e-12));
  CHECK(j.gy == doctest::Approx(2 * (c.xy.v * dv[0] + c.yy.v * dv[1])).epsilon(1e-12));
}

TEST_CASE("Integral-3 scan") {
  const auto v3b = make_potential("V3b", {{"k", 1.0}});
  const auto scan = integral3_scan(v3b);
  CHECK(scan.grid.size() == 64);
  CHECK(scan.sigma_ratio.size() == 64);
  REQUIRE(!scan.hits.empty());
  const auto& hit = scan.hits.front();
  CHECK(std::abs(hit.lambda - 1.0) <= 1e-6);
  CHECK(hit.novel_dimension >= 1);
  CHECK(hit.overlap_dimension + hit.novel_dimension == static_cast<int>(hit.basis.size()));
  for (const auto& p : hit.basis)
    for (double x : {0.5, 1.5})
      for (double r : integral3_residuals(p, v3b, x, 0.7)) CHECK(std::abs(r) <= 1e-8);

  CHECK(integral3_scan(make_potential("V27", kSeparable)).hits.empty());

  Integral3Options off;
  off.lambda_grid = {0.3, 0.7};
  CHECK(integral3_scan(v3b, off).hits.empty());
}

TEST_CASE("the resonant lambda follows k") {
  for (double k : {0.5, 2.0}) {
    const auto scan = integral3_scan(make_potential("V3b", {{"k", k}}));
    REQUIRE(!scan.hits.empty());
    CHECK(std::abs(scan.hits.front().lambda - k) <= 1e-6 * k);
  }
}

TEST_CASE("reports") {
  const auto vs1 = assemble_report(make_potential("Vs1", {{"k", 1.0}, {"b", 1.0}, {"c", 1.0}}));
  CHECK(vs1.verdict == "superintegrable-candidate");
  CHECK(vs1.kt_basis.size() == 3);
  CHECK(vs1.autonomous_rank == 3);
  CHECK(vs1.errors.empty());
  int quadratic = 0;
  for (const auto& d : vs1.reconstructed) {
    CHECK(d.validated);
    CHECK(d.max_flow_derivative <= 1e-8);
    quadratic += d.source == "bd";
  }
  CHECK(quadratic >= 2);  // plus H itself gives at least three

  const auto generic = assemble_report(make_potential("generic"));
  CHECK(generic.verdict == "none");
  REQUIRE(generic.kt_basis.size() == 1);
  CHECK(generic.kt_basis[0].A == doctest::Approx(generic.kt_basis[0].B));
  CHECK(generic.lfi_basis.empty());

  const auto v3 = assemble_report(make_potential("V3", {{"c", 0.7}}));
  REQUIRE(v3.lfi_basis.size() == 1);
  CHECK(v3.kt_basis.size() == 1);
  CHECK(v3.verdict == "none");
  const auto& kv = v3.lfi_basis[0];
  // rotation about the centre (b2, -b1) = (-0.2, -0.3) of V3
  CHECK(kv.b1 == doctest::Approx(0.3 * kv.b3));
  CHECK(kv.b2 == doctest::Approx(-0.2 * kv.b3));
  // the angular term turns L.grad V into the constant s = c b3
  CHECK(kv.s == doctest::Approx(0.7 * kv.b3));

  const auto v27 = assemble_report(make_potential("V27", kSeparable));
  CHECK(v27.verdict == "integrable-candidate");
  CHECK(v27.commuting_pair);
}

TEST_CASE("report JSON") {
  DiscoveryOptions opts;
  opts.scan_integral3 = true;
  const json j = to_json(assemble_report(make_potential("V3b", {{"k", 1.0}}), opts));
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["potential"] == "V3b");
  for (const auto& v : j["kt_basis"]) CHECK(v.size() == 6);
  for (const auto& v : j["lfi_basis"]) CHECK(v.size() == 4);
  REQUIRE(!j["integral3"]["hits"].empty());
  for (const auto& v : j["integral3"]["hits"][0]["basis"]) CHECK(v.size() == 9);
  CHECK(j["bd"]["singular_values"].size() == 6);
  CHECK(j["verdict"] == "superintegrable-candidate");
}
