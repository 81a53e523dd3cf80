#include "qfi/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace qfi {

namespace {

constexpr double kEscape = 1e6;

template <class Fn>
double gauss64(Fn&& f, double lo, double hi) {
  return boost::math::quadrature::gauss<double, 64>::integrate(f, lo, hi);
}

template <class Fn>
double bracketed_root(Fn&& f, double lo, double hi) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw QuadratureDomain("root is not bracketed");
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace

QuadratureInversion::QuadratureInversion(Potential f, double q0, double v0) : f_(std::move(f)) {
  const auto f0 = f_(q0);
  e_ = 0.5 * v0 * v0 + f0[0];
  if (!std::isfinite(e_) || !std::isfinite(f0[1])) throw QuadratureDomain("non-finite initial energy");
  if (v0 == 0.0 && f0[1] == 0.0) {
    equilibrium_ = true;
    u0_ = q0;
    return;
  }
  sign_ = v0 > 0.0 ? 1.0 : v0 < 0.0 ? -1.0 : (f0[1] < 0.0 ? 1.0 : -1.0);
  u0_ = sign_ * q0;
  b_ = turning_point(u0_, 1.0);
  if (v0 == 0.0) {
    a_ = u0_;  // released from rest: the start is itself a turning point
  } else {
    a_ = turning_point(u0_, -1.0);
  }
  if (b_) tb_ = duration(u0_, *b_);
  if (a_) ta_ = duration(*a_, u0_);
}

double QuadratureInversion::F(double u) const { return f_(sign_ * u)[0]; }
double QuadratureInversion::dF(double u) const { return sign_ * f_(sign_ * u)[1]; }

std::optional<double> QuadratureInversion::turning_point(double start, double dir) const {
  // March with steps bounded by a tenth of the linear estimate of the
  // distance to E - F = 0, so narrow barriers are not stepped over.
  double p = start;
  while (std::abs(p - start) < kEscape) {
    const double gap = e_ - F(p);
    const double slope = std::abs(dF(p));
    const double floor = 1e-3 * (1.0 + std::abs(p));
    double step = slope > 0.0 ? 0.1 * gap / slope : 0.25 * (1.0 + std::abs(p));
    step = std::clamp(step, floor, 0.25 * (1.0 + std::abs(p)));
    const double q = p + dir * step;
    if (!(e_ - F(q) > 0.0)) {
      auto h = [this](double u) { return e_ - F(u); };
      return bracketed_root(h, std::min(p, q), std::max(p, q));
    }
    p = q;
  }
  return std::nullopt;
}

double QuadratureInversion::duration(double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  auto speed_inv = [this](double u) {
    const double gap = e_ - F(u);
    if (!(gap > 0.0)) throw QuadratureDomain("E - F(q) <= 0 inside the quadrature path");
    return 1.0 / std::sqrt(2.0 * gap);
  };
  // End pieces anchored at the endpoints absorb a possible turning point:
  // q = end -+ d w^2 gives dq = 2 d w dw and a smooth integrand in w.
  const double len = hi - lo;
  const double end = std::min(0.5 * len, 0.5);
  auto anchored = [&](double anchor, double d) {
    return gauss64([&](double w) { return 2.0 * std::abs(d) * w * speed_inv(anchor + d * w * w); }, 0.0, 1.0);
  };
  double total = anchored(lo, end) + anchored(hi, -end);
  const double inner = len - 2.0 * end;
  if (inner > 0.0) {
    const int panels = static_cast<int>(std::ceil(inner / 0.5));
    const double h = inner / panels;
    for (int i = 0; i < panels; ++i) total += gauss64(speed_inv, lo + end + i * h, lo + end + (i + 1) * h);
  }
  return total;
}

double QuadratureInversion::branch_time(double u) const {
  return u >= u0_ ? duration(u0_, u) : -duration(u, u0_);
}

double QuadratureInversion::branch_position(double sigma) const {
  if (sigma == 0.0) return u0_;
  auto g = [&](double u) { return branch_time(u) - sigma; };
  if (sigma > 0.0) {
    if (b_) return bracketed_root(g, u0_, *b_);
    double hi = u0_ + 1.0;
    while (g(hi) < 0.0) {
      hi = u0_ + 2.0 * (hi - u0_);
      if (hi - u0_ > kEscape) throw QuadratureDomain("orbit escapes before the requested time");
    }
    return bracketed_root(g, u0_, hi);
  }
  if (a_) return bracketed_root(g, *a_, u0_);
  double lo = u0_ - 1.0;
  while (g(lo) > 0.0) {
    lo = u0_ - 2.0 * (u0_ - lo);
    if (u0_ - lo > kEscape) throw QuadratureDomain("orbit escapes before the requested time");
  }
  return bracketed_root(g, lo, u0_);
}

double QuadratureInversion::position(double tau) const {
  if (equilibrium_) return u0_;
  double sigma = tau;
  if (a_ && b_) {
    const double period = 2.0 * (ta_ + tb_);
    sigma = std::fmod(sigma + ta_, period);
    if (sigma < 0.0) sigma += period;
    sigma -= ta_;
  }
  // reflect off the turning points onto the forward branch [-ta, tb]
  if (b_ && sigma > tb_) sigma = 2.0 * tb_ - sigma;
  if (a_ && sigma < -ta_) sigma = -2.0 * ta_ - sigma;
  return sign_ * branch_position(sigma);
}

std::optional<double> QuadratureInversion::half_period() const {
  if (a_ && b_) return ta_ + tb_;
  return std::nullopt;
}

namespace {

QuadratureInversion::Potential from_fn1(const Fn1& F) {
  return [F](double u) {
    const auto d = F.derivatives(u);
    return std::array<double, 2>{d[0], d[1]};
  };
}

}  // namespace

ClosedFormSolution closed_form_solution(const CatalogEntry& entry, const State& s0) {
  if (entry.potential.is_singular(s0.x, s0.y))
    throw SingularPoint(entry.name + ": initial state on the singular set", s0.x, s0.y);
  const auto& p = entry.potential.params();
  ClosedFormSolution out;
  const double t0 = s0.t;

  if (entry.name == "V3b") {
    const double k = p.real("k");
    const double c1p = std::exp(k * t0) * (s0.vx - k * s0.x), c1m = std::exp(-k * t0) * (s0.vx + k * s0.x);
    const double c2p = std::exp(k * t0) * (s0.vy - k * s0.y), c2m = std::exp(-k * t0) * (s0.vy + k * s0.y);
    out.constants = {{"c1+", c1p}, {"c1-", c1m}, {"c2+", c2p}, {"c2-", c2m}};
    out.method = "exponentials fitted through L42+-, L43+-";
    out.position = [=](double t) {
      const double ep = std::exp(k * t), em = std::exp(-k * t);
      return Vec2{c1m / (2.0 * k) * ep - c1p / (2.0 * k) * em, c2m / (2.0 * k) * ep - c2p / (2.0 * k) * em};
    };
    return out;
  }

  if (entry.name == "V2") {
    const double c = p.real("c");
    const Fn1 F = p.function("F");
    const double c1 = s0.vy + c * t0;
    const double c2 = s0.y - c1 * t0 + 0.5 * c * t0 * t0;
    auto qx = std::make_shared<QuadratureInversion>(from_fn1(F), s0.x, s0.vx);
    out.constants = {{"c1", c1}, {"c2", c2}, {"c3", 2.0 * qx->energy()}};
    out.method = "y from L31, x by quadrature inversion of 2 Q31 = c3";
    out.position = [=](double t) { return Vec2{qx->position(t - t0), -0.5 * c * t * t + c1 * t + c2}; };
    return out;
  }

  if (entry.name == "V27") {
    auto qx = std::make_shared<QuadratureInversion>(from_fn1(p.function("F1")), s0.x, s0.vx);
    auto qy = std::make_shared<QuadratureInversion>(from_fn1(p.function("F2")), s0.y, s0.vy);
    out.constants = {{"c1", 2.0 * qx->energy()}, {"c2", 2.0 * qy->energy()}};
    out.method = "both coordinates by quadrature inversion of I71a, I71b";
    out.position = [=](double t) { return Vec2{qx->position(t - t0), qy->position(t - t0)}; };
    return out;
  }

  throw BadParams(entry.name + ": no closed-form solution (available for V3b, V2, V27)");
}

}  // namespace qfi
