#include "qfi/first_integral.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <Eigen/Dense>

#include "qfi/errors.hpp"

namespace qfi {

TimeFactor TimeFactor::power(int p) {
  if (p < 0) throw BadParams("time factor exponent must be non-negative");
  TimeFactor f;
  f.kind_ = Kind::Power;
  f.power_ = p;
  return f;
}

TimeFactor TimeFactor::exponential(double rate) {
  if (rate == 0.0 || !std::isfinite(rate)) throw BadParams("exponential time factor needs a finite nonzero rate");
  TimeFactor f;
  f.kind_ = Kind::Exponential;
  f.rate_ = rate;
  return f;
}

double TimeFactor::value(double t) const {
  if (kind_ == Kind::Exponential) return std::exp(rate_ * t);
  double r = 1.0;
  for (int i = 0; i < power_; ++i) r *= t;
  return r;
}

double TimeFactor::derivative(double t) const {
  if (kind_ == Kind::Exponential) return rate_ * std::exp(rate_ * t);
  if (power_ == 0) return 0.0;
  double r = power_;
  for (int i = 1; i < power_; ++i) r *= t;
  return r;
}

std::string TimeFactor::describe() const {
  if (kind_ == Kind::Exponential) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "exp(%.17g t)", rate_);
    return buf;
  }
  return power_ == 0 ? "1" : power_ == 1 ? "t" : "t^" + std::to_string(power_);
}

SpatialField jet_field(JetFormula formula) {
  return [f = std::move(formula)](double x, double y) { return f(Jet2::var_x(x), Jet2::var_y(y)); };
}

std::string to_string(FIKind kind) { return kind == FIKind::LFI ? "LFI" : "QFI"; }

std::string to_string(TimeDependence dep) {
  switch (dep) {
    case TimeDependence::Autonomous: return "autonomous";
    case TimeDependence::Polynomial: return "polynomial";
    case TimeDependence::Exponential: return "exponential";
  }
  return "autonomous";
}

FirstIntegral::FirstIntegral(std::string name, std::vector<TimeTerm> terms, FIKind kind)
    : name_(std::move(name)), terms_(std::move(terms)), kind_(kind) {
  if (terms_.empty()) throw BadParams("first integral '" + name_ + "' has no terms");
  for (const auto& t : terms_)
    if (!t.field) throw BadParams("first integral '" + name_ + "' has a term without a field");
}

TimeDependence FirstIntegral::time_dependence() const {
  bool poly = false;
  for (const auto& t : terms_) {
    if (t.factor.kind() == TimeFactor::Kind::Exponential) return TimeDependence::Exponential;
    if (t.factor.exponent() > 0) poly = true;
  }
  return poly ? TimeDependence::Polynomial : TimeDependence::Autonomous;
}

FirstIntegral FirstIntegral::renamed(std::string name) const {
  FirstIntegral out = *this;
  out.name_ = std::move(name);
  return out;
}

FirstIntegral FirstIntegral::scaled(double factor) const {
  FirstIntegral out = *this;
  for (auto& t : out.terms_) t.weight *= factor;
  return out;
}

FirstIntegral linear_combination(std::string name,
                                 const std::vector<std::pair<double, FirstIntegral>>& parts) {
  if (parts.empty()) throw BadParams("linear_combination needs at least one part");
  std::vector<TimeTerm> terms;
  FIKind kind = FIKind::LFI;
  for (const auto& [c, fi] : parts) {
    if (fi.kind() == FIKind::QFI) kind = FIKind::QFI;
    for (auto t : fi.terms()) {
      t.weight *= c;
      terms.push_back(std::move(t));
    }
  }
  return FirstIntegral(std::move(name), std::move(terms), kind);
}

namespace {

struct TermEval {
  Jet2 q;       // velocity polynomial as a function of (x, y)
  Jet2 px, py;  // its velocity derivatives
  SpatialCoefficients c;
};

TermEval eval_term(const TimeTerm& term, const State& s) {
  TermEval e;
  e.c = term.field(s.x, s.y);
  const auto& c = e.c;
  e.q = c.kxx * (s.vx * s.vx) + c.kxy * (2.0 * s.vx * s.vy) + c.kyy * (s.vy * s.vy) + c.kx * s.vx +
        c.ky * s.vy + c.k;
  e.px = c.kxx * (2.0 * s.vx) + c.kxy * (2.0 * s.vy) + c.kx;
  e.py = c.kxy * (2.0 * s.vx) + c.kyy * (2.0 * s.vy) + c.ky;
  return e;
}

}  // namespace

PhaseJet phase_jet(const FirstIntegral& fi, const State& s) {
  PhaseJet out;
  for (const auto& term : fi.terms()) {
    const TermEval e = eval_term(term, s);
    const double w = term.weight * term.factor.value(s.t);
    out.value += w * e.q.v;
    out.dt += term.weight * term.factor.derivative(s.t) * e.q.v;
    out.grad[0] += w * e.q.gx;
    out.grad[1] += w * e.q.gy;
    out.grad[2] += w * e.px.v;
    out.grad[3] += w * e.py.v;
    auto& h = out.hess;
    h[0][0] += w * e.q.hxx;
    h[0][1] += w * e.q.hxy;
    h[1][1] += w * e.q.hyy;
    h[0][2] += w * e.px.gx;
    h[1][2] += w * e.px.gy;
    h[0][3] += w * e.py.gx;
    h[1][3] += w * e.py.gy;
    h[2][2] += w * 2.0 * e.c.kxx.v;
    h[2][3] += w * 2.0 * e.c.kxy.v;
    h[3][3] += w * 2.0 * e.c.kyy.v;
  }
  auto& h = out.hess;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) h[i][j] = h[j][i];
  if (!std::isfinite(out.value)) throw SingularPoint(fi.name() + ": non-finite value", s.x, s.y);
  return out;
}

double evaluate_fi(const FirstIntegral& fi, const State& s) {
  double v = 0.0;
  for (const auto& term : fi.terms()) v += term.weight * term.factor.value(s.t) * eval_term(term, s).q.v;
  if (!std::isfinite(v)) throw SingularPoint(fi.name() + ": non-finite value", s.x, s.y);
  return v;
}

double term_magnitude(const FirstIntegral& fi, const State& s) {
  double m = 0.0;
  for (const auto& term : fi.terms()) {
    const auto c = term.field(s.x, s.y);
    const double parts = std::abs(c.kxx.v * s.vx * s.vx) + 2.0 * std::abs(c.kxy.v * s.vx * s.vy) +
                         std::abs(c.kyy.v * s.vy * s.vy) + std::abs(c.kx.v * s.vx) +
                         std::abs(c.ky.v * s.vy) + std::abs(c.k.v);
    m += std::abs(term.weight * term.factor.value(s.t)) * parts;
  }
  return m;
}

double flow_derivative(const FirstIntegral& fi, const PotentialSpec& spec, const State& s) {
  const PhaseJet j = phase_jet(fi, s);
  const Vec2 g = spec.gradient(s.x, s.y);
  return j.dt + j.grad[0] * s.vx + j.grad[1] * s.vy - j.grad[2] * g[0] - j.grad[3] * g[1];
}

double poisson_bracket(const PhaseJet& f, const PhaseJet& g) {
  // grouped so that swapping f and g negates the result exactly
  return (f.grad[0] * g.grad[2] + f.grad[1] * g.grad[3]) - (f.grad[2] * g.grad[0] + f.grad[3] * g.grad[1]);
}

double poisson_bracket(const FirstIntegral& f, const FirstIntegral& g, const State& s) {
  return poisson_bracket(phase_jet(f, s), phase_jet(g, s));
}

std::array<double, 4> bracket_gradient(const PhaseJet& f, const PhaseJet& g) {
  // J v = (v_p, -v_q)
  auto apply_j = [](const std::array<double, 4>& v) {
    return std::array<double, 4>{v[2], v[3], -v[0], -v[1]};
  };
  const auto jg = apply_j(g.grad);
  const auto jf = apply_j(f.grad);
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) out[i] += f.hess[i][k] * jg[k] - g.hess[i][k] * jf[k];
  return out;
}

FirstIntegral hamiltonian(const PotentialSpec& spec, std::string name) {
  TimeTerm term;
  term.field = [spec](double x, double y) {
    SpatialCoefficients c;
    c.kxx = 0.5;
    c.kyy = 0.5;
    c.k = spec.jet(x, y);
    return c;
  };
  return FirstIntegral(std::move(name), {term}, FIKind::QFI);
}

int independence_rank(const std::vector<FirstIntegral>& fis, const std::vector<State>& samples,
                      double rel_tol) {
  if (fis.empty()) throw BadParams("independence_rank needs at least one first integral");
  if (samples.size() < fis.size()) throw BadParams("independence_rank needs at least |fis| samples");
  int best = 0;
  for (const auto& s : samples) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(fis.size()), 4);
    for (std::size_t i = 0; i < fis.size(); ++i) {
      const auto j = phase_jet(fis[i], s);
      for (int c = 0; c < 4; ++c) m(static_cast<Eigen::Index>(i), c) = j.grad[c];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) continue;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > rel_tol * sv(0)) ++r;
    best = std::max(best, r);
  }
  return best;
}

double NoetherData::reconstruct(const State& s) const {
  const Vec2 e = eta(s);
  return gauge_f(s.t, s.x, s.y) - (e[0] * s.vx + e[1] * s.vy);
}

NoetherData noether_readout(const FirstIntegral& fi) {
  NoetherData d;
  d.eta = [terms = fi.terms()](const State& s) {
    Vec2 e{0.0, 0.0};
    for (const auto& term : terms) {
      const double w = term.weight * term.factor.value(s.t);
      const auto c = term.field(s.x, s.y);
      e[0] -= w * (c.kxx.v * s.vx + c.kxy.v * s.vy + c.kx.v);
      e[1] -= w * (c.kxy.v * s.vx + c.kyy.v * s.vy + c.ky.v);
    }
    return e;
  };
  d.gauge_f = [terms = fi.terms()](double t, double x, double y) {
    double f = 0.0;
    for (const auto& term : terms) f += term.weight * term.factor.value(t) * term.field(x, y).k.v;
    return f;
  };
  return d;
}

void write_fi_trace(std::ostream& out, const Trajectory& traj, const std::vector<FirstIntegral>& fis) {
  out << "t";
  for (const auto& fi : fis) out << ',' << fi.name();
  out << '\n';
  char buf[40];
  for (const auto& s : traj.states) {
    std::snprintf(buf, sizeof buf, "%.17g", s.t);
    out << buf;
    for (const auto& fi : fis) {
      std::snprintf(buf, sizeof buf, ",%.17g", evaluate_fi(fi, s));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace qfi
