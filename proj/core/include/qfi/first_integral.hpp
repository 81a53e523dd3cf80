#pragma once

// First integrals quadratic (or linear) in the velocities with explicit time
// factors:
//
//   I(t, q, qd) = sum_terms  w * T(t) * [ K_ab(q) qd^a qd^b + K_a(q) qd^a + K(q) ]
//
// with T(t) = t^p or exp(rate * t). This covers every time structure of the
// autonomous, polynomial and exponential families. Coefficients are Jet2
// valued, so phase-space gradients and Hessians are exact.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "qfi/dynamics.hpp"
#include "qfi/jet.hpp"
#include "qfi/potential.hpp"

namespace qfi {

class TimeFactor {
 public:
  enum class Kind { Power, Exponential };

  static TimeFactor power(int p);
  /// exp(rate * t); rate != 0.
  static TimeFactor exponential(double rate);

  Kind kind() const { return kind_; }
  int exponent() const { return power_; }
  double rate() const { return rate_; }

  double value(double t) const;
  double derivative(double t) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Power;
  int power_ = 0;
  double rate_ = 0.0;
};

/// Spatial coefficients of one term: K_xx, K_xy, K_yy, K_x, K_y, K.
struct SpatialCoefficients {
  Jet2 kxx, kxy, kyy;
  Jet2 kx, ky;
  Jet2 k;
};

/// Evaluated at a plane point, with derivatives with respect to (x, y).
using SpatialField = std::function<SpatialCoefficients(double x, double y)>;
/// Written in terms of seeded coordinate jets; see jet_field().
using JetFormula = std::function<SpatialCoefficients(const Jet2& x, const Jet2& y)>;

SpatialField jet_field(JetFormula formula);

struct TimeTerm {
  TimeFactor factor = TimeFactor::power(0);
  double weight = 1.0;
  SpatialField field;
};

enum class FIKind { LFI, QFI };
enum class TimeDependence { Autonomous, Polynomial, Exponential };

std::string to_string(FIKind kind);
std::string to_string(TimeDependence dep);

class FirstIntegral {
 public:
  FirstIntegral(std::string name, std::vector<TimeTerm> terms, FIKind kind);

  const std::string& name() const { return name_; }
  const std::vector<TimeTerm>& terms() const { return terms_; }
  FIKind kind() const { return kind_; }
  TimeDependence time_dependence() const;
  bool autonomous() const { return time_dependence() == TimeDependence::Autonomous; }

  FirstIntegral renamed(std::string name) const;
  FirstIntegral scaled(double factor) const;

 private:
  std::string name_;
  std::vector<TimeTerm> terms_;
  FIKind kind_;
};

/// sum_i coef_i * I_i, as a new integral with concatenated terms.
FirstIntegral linear_combination(std::string name,
                                 const std::vector<std::pair<double, FirstIntegral>>& parts);

/// Value and derivatives of I at a state. Phase coordinates are ordered
/// (x, y, px, py) with p = qd.
struct PhaseJet {
  double value = 0.0;
  double dt = 0.0;
  std::array<double, 4> grad{};
  std::array<std::array<double, 4>, 4> hess{};
};

PhaseJet phase_jet(const FirstIntegral& fi, const State& s);

/// Throws SingularPoint.
double evaluate_fi(const FirstIntegral& fi, const State& s);

/// Sum of the absolute values of the individual monomials of I at s. Used
/// as the scale for relative drift when I itself is a cancelling sum.
double term_magnitude(const FirstIntegral& fi, const State& s);

/// dI/dt along the flow, by the chain rule with qdd = -grad V.
double flow_derivative(const FirstIntegral& fi, const PotentialSpec& spec, const State& s);

/// {F, G} = F_q . G_p - F_p . G_q at (t, s).
double poisson_bracket(const FirstIntegral& f, const FirstIntegral& g, const State& s);
double poisson_bracket(const PhaseJet& f, const PhaseJet& g);

/// Phase-space gradient of {F, G}, exact up to round-off:
///   grad {F, G} = H_F J grad G - H_G J grad F.
std::array<double, 4> bracket_gradient(const PhaseJet& f, const PhaseJet& g);

/// The Hamiltonian (qd.qd)/2 + V as a first integral.
FirstIntegral hamiltonian(const PotentialSpec& spec, std::string name = "H");

/// Max over samples of the rank of the |fis| x 4 gradient matrix, with
/// singular values below 1e-9 * sigma_max treated as zero.
int independence_rank(const std::vector<FirstIntegral>& fis, const std::vector<State>& samples,
                      double rel_tol = 1e-9);

/// Gauged Noether generator read off a first integral: eta_a = -K_ab qd^b - K_a
/// and f = K, summed over the terms at the given time.
struct NoetherData {
  std::function<Vec2(const State&)> eta;
  std::function<double(double t, double x, double y)> gauge_f;

  /// f - eta . qd
  double reconstruct(const State& s) const;
};

NoetherData noether_readout(const FirstIntegral& fi);

/// CSV `t,<name_1>,...,<name_m>` with one row per trajectory state.
void write_fi_trace(std::ostream& out, const Trajectory& traj, const std::vector<FirstIntegral>& fis);

}  // namespace qfi
