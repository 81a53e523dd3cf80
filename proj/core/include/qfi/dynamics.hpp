#pragma once

// Equations of motion xdd = -grad V on the Euclidean plane, fixed-step integration.

#include <iosfwd>
#include <string>
#include <vector>

#include "qfi/errors.hpp"
#include "qfi/potential.hpp"

namespace qfi {

struct State {
  double t = 0.0;
  double x = 0.0, y = 0.0;
  double vx = 0.0, vy = 0.0;

  double speed() const;
  bool finite() const;
};

enum class Integrator { Verlet, RK4 };

std::string to_string(Integrator integrator);
/// "verlet" or "rk4"; throws BadParams otherwise.
Integrator parse_integrator(const std::string& name);

struct Trajectory {
  std::vector<State> states;
  double dt = 0.0;
  Integrator integrator = Integrator::Verlet;
};

/// Integration stopped because the orbit came too close to the singular set.
class SingularApproach : public Error {
 public:
  SingularApproach(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}
  /// Every state computed before the abort; the last one is the last good state.
  const Trajectory& partial() const { return partial_; }
  const State& last_good() const { return partial_.states.back(); }

 private:
  Trajectory partial_;
};

double energy(const PotentialSpec& spec, const State& s);

/// Velocity Verlet (kick-drift-kick). Throws SingularPoint.
State step_verlet(const PotentialSpec& spec, const State& s, double dt);
/// Classical fourth-order Runge-Kutta on (x, y, vx, vy). Throws SingularPoint.
State step_rk4(const PotentialSpec& spec, const State& s, double dt);
State step(const PotentialSpec& spec, const State& s, double dt, Integrator integrator);

/// n_steps + 1 states starting with s0. Before every step the distance to the
/// singular set must be at least 10 * dt * speed, otherwise SingularApproach.
Trajectory integrate(const PotentialSpec& spec, const State& s0, double dt, int n_steps,
                     Integrator integrator = Integrator::Verlet);

/// Header `t,x,y,vx,vy`, one row per state, `%.17g`.
void write_csv(std::ostream& out, const Trajectory& traj);

}  // namespace qfi
