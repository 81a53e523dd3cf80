#include "qfi/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace qfi {

double State::speed() const { return std::hypot(vx, vy); }

bool State::finite() const {
  return std::isfinite(t) && std::isfinite(x) && std::isfinite(y) && std::isfinite(vx) &&
         std::isfinite(vy);
}

std::string to_string(Integrator integrator) {
  return integrator == Integrator::Verlet ? "verlet" : "rk4";
}

Integrator parse_integrator(const std::string& name) {
  if (name == "verlet") return Integrator::Verlet;
  if (name == "rk4") return Integrator::RK4;
  throw BadParams("unknown integrator '" + name + "' (expected verlet or rk4)");
}

double energy(const PotentialSpec& spec, const State& s) {
  return 0.5 * (s.vx * s.vx + s.vy * s.vy) + spec.value(s.x, s.y);
}

State step_verlet(const PotentialSpec& spec, const State& s, double dt) {
  const Vec2 g0 = spec.gradient(s.x, s.y);
  const double hx = s.vx - 0.5 * dt * g0[0];
  const double hy = s.vy - 0.5 * dt * g0[1];
  State out;
  out.t = s.t + dt;
  out.x = s.x + dt * hx;
  out.y = s.y + dt * hy;
  const Vec2 g1 = spec.gradient(out.x, out.y);
  out.vx = hx - 0.5 * dt * g1[0];
  out.vy = hy - 0.5 * dt * g1[1];
  return out;
}

namespace {

struct Deriv {
  double x, y, vx, vy;
};

Deriv rhs(const PotentialSpec& spec, double x, double y, double vx, double vy) {
  const Vec2 g = spec.gradient(x, y);
  return {vx, vy, -g[0], -g[1]};
}

}  // namespace

State step_rk4(const PotentialSpec& spec, const State& s, double dt) {
  const Deriv k1 = rhs(spec, s.x, s.y, s.vx, s.vy);
  const double h = 0.5 * dt;
  const Deriv k2 = rhs(spec, s.x + h * k1.x, s.y + h * k1.y, s.vx + h * k1.vx, s.vy + h * k1.vy);
  const Deriv k3 = rhs(spec, s.x + h * k2.x, s.y + h * k2.y, s.vx + h * k2.vx, s.vy + h * k2.vy);
  const Deriv k4 =
      rhs(spec, s.x + dt * k3.x, s.y + dt * k3.y, s.vx + dt * k3.vx, s.vy + dt * k3.vy);
  const double w = dt / 6.0;
  return {s.t + dt, s.x + w * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
          s.y + w * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
          s.vx + w * (k1.vx + 2 * k2.vx + 2 * k3.vx + k4.vx),
          s.vy + w * (k1.vy + 2 * k2.vy + 2 * k3.vy + k4.vy)};
}

State step(const PotentialSpec& spec, const State& s, double dt, Integrator integrator) {
  return integrator == Integrator::Verlet ? step_verlet(spec, s, dt) : step_rk4(spec, s, dt);
}

Trajectory integrate(const PotentialSpec& spec, const State& s0, double dt, int n_steps,
                     Integrator integrator) {
  if (!(dt > 0.0)) throw BadParams("integrate: dt must be positive");
  if (n_steps < 1) throw BadParams("integrate: n_steps must be at least 1");
  if (!s0.finite()) throw BadParams("integrate: initial state is not finite");
  Trajectory traj;
  traj.dt = dt;
  traj.integrator = integrator;
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.push_back(s0);
  for (int i = 0; i < n_steps; ++i) {
    const State& cur = traj.states.back();
    const double clearance = spec.singular_distance(cur.x, cur.y);
    if (clearance < 10.0 * dt * cur.speed() || clearance <= kSingularEps)
      throw SingularApproach(spec.name() + ": orbit approaches the singular set at t = " +
                                 std::to_string(cur.t),
                             traj);
    State next;
    try {
      next = step(spec, cur, dt, integrator);
    } catch (const SingularPoint& e) {
      throw SingularApproach(std::string(e.what()) + " during a step", traj);
    }
    if (!next.finite()) throw SingularApproach(spec.name() + ": state became non-finite", traj);
    // uniform spacing: recompute t from the step index instead of accumulating
    next.t = s0.t + (i + 1) * dt;
    traj.states.push_back(next);
  }
  return traj;
}

void write_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x,y,vx,vy\n";
  char buf[160];
  for (const auto& s : traj.states) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.x, s.y, s.vx, s.vy);
    out << buf;
  }
}

}  // namespace qfi
