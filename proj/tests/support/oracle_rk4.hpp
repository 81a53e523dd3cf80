#pragma once

// Reference integrator kept separate from the library's stepper so the two
// can be compared. Classical RK4 on (x, y, vx, vy) with qdd = -grad V.

#include <array>
#include <vector>

#include "qfi/dynamics.hpp"
#include "qfi/potential.hpp"

namespace qfi::testing {

inline std::vector<State> oracle_rk4(const PotentialSpec& spec, State s, double dt, int steps) {
  using Y = std::array<double, 4>;
  auto rhs = [&](const Y& y) {
    const Vec2 g = spec.gradient(y[0], y[1]);
    return Y{y[2], y[3], -g[0], -g[1]};
  };
  auto axpy = [](const Y& y, double h, const Y& k) {
    return Y{y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]};
  };
  std::vector<State> out{s};
  Y y{s.x, s.y, s.vx, s.vy};
  const double t0 = s.t;
  for (int i = 1; i <= steps; ++i) {
    const Y k1 = rhs(y);
    const Y k2 = rhs(axpy(y, dt / 2, k1));
    const Y k3 = rhs(axpy(y, dt / 2, k2));
    const Y k4 = rhs(axpy(y, dt, k3));
    for (int j = 0; j < 4; ++j) y[j] += dt / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    out.push_back({t0 + i * dt, y[0], y[1], y[2], y[3]});
  }
  return out;
}

}  // namespace qfi::testing
