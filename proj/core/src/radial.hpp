#pragma once

// Shared helpers for potentials written in terms of r = |(x, y)|.

#include <cmath>
#include <utility>

#include "qfi/jet.hpp"

namespace qfi::detail {

// (r + q, r - q) with r = |(p, q)|, avoiding cancellation in whichever is small.
inline std::pair<Jet2, Jet2> r_plus_minus(const Jet2& p, const Jet2& q) {
  const Jet2 r = sqrt(p * p + q * q);
  if (q.v >= 0.0) {
    const Jet2 plus = r + q;
    return {plus, p * p / plus};
  }
  const Jet2 minus = r - q;
  return {p * p / minus, minus};
}

// Distance to the half-axis {x = 0, sign * y >= 0}.
inline double distance_to_y_half_axis(double x, double y, double sign) {
  return sign * y >= 0.0 ? std::abs(x) : std::hypot(x, y);
}

}  // namespace qfi::detail
