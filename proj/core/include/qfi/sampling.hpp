#pragma once

// Deterministic point and state sampling, plus a small index-parallel loop.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "qfi/dynamics.hpp"
#include "qfi/potential.hpp"

namespace qfi {

/// Radical inverse of `index` in `base` (van der Corput).
double halton(std::uint64_t index, unsigned base);

struct AnnulusOptions {
  double r_min = 0.3;
  double r_max = 3.0;
  double tube = 0.1;  // minimum distance to the singular set
};

/// Walks the 2D Halton sequence mapped area-uniformly onto the annulus and
/// skips points inside the tube around the singular set. Successive calls
/// return disjoint point sets.
class AnnulusSampler {
 public:
  explicit AnnulusSampler(const PotentialSpec& spec, AnnulusOptions opts = {},
                          std::uint64_t start_index = 1);
  Vec2 next();
  std::vector<Vec2> take(std::size_t n);

 private:
  const PotentialSpec* spec_;
  AnnulusOptions opts_;
  std::uint64_t index_;
};

/// Uniform double in [0, 1) from the top 53 bits; fixed across platforms.
double uniform01(std::mt19937_64& rng);

/// Seeded phase-space states: positions uniform in the annulus off the tube,
/// velocities uniform in [-v_max, v_max]^2, times uniform in [0, t_max].
std::vector<State> random_states(const PotentialSpec& spec, std::size_t n, std::uint64_t seed,
                                 double v_max = 1.5, double t_max = 2.0, AnnulusOptions opts = {});

/// Worker count: hardware concurrency, capped by QFI_LAB_THREADS when set.
unsigned thread_count();

/// Runs body(i) for i in [0, n); each index is handled by exactly one worker,
/// so results written by index are independent of the thread count. The
/// exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qfi
