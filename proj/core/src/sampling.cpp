#include "qfi/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "qfi/errors.hpp"

namespace qfi {

double halton(std::uint64_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

AnnulusSampler::AnnulusSampler(const PotentialSpec& spec, AnnulusOptions opts, std::uint64_t start_index)
    : spec_(&spec), opts_(opts), index_(start_index) {
  if (!(opts_.r_min >= 0.0 && opts_.r_max > opts_.r_min)) throw BadParams("invalid annulus radii");
}

Vec2 AnnulusSampler::next() {
  const double a2 = opts_.r_min * opts_.r_min, b2 = opts_.r_max * opts_.r_max;
  for (int guard = 0; guard < 1000000; ++guard) {
    const std::uint64_t i = index_++;
    const double r = std::sqrt(a2 + (b2 - a2) * halton(i, 2));
    const double th = 2.0 * std::numbers::pi * halton(i, 3);
    const double x = r * std::cos(th), y = r * std::sin(th);
    if (spec_->singular_distance(x, y) < opts_.tube) continue;
    return {x, y};
  }
  throw Error(spec_->name() + ": no admissible sample points in the annulus");
}

std::vector<Vec2> AnnulusSampler::take(std::size_t n) {
  std::vector<Vec2> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(next());
  return out;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<State> random_states(const PotentialSpec& spec, std::size_t n, std::uint64_t seed,
                                 double v_max, double t_max, AnnulusOptions opts) {
  std::mt19937_64 rng(seed);
  std::vector<State> out;
  out.reserve(n);
  const double a2 = opts.r_min * opts.r_min, b2 = opts.r_max * opts.r_max;
  for (std::size_t guard = 0; out.size() < n; ++guard) {
    if (guard > 1000 * n + 100000) throw Error(spec.name() + ": cannot sample admissible states");
    const double r = std::sqrt(a2 + (b2 - a2) * uniform01(rng));
    const double th = 2.0 * std::numbers::pi * uniform01(rng);
    State s;
    s.x = r * std::cos(th);
    s.y = r * std::sin(th);
    s.vx = v_max * (2.0 * uniform01(rng) - 1.0);
    s.vy = v_max * (2.0 * uniform01(rng) - 1.0);
    s.t = t_max * uniform01(rng);
    if (spec.singular_distance(s.x, s.y) < opts.tube) continue;
    out.push_back(s);
  }
  return out;
}

unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QFI_LAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::size_t error_index = n;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qfi
