#pragma once

#include <cmath>
#include <cstdint>

namespace htl {

// Counter-based 64-bit generator (splitmix64 finalizer over an additive
// counter).  State is a single word; every output is a hash of the counter,
// so streams never share internal state.
//
// Stream-split rule: `split(k)` of a generator with current state s yields an
// independent generator seeded with mix(s ^ (k+1)*GAMMA).  Monte Carlo loops
// use one top-level generator per replica (seed = base_seed + replica) and
// named sub-streams split off it, which keeps replicas reproducible under
// any parallel schedule.
class rng64 {
 public:
  explicit rng64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  rng64 split(std::uint64_t stream) const {
    return rng64(mix(state_ ^ ((stream + 1) * kGamma)));
  }

  // Uniform on (0,1); never returns an exact endpoint.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; pairs generated lazily.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Gamma(shape, scale=1), Marsaglia-Tsang squeeze; shape < 1 boosted
  // through Gamma(shape + 1).
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  std::uint64_t state() const { return state_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Seed for the named sub-stream of `base`; shorthand for splitting a fresh
// generator.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return rng64(base).split(stream).state();
}

}  // namespace htl
