#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace losstest {

/// Identifies one reproducible random stream. Equal specs give bitwise
/// identical streams, independent of thread scheduling.
struct RngSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Hashes any number of words into one 64-bit key.
template <typename... Words>
constexpr std::uint64_t mix_key(std::uint64_t first, Words... rest) noexcept {
  std::uint64_t h = detail::splitmix64(first);
  ((h = detail::splitmix64(h ^ static_cast<std::uint64_t>(rest))), ...);
  return h;
}

/// Maps 64 random bits to a double in [0, 1) using the top 53 bits.
constexpr double bits_to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based uniform draw: a pure function of (spec, counter). Used where
/// a value must be tied to a sample index rather than to draw order.
constexpr double counter_uniform(const RngSpec& spec, std::uint64_t counter) noexcept {
  return bits_to_unit(mix_key(spec.master_seed, spec.stream_id, counter, 0x6a69747465720000ULL));
}

/// Sequential generator for one stream. Distributions are implemented here
/// rather than through <random> so the output does not depend on the
/// standard library vendor.
class Rng {
 public:
  explicit Rng(const RngSpec& spec) : engine_(mix_key(spec.master_seed, spec.stream_id)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return bits_to_unit(engine_()); }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= limit) return r % bound;
    }
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Standard normal conditioned on |z| <= bound (resampled until inside).
  double truncated_normal(double bound) {
    for (;;) {
      const double z = normal();
      if (std::abs(z) <= bound) return z;
    }
  }

  /// Rademacher draw: +1 with probability p, -1 otherwise.
  double sign_with_probability(double p) { return uniform() < p ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace losstest
