#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace assp {

// Independent random streams derived from one run seed.
enum class Stream : std::uint64_t {
  observation = 0x6f6273,
  delay = 0x646c79,
  evaluation = 0x65766c,
  audit = 0x617564,
  app = 0x617070,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the stream is a pure function of
/// (seed, stream, a, b), so a draw for (node, t) can be regenerated at any
/// later time. Distribution transforms are implemented here rather than with
/// <random> so that streams are identical across standard libraries.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    state_ = splitmix64(s);
    state_ ^= static_cast<std::uint64_t>(stream) * 0xd6e8feb86659fd93ULL;
    s = state_ + a * 0xa0761d6478bd642fULL;
    state_ = splitmix64(s);
    s = state_ + b * 0xe7037ed1a0b428dbULL;
    state_ = splitmix64(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return splitmix64(state_); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) {
    // rejection keeps the modulo unbiased
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r;
    do {
      r = (*this)();
    } while (r >= limit);
    return r % n;
  }

  double exponential(double mean) { return -mean * std::log(uniform()); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace assp
