#pragma once

// Counter-based splittable generator.
//
// A stream is identified by (seed, stream id); its k-th output depends only on
// those two values and k, so parallel workers that each own a stream produce the
// same numbers regardless of scheduling. Outputs are platform independent,
// including normal() which uses Box-Muller instead of std::normal_distribution.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace gweave {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Child stream; deterministic in (this stream's key, id).
  CounterRng split(std::uint64_t id) const noexcept { return CounterRng(key_, id + 1); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); bias is below 2^-40 for the n used here.
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

  double normal() noexcept;
  std::complex<double> complex_normal() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline double CounterRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  constexpr double two_pi = 6.283185307179586476925286766559;
  spare_ = r * std::sin(two_pi * u2);
  has_spare_ = true;
  return r * std::cos(two_pi * u2);
}

inline std::complex<double> CounterRng::complex_normal() noexcept {
  constexpr double inv_sqrt2 = 0.70710678118654752440084436210485;
  const double re = normal();
  const double im = normal();
  return {re * inv_sqrt2, im * inv_sqrt2};
}

}  // namespace gweave
