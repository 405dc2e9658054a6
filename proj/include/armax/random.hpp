#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace armax {

/// SplitMix64 finalizer. Statistically solid for simulation work and
/// counter-addressable, which keeps every trajectory reproducible to the
/// bit from (seed, index) alone.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based uniform/Gaussian stream.
///
/// Draw k of stream s under seed is a pure function of (seed, s, k):
///   base   = splitmix64(seed) + s * 0x9e3779b97f4a7c15
///   bits_i = splitmix64(base + i)                 (i = counter)
///   u_i    = (bits_i >> 11) * 2^-53               in [0, 1)
/// and the normal transform is the cosine branch of Box-Muller on
/// counters (2k, 2k+1):
///   z_k = sqrt(-2 ln u') * cos(2 pi u),  u' = ((bits_2k >> 11) + 1) * 2^-53.
/// u' lies in (0, 1] so the log never sees zero.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(splitmix64(seed) + stream * 0x9e3779b97f4a7c15ULL) {}

  /// Uniform draw in [0, 1) at counter i.
  double uniform_at(std::uint64_t i) const {
    return static_cast<double>(splitmix64(base_ + i) >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw number k (consumes counters 2k and 2k+1).
  double normal_at(std::uint64_t k) const {
    const double u1 =
        static_cast<double>((splitmix64(base_ + 2 * k) >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform_at(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Raw 64-bit word at counter i.
  std::uint64_t bits_at(std::uint64_t i) const { return splitmix64(base_ + i); }

 private:
  std::uint64_t base_;
};

/// Distinct sub-stream tags so one experiment seed yields independent
/// process-noise, input, and dither sequences.
enum class StreamTag : std::uint64_t {
  process_noise = 0,
  input = 1,
  dither = 2,
  scratch = 3,
};

inline RandomStream make_stream(std::uint64_t seed, StreamTag tag) {
  return RandomStream(seed, static_cast<std::uint64_t>(tag));
}

}  // namespace armax
