#pragma once

#include <cmath>
#include <cstdint>

namespace pdet {

// ============================================================================
// Counter-based random number generation.
//
// Every random quantity in the library is drawn from a stream addressed by a
// (seed, stream, counter) triple, so trial t of stream s can be regenerated
// without sequential generation. This keeps parallel Monte Carlo runs
// deterministic regardless of how trials are partitioned across workers.
// ============================================================================

namespace detail {

// splitmix64 finalizer; bijective on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

/// Derives a single well-mixed 64-bit key from a (seed, stream, counter)
/// triple. Useful for seeding sub-streams (e.g. per-measurement seeds).
inline constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream,
                                          std::uint64_t counter) noexcept {
  std::uint64_t h = detail::mix64(seed + detail::golden_gamma);
  h = detail::mix64(h ^ (stream + detail::golden_gamma));
  h = detail::mix64(h ^ (counter + detail::golden_gamma));
  return h;
}

/// Small fast generator whose state is fully determined by the addressing
/// triple. Successive words follow the splitmix64 sequence.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept
      : state_(derive_key(seed, stream, counter)) {}

  std::uint64_t next_u64() noexcept {
    state_ += detail::golden_gamma;
    return detail::mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal deviate (Marsaglia polar method, spare cached).
  double next_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_unit() - 1.0;
      v = 2.0 * next_unit() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pdet
