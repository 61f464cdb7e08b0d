#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pdet/rng.hpp"

namespace pdet {

using cplx = std::complex<double>;

// ============================================================================
// Signal construction: preambles made of two identical short training
// sequences (STS) of sts_len samples each, and received blocks
//   y[n] = sqrt(P) s[n] + w[n]
// with circularly symmetric complex Gaussian noise of total power sigma^2
// (sigma^2/2 per real component). All values are immutable after
// construction and all draws are addressed by (seed, antenna, trial), so
// synthesis is pure and thread-safe.
// ============================================================================

enum class PreambleKind { qpsk_random, constant_envelope };

enum class Hypothesis { packet_present, noise_only };

/// Two repeated STSs with unit average power per STS.
struct Preamble {
  std::size_t sts_len = 0;                // samples per STS
  std::vector<cplx> samples;              // 2 * sts_len entries, periodic

  std::size_t block_len() const noexcept { return samples.size(); }
};

/// Per-antenna receive conditions. SNRs are linear power ratios; the noise
/// power of antenna j is signal_power / snr[j]. An infinite SNR models the
/// noiseless limit.
struct AntennaScenario {
  double signal_power = 1.0;
  std::vector<double> snr;

  std::size_t antenna_count() const noexcept { return snr.size(); }

  double noise_power(std::size_t antenna) const {
    if (antenna >= snr.size()) throw std::invalid_argument("noise_power: antenna out of range");
    return signal_power / snr[antenna];
  }
};

inline AntennaScenario make_scenario(std::vector<double> snr_linear, double signal_power = 1.0) {
  if (snr_linear.empty()) throw std::invalid_argument("make_scenario: need at least one antenna");
  for (double g : snr_linear)
    if (!(g > 0.0)) throw std::invalid_argument("make_scenario: SNRs must be positive");
  if (!(signal_power > 0.0)) throw std::invalid_argument("make_scenario: signal power must be positive");
  return AntennaScenario{signal_power, std::move(snr_linear)};
}

struct ReceivedBlock {
  std::vector<cplx> samples;
  Hypothesis hypothesis = Hypothesis::noise_only;
  std::uint64_t rng_seed = 0;
};

/// Builds a preamble of the given kind, deterministically in (sts_len, kind,
/// seed). Both kinds have unit-modulus samples, so the unit-average-power
/// normalization holds exactly.
inline Preamble make_preamble(std::size_t sts_len, PreambleKind kind, std::uint64_t seed) {
  if (sts_len == 0) throw std::invalid_argument("make_preamble: sts_len must be positive");
  Preamble p;
  p.sts_len = sts_len;
  p.samples.resize(2 * sts_len);
  if (kind == PreambleKind::constant_envelope) {
    for (auto& s : p.samples) s = cplx{1.0, 0.0};
  } else {
    TrialRng rng(seed, /*stream=*/0x70726561ULL, /*counter=*/0);
    const double h = std::numbers::sqrt2 / 2.0;
    for (std::size_t n = 0; n < sts_len; ++n) {
      const std::uint64_t sym = rng.next_u64() >> 62;
      const cplx s{(sym & 1) ? -h : h, (sym & 2) ? -h : h};
      p.samples[n] = s;
      p.samples[n + sts_len] = s;
    }
  }
  return p;
}

namespace detail {

/// Core sampler shared by synthesize_block and the Monte Carlo loops: fills
/// dst (block_len samples) without allocating. Noise is always drawn first,
/// in a fixed order, so a packet-present block and a noise-only block with
/// the same addressing triple differ exactly by the deterministic signal.
inline void fill_block(cplx* dst, const Preamble& preamble, const AntennaScenario& scenario,
                       std::size_t antenna, Hypothesis hypothesis, std::uint64_t seed,
                       std::uint64_t trial, double phase_per_sts) {
  const std::size_t len = preamble.block_len();
  const double sigma2 = scenario.noise_power(antenna);
  const double comp_sigma = std::sqrt(0.5 * sigma2);
  TrialRng rng(seed, antenna, trial);
  for (std::size_t n = 0; n < len; ++n)
    dst[n] = cplx{comp_sigma * rng.next_normal(), comp_sigma * rng.next_normal()};
  if (hypothesis == Hypothesis::packet_present) {
    const double amp = std::sqrt(scenario.signal_power);
    if (phase_per_sts == 0.0) {
      for (std::size_t n = 0; n < len; ++n) dst[n] += amp * preamble.samples[n];
    } else {
      // progressive rotation advancing by phase_per_sts radians per STS,
      // modelling residual frequency offset between the two halves
      const double step = phase_per_sts / static_cast<double>(preamble.sts_len);
      for (std::size_t n = 0; n < len; ++n)
        dst[n] += amp * preamble.samples[n] * std::polar(1.0, step * static_cast<double>(n));
    }
  }
}

}  // namespace detail

/// Synthesizes one received block for the given antenna. Identical
/// (preamble, scenario, antenna, hypothesis, seed, trial) inputs produce
/// bit-identical blocks.
inline ReceivedBlock synthesize_block(const Preamble& preamble, const AntennaScenario& scenario,
                                      std::size_t antenna, Hypothesis hypothesis,
                                      std::uint64_t seed, std::uint64_t trial = 0,
                                      double phase_per_sts = 0.0) {
  if (antenna >= scenario.antenna_count())
    throw std::invalid_argument("synthesize_block: antenna out of range");
  ReceivedBlock block;
  block.hypothesis = hypothesis;
  block.rng_seed = seed;
  block.samples.resize(preamble.block_len());
  detail::fill_block(block.samples.data(), preamble, scenario, antenna, hypothesis, seed, trial,
                     phase_per_sts);
  return block;
}

}  // namespace pdet
