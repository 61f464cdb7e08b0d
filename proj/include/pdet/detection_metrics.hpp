#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>

#include "pdet/signal_model.hpp"

namespace pdet {

// ============================================================================
// Detection statistics over an aligned two-STS block:
//   autocorr      a = (1/eta) sum_k y[k] conj(y[k+eta])
//   avg_power     b = (1/2eta) sum_k |y[k]|^2
//   ratio_abs     l    = |a| / b        (conventional metric)
//   ratio_real    l_R  = Re(a) / b      (real-part metric)
//   compensated   r    = Re(a) - threshold * b
// A packet is declared iff r > 0, which for b > 0 is equivalent to
// l_R > threshold. Only the aligned position is evaluated; timing offsets
// are assumed compensated upstream.
// ============================================================================

struct MetricSample {
  cplx autocorr{};
  double autocorr_real = 0.0;
  double avg_power = 0.0;
  double ratio_abs = 0.0;
  double ratio_real = 0.0;
  double compensated = 0.0;
  bool ratios_defined = false;  // false only for the all-zero block (b == 0)
};

inline cplx autocorrelation(std::span<const cplx> samples, std::size_t sts_len) {
  if (sts_len == 0 || samples.size() < 2 * sts_len)
    throw std::invalid_argument("autocorrelation: block shorter than two STSs");
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < sts_len; ++k) acc += samples[k] * std::conj(samples[k + sts_len]);
  return acc / static_cast<double>(sts_len);
}

inline double average_power(std::span<const cplx> samples, std::size_t sts_len) {
  if (sts_len == 0 || samples.size() < 2 * sts_len)
    throw std::invalid_argument("average_power: block shorter than two STSs");
  double acc = 0.0;
  for (std::size_t k = 0; k < 2 * sts_len; ++k) acc += std::norm(samples[k]);
  return acc / static_cast<double>(2 * sts_len);
}

inline MetricSample compute_metrics(std::span<const cplx> samples, std::size_t sts_len,
                                    double threshold) {
  MetricSample m;
  m.autocorr = autocorrelation(samples, sts_len);
  m.autocorr_real = m.autocorr.real();
  m.avg_power = average_power(samples, sts_len);
  m.compensated = m.autocorr_real - threshold * m.avg_power;
  if (m.avg_power > 0.0) {
    m.ratio_abs = std::abs(m.autocorr) / m.avg_power;
    m.ratio_real = m.autocorr_real / m.avg_power;
    m.ratios_defined = true;
  }
  return m;
}

inline cplx autocorrelation(const ReceivedBlock& block, std::size_t sts_len) {
  return autocorrelation(std::span<const cplx>(block.samples), sts_len);
}

inline double average_power(const ReceivedBlock& block, std::size_t sts_len) {
  return average_power(std::span<const cplx>(block.samples), sts_len);
}

inline MetricSample compute_metrics(const ReceivedBlock& block, std::size_t sts_len,
                                    double threshold) {
  return compute_metrics(std::span<const cplx>(block.samples), sts_len, threshold);
}

/// Weighted sum of per-antenna compensated autocorrelations.
inline double combine(std::span<const double> per_antenna, std::span<const double> weights) {
  if (per_antenna.size() != weights.size())
    throw std::invalid_argument("combine: length mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) acc += weights[j] * per_antenna[j];
  return acc;
}

}  // namespace pdet
