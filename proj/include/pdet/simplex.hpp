#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pdet {

/// Antenna combining weights restricted to the probability simplex:
/// all entries nonnegative and summing to one (within 1e-12).
struct WeightVector {
  std::vector<double> w;

  std::size_t size() const noexcept { return w.size(); }
  double operator[](std::size_t i) const { return w[i]; }
  std::span<const double> values() const noexcept { return {w.data(), w.size()}; }

  static constexpr double feasibility_tol = 1e-12;

  bool feasible() const noexcept {
    if (w.empty()) return false;
    double sum = 0.0;
    for (double x : w) {
      if (!(x >= 0.0)) return false;
      sum += x;
    }
    return std::fabs(sum - 1.0) <= feasibility_tol;
  }
};

/// Validating constructor; throws if the entries are off the simplex.
inline WeightVector make_weight_vector(std::vector<double> entries) {
  WeightVector v{std::move(entries)};
  if (!v.feasible()) throw std::invalid_argument("make_weight_vector: not on the probability simplex");
  return v;
}

/// Rescales nonnegative entries to sum exactly to one.
inline WeightVector normalize_weights(std::span<const double> raw) {
  double sum = 0.0;
  for (double x : raw) {
    if (!(x >= 0.0)) throw std::invalid_argument("normalize_weights: negative entry");
    sum += x;
  }
  if (sum <= 0.0) throw std::invalid_argument("normalize_weights: all-zero weights");
  WeightVector v;
  v.w.reserve(raw.size());
  for (double x : raw) v.w.push_back(x / sum);
  return v;
}

}  // namespace pdet
