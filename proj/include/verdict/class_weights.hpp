#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "verdict/errors.hpp"
#include "verdict/labels.hpp"

namespace verdict {

// Per-class training sample counts n_i, indexed S, R, N.
struct ClassCounts {
  std::array<long long, 3> n{1, 1, 1};
};

namespace detail {

inline void check_counts(const ClassCounts& counts) {
  for (long long n : counts.n) {
    if (n < 1) throw InvalidInput("class counts must be >= 1");
  }
}

inline void check_beta(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw InvalidInput("beta must lie in [0, 1)");
  }
}

}  // namespace detail

// Class-balanced weights w_i = (1 - beta) / (1 - beta^{n_i}).
//
// The denominator is evaluated as -expm1(n * log(beta)); the direct
// 1 - pow(beta, n) form loses all precision once beta^n is within a few ulp
// of 1 (beta -> 1 with small n). beta = 0 gives exactly (1, 1, 1). Weights
// are used raw, with no rescaling.
inline Vec3 class_balanced_weights(const ClassCounts& counts, double beta) {
  detail::check_counts(counts);
  detail::check_beta(beta);
  if (beta == 0.0) return {1.0, 1.0, 1.0};
  const double log_beta = std::log(beta);
  Vec3 w;
  for (std::size_t i = 0; i < 3; ++i) {
    const double denom = -std::expm1(static_cast<double>(counts.n[i]) * log_beta);
    w[i] = (1.0 - beta) / denom;
  }
  return w;
}

// The beta -> 1 limit of the class-balanced weights: w_i proportional to
// 1/n_i, rescaled so the largest weight is 1. Display/comparison helper; the
// training paths always use class_balanced_weights.
inline Vec3 inverse_frequency_limit(const ClassCounts& counts) {
  detail::check_counts(counts);
  const long long min_n = std::min({counts.n[0], counts.n[1], counts.n[2]});
  Vec3 w;
  for (std::size_t i = 0; i < 3; ++i) {
    w[i] = static_cast<double>(min_n) / static_cast<double>(counts.n[i]);
  }
  return w;
}

// "Number of nines" spelling for beta: 6 -> 0.999999.
inline double beta_from_nines(int nines) {
  if (nines < 1 || nines > 15) {
    throw InvalidInput("beta nines count must lie in [1, 15]");
  }
  return 1.0 - std::pow(10.0, -nines);
}

}  // namespace verdict
