#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "verdict/loss.hpp"
#include "verdict/rng.hpp"

namespace verdict {

struct GradCheckOptions {
  int samples = 1000;
  std::uint64_t seed = 1;
  double step = 1e-6;
  double rel_tolerance = 1e-5;
  double abs_tolerance = 1e-8;   // applies when |component| < abs_cutoff
  double abs_cutoff = 1e-3;
  // Negative control: flips the sign of the analytic gradient before
  // comparing, which must make the check fail.
  bool inject_sign_bug = false;
};

struct GradCheckCase {
  LossKind kind = LossKind::CE;
  double lambda = 0.0;
  Vec3 y{1.0, 0.0, 0.0};
  Vec3 z{0.0, 0.0, 0.0};
  Vec3 weights{1.0, 1.0, 1.0};
  int component = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double error = 0.0;  // relative above abs_cutoff, absolute below
};

struct GradCheckReport {
  bool passed = true;
  std::array<double, 4> max_rel_error_per_kind{0.0, 0.0, 0.0, 0.0};
  GradCheckCase worst;
  int cases_run = 0;
};

namespace detail {

// The objective evaluated directly in extended precision, written without
// the clamping/log-sum-exp machinery of loss.hpp so that finite differences
// check against an independent route.
inline long double reference_loss_ld(const LossSpec& spec, const Vec3& y, const Vec3& z) {
  long double e[3];
  const long double shift = std::max({(long double)z[0], (long double)z[1], (long double)z[2]});
  long double sum = 0.0L;
  for (int i = 0; i < 3; ++i) {
    e[i] = std::exp(static_cast<long double>(z[static_cast<std::size_t>(i)]) - shift);
    sum += e[i];
  }
  long double p[3];
  for (int i = 0; i < 3; ++i) p[i] = e[i] / sum;

  const Vec3 w = spec.weights.value_or(Vec3{1.0, 1.0, 1.0});
  const Vec3 ybar = complement_indicator(spec.kind, y);
  long double loss = 0.0L;
  for (int i = 0; i < 3; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (y[ui] != 0.0) {
      loss -= static_cast<long double>(w[ui]) * static_cast<long double>(y[ui]) * std::log(p[i]);
    }
    const long double c = static_cast<long double>(spec.lambda) *
                          static_cast<long double>(w[ui]) * static_cast<long double>(ybar[ui]);
    if (c != 0.0L) {
      loss -= c * std::log(p[(i + 1) % 3] + p[(i + 2) % 3]);
    }
  }
  return loss;
}

inline double central_difference_ld(const LossSpec& spec, const Vec3& y, const Vec3& z,
                                    int component, double step) {
  Vec3 plus = z, minus = z;
  plus[static_cast<std::size_t>(component)] += step;
  minus[static_cast<std::size_t>(component)] -= step;
  const long double diff = reference_loss_ld(spec, y, plus) - reference_loss_ld(spec, y, minus);
  return static_cast<double>(diff / (2.0L * static_cast<long double>(step)));
}

}  // namespace detail

inline GradCheckReport run_gradient_check(const GradCheckOptions& options) {
  GradCheckReport report;
  Rng rng(options.seed);
  double worst_error = -1.0;
  for (int sample = 0; sample < options.samples; ++sample) {
    LossSpec spec;
    spec.kind = kAllLossKinds[rng.below(4)];
    spec.lambda = rng.uniform(0.0, 1.0);
    const Vec3 weights{rng.uniform(0.1, 10.0), rng.uniform(0.1, 10.0), rng.uniform(0.1, 10.0)};
    spec.weights = weights;
    const Vec3 y = one_hot(label_from_index(static_cast<int>(rng.below(3))));
    const Vec3 z{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};

    LossResult analytic = loss_gradient(spec, y, z);
    if (options.inject_sign_bug) {
      for (double& g : analytic.grad_z) g = -g;
    }
    for (int j = 0; j < 3; ++j) {
      const double numeric = detail::central_difference_ld(spec, y, z, j, options.step);
      const double a = analytic.grad_z[static_cast<std::size_t>(j)];
      const double abs_err = std::abs(a - numeric);
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const bool small = scale < options.abs_cutoff;
      const double error = small ? abs_err : abs_err / scale;
      const double tolerance = small ? options.abs_tolerance : options.rel_tolerance;
      const auto kind_index = static_cast<std::size_t>(spec.kind);
      if (!small) {
        report.max_rel_error_per_kind[kind_index] =
            std::max(report.max_rel_error_per_kind[kind_index], error);
      }
      const double normalized = error / tolerance;
      if (normalized > worst_error) {
        worst_error = normalized;
        report.worst = {spec.kind, spec.lambda, y, z, weights, j, a, numeric, error};
      }
      if (error > tolerance) report.passed = false;
    }
    ++report.cases_run;
  }
  return report;
}

}  // namespace verdict
