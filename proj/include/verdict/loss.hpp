#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "verdict/errors.hpp"
#include "verdict/labels.hpp"

namespace verdict {

// The four verdict-prediction objectives. All of them share the same shape:
// a cross-entropy term plus an auxiliary complementary-class term
//
//   L(y, p) = -sum_i w_i * [ y_i * log p_i + lambda * ybar_i * log(1 - p_i) ]
//
// and differ only in the membership indicator ybar:
//
//   CE   ybar = (0, 0, 0)                      no auxiliary term
//   OVA  ybar_i = 1 - y_i                      every non-gold class penalized
//   SRN  ybar_i = 1 - y_i for i in {S, R},     predicting N for an S/R claim
//        ybar_N = 0                            carries no extra penalty
//   SR   ybar_i = (1 - y_i)(1 - y_N) for
//        i in {S, R}, ybar_N = 0               only S<->R confusion penalized
//
// lambda >= 0 balances the two terms; weights default to (1, 1, 1).
enum class LossKind { CE, OVA, SRN, SR };

inline constexpr std::array<LossKind, 4> kAllLossKinds{LossKind::CE, LossKind::OVA,
                                                       LossKind::SRN, LossKind::SR};

inline constexpr std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::CE:
      return "ce";
    case LossKind::OVA:
      return "ova";
    case LossKind::SRN:
      return "srn";
    case LossKind::SR:
      return "sr";
  }
  return "";
}

inline std::optional<LossKind> try_loss_kind_from_name(std::string_view name) {
  for (LossKind kind : kAllLossKinds) {
    if (name == loss_kind_name(kind)) return kind;
  }
  return std::nullopt;
}

inline LossKind loss_kind_from_name(std::string_view name) {
  if (auto kind = try_loss_kind_from_name(name)) return *kind;
  throw InvalidInput("unknown loss kind: \"" + std::string(name) + "\"");
}

struct LossSpec {
  LossKind kind = LossKind::CE;
  double lambda = 0.0;                // auxiliary weight; ignored for CE
  std::optional<Vec3> weights;        // absent behaves exactly like (1, 1, 1)
};

struct LossResult {
  double value = 0.0;
  Vec3 grad_z{0.0, 0.0, 0.0};
  // True when a probability had to be clamped inside a log term, i.e. the
  // returned value/gradient sit on the clamp boundary rather than the exact
  // formula.
  bool saturated = false;
};

// Probabilities are clamped into [kProbEpsilon, 1 - kProbEpsilon] inside log
// terms (and inside the 1/(1-p) gradient factor) so that losses and gradients
// stay finite at p in {0, 1}. Raw probabilities are never modified.
inline constexpr double kProbEpsilon = 1e-12;

inline Vec3 complement_indicator(LossKind kind, const Vec3& y);

namespace detail {

inline void check_finite_vec(const Vec3& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidInput(std::string(what) + " must be finite");
  }
}

inline void check_one_hot(const Vec3& y) {
  if (!is_one_hot(y)) throw InvalidInput("gold label must be a one-hot vector");
}

inline void check_prob(const Vec3& p) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw InvalidInput("probability components must lie in [0, 1]");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw InvalidInput("probability components must sum to 1");
  }
}

inline void check_spec(const LossSpec& spec) {
  if (!(spec.lambda >= 0.0) || !std::isfinite(spec.lambda)) {
    throw InvalidInput("lambda must be finite and >= 0");
  }
  if (spec.weights) {
    for (double w : *spec.weights) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw InvalidInput("class weights must be finite and > 0");
      }
    }
  }
}

inline double clamp_prob(double p, bool& saturated) {
  if (p < kProbEpsilon) {
    saturated = true;
    return kProbEpsilon;
  }
  if (p > 1.0 - kProbEpsilon) {
    saturated = true;
    return 1.0 - kProbEpsilon;
  }
  return p;
}

// 1 - p_i computed as the sum of the other components, which is exact where
// direct subtraction cancels (p_i close to 1).
inline double complement_prob(const Vec3& p, std::size_t i) {
  return p[(i + 1) % 3] + p[(i + 2) % 3];
}

inline double loss_value(const LossSpec& spec, const Vec3& y, const Vec3& p,
                         bool& saturated) {
  const Vec3 w = spec.weights.value_or(Vec3{1.0, 1.0, 1.0});
  const Vec3 ybar = complement_indicator(spec.kind, y);
  double loss = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (y[i] != 0.0) {
      loss -= w[i] * y[i] * std::log(clamp_prob(p[i], saturated));
    }
    const double c = spec.lambda * w[i] * ybar[i];
    if (c != 0.0) {
      loss -= c * std::log(clamp_prob(complement_prob(p, i), saturated));
    }
  }
  return loss;
}

}  // namespace detail

// Numerically stable (max-shifted) softmax.
inline Vec3 softmax(const Vec3& z) {
  detail::check_finite_vec(z, "logits");
  const double shift = std::max({z[0], z[1], z[2]});
  const Vec3 e{std::exp(z[0] - shift), std::exp(z[1] - shift), std::exp(z[2] - shift)};
  const double sum = e[0] + e[1] + e[2];
  return {e[0] / sum, e[1] / sum, e[2] / sum};
}

// Membership indicator ybar of the complement set penalized by `kind`.
inline Vec3 complement_indicator(LossKind kind, const Vec3& y) {
  detail::check_one_hot(y);
  switch (kind) {
    case LossKind::CE:
      return {0.0, 0.0, 0.0};
    case LossKind::OVA:
      return {1.0 - y[0], 1.0 - y[1], 1.0 - y[2]};
    case LossKind::SRN:
      return {1.0 - y[0], 1.0 - y[1], 0.0};
    case LossKind::SR: {
      const double not_nei = 1.0 - y[2];
      return {(1.0 - y[0]) * not_nei, (1.0 - y[1]) * not_nei, 0.0};
    }
  }
  throw InvalidInput("unknown loss kind");
}

// Auxiliary term R_kind(y, p) = -sum_i ybar_i * log(1 - p_i), at lambda = 1
// and without class weights. Returns 0 for CE.
inline double aux_loss(LossKind kind, const Vec3& y, const Vec3& p) {
  detail::check_prob(p);
  const Vec3 ybar = complement_indicator(kind, y);
  bool saturated = false;
  double value = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (ybar[i] != 0.0) {
      value -= ybar[i] * std::log(detail::clamp_prob(detail::complement_prob(p, i), saturated));
    }
  }
  return value;
}

// Full objective value; see the LossKind table above for the formula.
inline double total_loss(const LossSpec& spec, const Vec3& y, const Vec3& p) {
  detail::check_spec(spec);
  detail::check_one_hot(y);
  detail::check_prob(p);
  bool saturated = false;
  return detail::loss_value(spec, y, p, saturated);
}

// Value and exact gradient with respect to the logits z.
//
// The cross-entropy part contributes w_g * (p - y), g the gold class. Each
// auxiliary term -c * log(1 - p_i), c = lambda * w_i * ybar_i, contributes
// c * p_i * (delta_ij - p_j) / (1 - p_i) to component j.
inline LossResult loss_gradient(const LossSpec& spec, const Vec3& y, const Vec3& z) {
  detail::check_spec(spec);
  detail::check_one_hot(y);
  const Vec3 p = softmax(z);

  LossResult result;
  result.value = detail::loss_value(spec, y, p, result.saturated);

  const Vec3 w = spec.weights.value_or(Vec3{1.0, 1.0, 1.0});
  const Vec3 ybar = complement_indicator(spec.kind, y);
  const int gold = label_index(label_from_one_hot(y));
  for (std::size_t j = 0; j < 3; ++j) {
    result.grad_z[j] = w[static_cast<std::size_t>(gold)] * (p[j] - y[j]);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double c = spec.lambda * w[i] * ybar[i];
    if (c == 0.0) continue;
    const double q = detail::clamp_prob(detail::complement_prob(p, i), result.saturated);
    const double factor = c * p[i] / q;
    for (std::size_t j = 0; j < 3; ++j) {
      result.grad_z[j] += factor * ((i == j ? 1.0 : 0.0) - p[j]);
    }
  }
  return result;
}

// Mean value and mean logit-gradient over a batch of (one-hot, logits) pairs.
inline LossResult batch_loss(const LossSpec& spec,
                             std::span<const std::pair<Vec3, Vec3>> batch) {
  if (batch.empty()) throw InvalidInput("batch must be non-empty");
  LossResult total;
  for (const auto& [y, z] : batch) {
    const LossResult r = loss_gradient(spec, y, z);
    total.value += r.value;
    for (std::size_t j = 0; j < 3; ++j) total.grad_z[j] += r.grad_z[j];
    total.saturated = total.saturated || r.saturated;
  }
  const double n = static_cast<double>(batch.size());
  total.value /= n;
  for (std::size_t j = 0; j < 3; ++j) total.grad_z[j] /= n;
  return total;
}

}  // namespace verdict
