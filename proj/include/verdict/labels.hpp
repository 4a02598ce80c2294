#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "verdict/errors.hpp"

namespace verdict {

using Vec3 = std::array<double, 3>;

// The three FEVER verdict classes, in canonical index order S, R, N.
enum class VerdictLabel : int {
  Supported = 0,
  Refuted = 1,
  NotEnoughInfo = 2,
};

inline constexpr std::array<VerdictLabel, 3> kAllLabels{
    VerdictLabel::Supported, VerdictLabel::Refuted, VerdictLabel::NotEnoughInfo};

inline constexpr int label_index(VerdictLabel label) { return static_cast<int>(label); }

inline VerdictLabel label_from_index(int index) {
  if (index < 0 || index > 2) {
    throw InvalidInput("verdict class index out of range: " + std::to_string(index));
  }
  return static_cast<VerdictLabel>(index);
}

// Canonical FEVER dataset spelling; case-sensitive on input.
inline constexpr std::string_view label_to_string(VerdictLabel label) {
  switch (label) {
    case VerdictLabel::Supported:
      return "SUPPORTS";
    case VerdictLabel::Refuted:
      return "REFUTES";
    case VerdictLabel::NotEnoughInfo:
      return "NOT ENOUGH INFO";
  }
  return "";
}

inline constexpr std::string_view label_short_name(VerdictLabel label) {
  switch (label) {
    case VerdictLabel::Supported:
      return "S";
    case VerdictLabel::Refuted:
      return "R";
    case VerdictLabel::NotEnoughInfo:
      return "N";
  }
  return "";
}

inline std::optional<VerdictLabel> try_label_from_string(std::string_view text) {
  for (VerdictLabel label : kAllLabels) {
    if (text == label_to_string(label)) return label;
  }
  return std::nullopt;
}

inline VerdictLabel label_from_string(std::string_view text) {
  if (auto label = try_label_from_string(text)) return *label;
  throw InvalidInput("unknown verdict label: \"" + std::string(text) + "\"");
}

inline Vec3 one_hot(VerdictLabel label) {
  Vec3 y{0.0, 0.0, 0.0};
  y[static_cast<std::size_t>(label_index(label))] = 1.0;
  return y;
}

inline bool is_one_hot(const Vec3& y) {
  int ones = 0;
  for (double v : y) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      return false;
    }
  }
  return ones == 1;
}

// Round-trips one_hot(); rejects anything that is not exactly one-hot.
inline VerdictLabel label_from_one_hot(const Vec3& y) {
  if (!is_one_hot(y)) throw InvalidInput("vector is not a valid one-hot class encoding");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0) return label_from_index(static_cast<int>(i));
  }
  throw InvalidInput("vector is not a valid one-hot class encoding");
}

}  // namespace verdict
