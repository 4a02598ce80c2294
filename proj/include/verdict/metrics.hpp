#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "verdict/errors.hpp"
#include "verdict/labels.hpp"

namespace verdict {

// One evidence sentence: a wiki page identifier plus a sentence index.
struct EvidenceItem {
  std::string page;
  long long sentence_index = 0;

  friend bool operator==(const EvidenceItem&, const EvidenceItem&) = default;
};

struct EvidenceItemHash {
  std::size_t operator()(const EvidenceItem& item) const {
    const std::size_t h = std::hash<std::string>{}(item.page);
    return h ^ (std::hash<long long>{}(item.sentence_index) + 0x9e3779b9 + (h << 6) + (h >> 2));
  }
};

// Per-claim scoring input. gold_evidence holds alternative gold sets, any one
// of which fully retrieved makes the claim evidence-correct; it may be empty
// only for NOT ENOUGH INFO claims.
struct PredictionRecord {
  long long claim_id = 0;
  VerdictLabel gold = VerdictLabel::Supported;
  VerdictLabel predicted = VerdictLabel::Supported;
  std::vector<std::vector<EvidenceItem>> gold_evidence;
  std::vector<EvidenceItem> retrieved;
};

// 3x3 counts indexed [gold][predicted] in S, R, N order.
class ConfusionMatrix {
 public:
  ConfusionMatrix() { for (auto& row : counts_) row.fill(0); }
  explicit ConfusionMatrix(const std::array<std::array<long long, 3>, 3>& counts)
      : counts_(counts) {}

  long long count(VerdictLabel gold, VerdictLabel predicted) const {
    return counts_[idx(gold)][idx(predicted)];
  }
  void add(VerdictLabel gold, VerdictLabel predicted, long long n = 1) {
    counts_[idx(gold)][idx(predicted)] += n;
  }

  long long total() const {
    long long sum = 0;
    for (const auto& row : counts_)
      for (long long c : row) sum += c;
    return sum;
  }
  long long diagonal_sum() const {
    return counts_[0][0] + counts_[1][1] + counts_[2][2];
  }
  // Column sums: how often each class is predicted (the tables' "Total" row).
  std::array<long long, 3> prediction_totals() const {
    std::array<long long, 3> t{0, 0, 0};
    for (std::size_t g = 0; g < 3; ++g)
      for (std::size_t p = 0; p < 3; ++p) t[p] += counts_[g][p];
    return t;
  }
  std::array<long long, 3> gold_totals() const {
    std::array<long long, 3> t{0, 0, 0};
    for (std::size_t g = 0; g < 3; ++g)
      for (std::size_t p = 0; p < 3; ++p) t[g] += counts_[g][p];
    return t;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  static std::size_t idx(VerdictLabel label) {
    return static_cast<std::size_t>(label_index(label));
  }
  std::array<std::array<long long, 3>, 3> counts_;
};

namespace detail {

inline void check_unique_claim_ids(std::span<const PredictionRecord> records) {
  std::unordered_set<long long> seen;
  seen.reserve(records.size());
  for (const PredictionRecord& r : records) {
    if (!seen.insert(r.claim_id).second) {
      throw InvalidInput("duplicate claim_id: " + std::to_string(r.claim_id));
    }
  }
}

}  // namespace detail

inline ConfusionMatrix confusion_matrix(std::span<const PredictionRecord> records) {
  if (records.empty()) throw InvalidInput("record set must be non-empty");
  detail::check_unique_claim_ids(records);
  ConfusionMatrix cm;
  for (const PredictionRecord& r : records) cm.add(r.gold, r.predicted);
  return cm;
}

inline double label_accuracy(const ConfusionMatrix& cm) {
  const long long total = cm.total();
  if (total == 0) throw InvalidInput("confusion matrix is empty");
  return static_cast<double>(cm.diagonal_sum()) / static_cast<double>(total);
}

namespace detail {

// Evidence condition of the FEVER score: NOT ENOUGH INFO claims pass
// unconditionally; S/R claims pass iff some gold set is fully contained in
// the first k retrieved items.
inline bool evidence_hit(const PredictionRecord& r, int k) {
  if (r.gold == VerdictLabel::NotEnoughInfo) return true;
  if (r.gold_evidence.empty()) {
    throw InvalidInput("claim " + std::to_string(r.claim_id) +
                       ": S/R claim without gold evidence sets is unverifiable");
  }
  const std::size_t cutoff = std::min(r.retrieved.size(), static_cast<std::size_t>(k));
  std::unordered_set<EvidenceItem, EvidenceItemHash> top(r.retrieved.begin(),
                                                         r.retrieved.begin() + cutoff);
  for (const auto& gold_set : r.gold_evidence) {
    if (gold_set.empty()) {
      throw InvalidInput("claim " + std::to_string(r.claim_id) +
                         ": empty gold evidence set on an S/R claim");
    }
    const bool contained = std::all_of(gold_set.begin(), gold_set.end(),
                                       [&](const EvidenceItem& e) { return top.count(e) > 0; });
    if (contained) return true;
  }
  return false;
}

}  // namespace detail

// Fraction of claims whose label is correct and, for S/R claims, whose gold
// evidence is fully retrieved within the top k items.
inline double fever_score(std::span<const PredictionRecord> records, int k = 5) {
  if (records.empty()) throw InvalidInput("record set must be non-empty");
  if (k < 1) throw InvalidInput("evidence cutoff k must be >= 1");
  long long correct = 0;
  for (const PredictionRecord& r : records) {
    if (r.predicted == r.gold && detail::evidence_hit(r, k)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

struct EvalReport {
  double label_accuracy = 0.0;
  std::optional<double> fever_score;  // absent when records carry no evidence
  ConfusionMatrix confusion;
  std::array<long long, 3> prediction_totals{0, 0, 0};
};

inline EvalReport evaluate(std::span<const PredictionRecord> records, int k = 5,
                           bool with_fever_score = true) {
  EvalReport report;
  report.confusion = confusion_matrix(records);
  report.label_accuracy = label_accuracy(report.confusion);
  report.prediction_totals = report.confusion.prediction_totals();
  if (with_fever_score) report.fever_score = fever_score(records, k);
  return report;
}

// ---------------------------------------------------------------------------
// McNemar paired significance test.

enum class McNemarMethod { ExactBinomial, ChiSquareCorrected };

inline constexpr std::string_view mcnemar_method_name(McNemarMethod m) {
  return m == McNemarMethod::ExactBinomial ? "exact-binomial" : "chi-square-corrected";
}

struct McNemarResult {
  long long b = 0;  // first system correct, second wrong
  long long c = 0;  // first system wrong, second correct
  std::optional<double> statistic;  // present for the chi-square branch only
  double p_value = 1.0;
  McNemarMethod method = McNemarMethod::ExactBinomial;
};

// Discordant pairs up to 25 get the exact two-sided binomial test
// (2 * P(X <= min(b,c) | n = b + c, q = 1/2), capped at 1); larger counts get
// the continuity-corrected statistic (|b - c| - 1)^2 / (b + c) against a
// 1-dof chi-square. `force` pins the branch regardless of the counts.
inline McNemarResult mcnemar_from_counts(long long b, long long c,
                                         std::optional<McNemarMethod> force = std::nullopt) {
  if (b < 0 || c < 0) throw InvalidInput("discordant counts must be >= 0");
  McNemarResult result;
  result.b = b;
  result.c = c;
  const long long n = b + c;
  const McNemarMethod method =
      force.value_or(n <= 25 ? McNemarMethod::ExactBinomial : McNemarMethod::ChiSquareCorrected);
  result.method = method;
  if (method == McNemarMethod::ExactBinomial) {
    if (n == 0) {
      result.p_value = 1.0;
      return result;
    }
    const long long k = std::min(b, c);
    // sum_{i<=k} C(n,i) / 2^n via the term recurrence C(n,i) = C(n,i-1)*(n-i+1)/i
    double term = std::pow(0.5, static_cast<double>(n));
    double tail = term;
    for (long long i = 1; i <= k; ++i) {
      term *= static_cast<double>(n - i + 1) / static_cast<double>(i);
      tail += term;
    }
    result.p_value = std::min(1.0, 2.0 * tail);
  } else {
    if (n == 0) throw InvalidInput("chi-square branch needs at least one discordant pair");
    const double diff = std::abs(static_cast<double>(b - c)) - 1.0;
    const double statistic = diff * diff / static_cast<double>(n);
    result.statistic = statistic;
    // Survival function of chi-square with 1 dof.
    result.p_value = std::erfc(std::sqrt(statistic / 2.0));
  }
  return result;
}

inline McNemarResult mcnemar(const std::vector<bool>& a_correct,
                             const std::vector<bool>& b_correct,
                             std::optional<McNemarMethod> force = std::nullopt) {
  if (a_correct.size() != b_correct.size()) {
    throw InvalidInput("paired correctness sequences must have equal length");
  }
  if (a_correct.empty()) throw InvalidInput("paired sequences must be non-empty");
  long long b = 0, c = 0;
  for (std::size_t i = 0; i < a_correct.size(); ++i) {
    if (a_correct[i] && !b_correct[i]) ++b;
    if (!a_correct[i] && b_correct[i]) ++c;
  }
  return mcnemar_from_counts(b, c, force);
}

// ---------------------------------------------------------------------------
// Rendering.

// Percentage with two decimals, rounding half up, e.g. 0.778077 -> "77.81".
inline std::string format_percent(double fraction) {
  const double scaled = fraction * 10000.0;
  const long long rounded = scaled >= 0.0
                                ? static_cast<long long>(std::floor(scaled + 0.5))
                                : -static_cast<long long>(std::floor(-scaled + 0.5));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", rounded < 0 ? "-" : "",
                std::llabs(rounded) / 100, std::llabs(rounded) % 100);
  return buf;
}

// Gold rows, prediction columns, and a "Total" row of prediction counts.
inline std::string render_confusion(const ConfusionMatrix& cm) {
  std::ostringstream out;
  char line[160];
  out << "                Prediction\n";
  std::snprintf(line, sizeof(line), "        %8s%8s%8s\n", "S", "R", "N");
  out << line;
  for (VerdictLabel gold : kAllLabels) {
    std::snprintf(line, sizeof(line), "Gold %-3s%8lld%8lld%8lld\n",
                  std::string(label_short_name(gold)).c_str(),
                  cm.count(gold, VerdictLabel::Supported),
                  cm.count(gold, VerdictLabel::Refuted),
                  cm.count(gold, VerdictLabel::NotEnoughInfo));
    out << line;
  }
  const auto totals = cm.prediction_totals();
  std::snprintf(line, sizeof(line), "Total   %8lld%8lld%8lld\n", totals[0], totals[1],
                totals[2]);
  out << line;
  return out.str();
}

}  // namespace verdict
