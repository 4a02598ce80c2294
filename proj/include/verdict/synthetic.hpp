#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "verdict/dataset.hpp"
#include "verdict/errors.hpp"
#include "verdict/rng.hpp"

namespace verdict {

// FEVER 2018 train-split class sizes (S, R, N), the canonical imbalance the
// generator reproduces at any scale.
inline constexpr std::array<long long, 3> kFeverTrainCounts{80035, 29775, 35639};
inline constexpr long long kFeverDevPerClass = 6666;

inline ClassCounts fever_train_counts(double scale) {
  if (!(scale > 0.0)) throw InvalidInput("scale must be > 0");
  ClassCounts counts;
  for (std::size_t i = 0; i < 3; ++i) {
    counts.n[i] = std::max<long long>(
        1, std::llround(static_cast<double>(kFeverTrainCounts[i]) * scale));
  }
  return counts;
}

inline long long fever_dev_per_class(double scale) {
  if (!(scale > 0.0)) throw InvalidInput("scale must be > 0");
  return std::max<long long>(1, std::llround(static_cast<double>(kFeverDevPerClass) * scale));
}

// Seeded synthetic FEVER-shaped data: three unit-variance Gaussian clusters
// at equal pairwise distance, an imbalanced train split sampled by exact
// per-class counts, and a balanced dev split. Defaults are the 1/20-scale
// FEVER ratios.
struct SyntheticConfig {
  std::uint64_t seed = 42;
  ClassCounts train_counts{{4002, 1489, 1782}};
  long long dev_per_class = 333;
  int dim = 8;
  double cluster_separation = 2.0;
  double label_noise = 0.0;       // per-sample chance of a uniformly resampled label
  double evidence_coverage = 0.9; // fraction of S/R claims with gold evidence in the top 5
};

namespace detail {

inline void check_synthetic_config(const SyntheticConfig& config) {
  check_counts(config.train_counts);
  if (config.dev_per_class < 1) throw InvalidInput("dev_per_class must be >= 1");
  if (config.dim < 2) throw InvalidInput("feature dimension must be >= 2");
  if (!(config.cluster_separation > 0.0)) throw InvalidInput("cluster_separation must be > 0");
  if (!(config.label_noise >= 0.0 && config.label_noise < 1.0)) {
    throw InvalidInput("label_noise must lie in [0, 1)");
  }
  if (!(config.evidence_coverage >= 0.0 && config.evidence_coverage <= 1.0)) {
    throw InvalidInput("evidence_coverage must lie in [0, 1]");
  }
}

// Equilateral triangle of side `separation` embedded in the first two axes.
inline std::array<std::vector<double>, 3> cluster_centers(int dim, double separation) {
  std::array<std::vector<double>, 3> centers;
  for (auto& c : centers) c.assign(static_cast<std::size_t>(dim), 0.0);
  centers[1][0] = separation;
  centers[2][0] = separation / 2.0;
  centers[2][1] = separation * std::sqrt(3.0) / 2.0;
  return centers;
}

inline constexpr int kRetrievedPerClaim = 5;

// Attaches gold evidence and a retrieved list. Covered claims carry their
// first gold set inside the top-5; uncovered claims keep all gold items out
// of the top-5 (either beyond the cutoff or missing entirely).
inline void attach_evidence(Sample& sample, bool covered, Rng& rng) {
  if (sample.gold == VerdictLabel::NotEnoughInfo) {
    for (int j = 0; j < kRetrievedPerClaim; ++j) {
      sample.retrieved.push_back({"F" + std::to_string(sample.claim_id), j});
    }
    return;
  }
  const std::string page = "P" + std::to_string(sample.claim_id);
  const int num_sets = 1 + static_cast<int>(rng.below(2));
  int next_index = 0;
  for (int s = 0; s < num_sets; ++s) {
    const int set_size = 1 + static_cast<int>(rng.below(2));
    std::vector<EvidenceItem> gold_set;
    for (int j = 0; j < set_size; ++j) gold_set.push_back({page, next_index++});
    sample.gold_evidence.push_back(std::move(gold_set));
  }
  std::vector<EvidenceItem> fillers;
  for (int j = 0; j < kRetrievedPerClaim; ++j) {
    fillers.push_back({"F" + std::to_string(sample.claim_id), j});
  }
  if (covered) {
    sample.retrieved = sample.gold_evidence[0];
    for (auto& filler : fillers) {
      if (sample.retrieved.size() >= static_cast<std::size_t>(kRetrievedPerClaim)) break;
      sample.retrieved.push_back(std::move(filler));
    }
  } else {
    sample.retrieved = std::move(fillers);
    if (rng.below(2) == 0) {
      // Present but past the cutoff.
      for (const auto& gold_set : sample.gold_evidence) {
        for (const EvidenceItem& item : gold_set) {
          if (std::find(sample.retrieved.begin(), sample.retrieved.end(), item) ==
              sample.retrieved.end()) {
            sample.retrieved.push_back(item);
          }
        }
      }
    }
  }
}

inline void attach_evidence_split(std::vector<Sample>& samples, double coverage, Rng& rng) {
  std::vector<std::size_t> sr_indices;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].gold != VerdictLabel::NotEnoughInfo) sr_indices.push_back(i);
  }
  rng.shuffle(sr_indices);
  const std::size_t covered_count = static_cast<std::size_t>(
      std::floor(coverage * static_cast<double>(sr_indices.size())));
  std::vector<bool> covered(samples.size(), false);
  for (std::size_t i = 0; i < covered_count; ++i) covered[sr_indices[i]] = true;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    attach_evidence(samples[i], covered[i], rng);
  }
}

}  // namespace detail

inline std::pair<Dataset, Dataset> generate_synthetic(const SyntheticConfig& config) {
  detail::check_synthetic_config(config);
  Rng rng(config.seed);
  const auto centers = detail::cluster_centers(config.dim, config.cluster_separation);

  long long next_claim_id = 0;
  auto draw_sample = [&](VerdictLabel label) {
    Sample sample;
    sample.claim_id = next_claim_id++;
    sample.gold = label;
    const auto& center = centers[static_cast<std::size_t>(label_index(label))];
    sample.features.reserve(static_cast<std::size_t>(config.dim));
    for (int j = 0; j < config.dim; ++j) {
      sample.features.push_back(center[static_cast<std::size_t>(j)] + rng.normal());
    }
    return sample;
  };

  Dataset train;
  train.split = SplitTag::Train;
  for (VerdictLabel label : kAllLabels) {
    const long long count = config.train_counts.n[static_cast<std::size_t>(label_index(label))];
    for (long long i = 0; i < count; ++i) train.samples.push_back(draw_sample(label));
  }
  if (config.label_noise > 0.0) {
    for (Sample& sample : train.samples) {
      if (rng.uniform() < config.label_noise) {
        sample.gold = label_from_index(static_cast<int>(rng.below(3)));
      }
    }
  }

  Dataset dev;
  dev.split = SplitTag::Dev;
  for (VerdictLabel label : kAllLabels) {
    for (long long i = 0; i < config.dev_per_class; ++i) dev.samples.push_back(draw_sample(label));
  }

  detail::attach_evidence_split(train.samples, config.evidence_coverage, rng);
  detail::attach_evidence_split(dev.samples, config.evidence_coverage, rng);
  return {std::move(train), std::move(dev)};
}

}  // namespace verdict
