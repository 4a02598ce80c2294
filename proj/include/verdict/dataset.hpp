#pragma once

#include <string>
#include <vector>

#include "verdict/class_weights.hpp"
#include "verdict/errors.hpp"
#include "verdict/labels.hpp"
#include "verdict/metrics.hpp"

namespace verdict {

enum class SplitTag { Train, Dev, Test };

struct Sample {
  long long claim_id = 0;
  std::vector<double> features;
  VerdictLabel gold = VerdictLabel::Supported;
  std::vector<std::vector<EvidenceItem>> gold_evidence;
  std::vector<EvidenceItem> retrieved;
};

struct Dataset {
  std::vector<Sample> samples;
  SplitTag split = SplitTag::Train;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  int dim() const { return samples.empty() ? 0 : static_cast<int>(samples[0].features.size()); }

  bool has_evidence() const {
    for (const Sample& s : samples) {
      if (!s.gold_evidence.empty() || !s.retrieved.empty()) return true;
    }
    return false;
  }

  ClassCounts class_counts() const {
    ClassCounts counts;
    counts.n = {0, 0, 0};
    for (const Sample& s : samples) {
      ++counts.n[static_cast<std::size_t>(label_index(s.gold))];
    }
    return counts;
  }
};

}  // namespace verdict
