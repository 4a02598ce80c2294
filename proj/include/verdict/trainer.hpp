#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "verdict/dataset.hpp"
#include "verdict/errors.hpp"
#include "verdict/loss.hpp"
#include "verdict/metrics.hpp"
#include "verdict/rng.hpp"

namespace verdict {

// Linear softmax classifier z = W x + b over fixed feature vectors. Stands in
// for the full-scale verdict predictors the objectives are meant for.
struct LinearModel {
  int dim = 0;
  std::vector<double> weights;  // 3 x dim, row-major
  Vec3 bias{0.0, 0.0, 0.0};

  double weight(int cls, int feature) const {
    return weights[static_cast<std::size_t>(cls * dim + feature)];
  }
  double& weight(int cls, int feature) {
    return weights[static_cast<std::size_t>(cls * dim + feature)];
  }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

struct TrainConfig {
  LossSpec loss;
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t seed = 42;
  bool shuffle = true;
};

struct TrainReport {
  std::vector<double> epoch_mean_loss;
  double dev_label_accuracy = 0.0;
  std::uint64_t seed = 0;
};

inline Vec3 forward(const LinearModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.dim) {
    throw InvalidInput("feature dimension " + std::to_string(x.size()) +
                       " does not match model dimension " + std::to_string(model.dim));
  }
  Vec3 z = model.bias;
  for (int cls = 0; cls < 3; ++cls) {
    double dot = 0.0;
    for (int j = 0; j < model.dim; ++j) {
      dot += model.weight(cls, j) * x[static_cast<std::size_t>(j)];
    }
    z[static_cast<std::size_t>(cls)] += dot;
  }
  return z;
}

// Argmax over the predicted distribution; exact ties go to the lowest index.
inline VerdictLabel predict(const LinearModel& model, std::span<const double> x) {
  const Vec3 p = softmax(forward(model, x));
  int best = 0;
  for (int j = 1; j < 3; ++j) {
    if (p[static_cast<std::size_t>(j)] > p[static_cast<std::size_t>(best)]) best = j;
  }
  return label_from_index(best);
}

inline std::vector<VerdictLabel> predict_all(const LinearModel& model, const Dataset& data) {
  std::vector<VerdictLabel> out;
  out.reserve(data.size());
  for (const Sample& sample : data.samples) out.push_back(predict(model, sample.features));
  return out;
}

inline double dataset_label_accuracy(const LinearModel& model, const Dataset& data) {
  if (data.empty()) throw InvalidInput("dataset must be non-empty");
  long long correct = 0;
  for (const Sample& sample : data.samples) {
    if (predict(model, sample.features) == sample.gold) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace detail {

inline void check_train_config(const TrainConfig& config) {
  check_spec(config.loss);
  if (config.epochs < 1) throw InvalidInput("epochs must be >= 1");
  if (config.batch_size < 1) throw InvalidInput("batch_size must be >= 1");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw InvalidInput("learning_rate must be finite and > 0");
  }
}

inline void check_split(const Dataset& data, const char* name, int dim) {
  if (data.empty()) throw InvalidInput(std::string(name) + " split must be non-empty");
  for (const Sample& sample : data.samples) {
    if (static_cast<int>(sample.features.size()) != dim) {
      throw InvalidInput(std::string(name) + " split has inconsistent feature dimensions");
    }
  }
}

}  // namespace detail

// Plain mini-batch SGD, bitwise deterministic for a fixed config:
//   - W and b initialized uniform in [-0.01, 0.01], W row-major then b;
//   - per-epoch Fisher-Yates shuffle when config.shuffle is set;
//   - batches are consecutive chunks, the last one possibly short;
//   - each batch applies param -= lr * (gradient_sum / batch_len).
inline std::pair<LinearModel, TrainReport> train(const Dataset& train_split,
                                                 const Dataset& dev_split,
                                                 const TrainConfig& config) {
  detail::check_train_config(config);
  const int dim = train_split.dim();
  if (dim < 1) throw InvalidInput("train split must have at least one feature");
  detail::check_split(train_split, "train", dim);
  detail::check_split(dev_split, "dev", dim);

  Rng rng(config.seed);
  LinearModel model;
  model.dim = dim;
  model.weights.resize(static_cast<std::size_t>(3 * dim));
  for (double& w : model.weights) w = rng.uniform(-0.01, 0.01);
  for (double& b : model.bias) b = rng.uniform(-0.01, 0.01);

  const std::size_t n = train_split.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  report.seed = config.seed;
  std::vector<double> grad_w(static_cast<std::size_t>(3 * dim));
  Vec3 grad_b;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) rng.shuffle(order);
    double epoch_loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const double batch_len = static_cast<double>(stop - start);
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      grad_b.fill(0.0);
      for (std::size_t s = start; s < stop; ++s) {
        const Sample& sample = train_split.samples[order[s]];
        const Vec3 z = forward(model, sample.features);
        for (double v : z) {
          if (!std::isfinite(v)) {
            throw TrainingDiverged(static_cast<std::size_t>(epoch), batch_index,
                                   "non-finite logits");
          }
        }
        const LossResult r = loss_gradient(config.loss, one_hot(sample.gold), z);
        if (!std::isfinite(r.value)) {
          throw TrainingDiverged(static_cast<std::size_t>(epoch), batch_index,
                                 "non-finite loss value");
        }
        epoch_loss_sum += r.value;
        for (int cls = 0; cls < 3; ++cls) {
          const double g = r.grad_z[static_cast<std::size_t>(cls)];
          grad_b[static_cast<std::size_t>(cls)] += g;
          for (int j = 0; j < dim; ++j) {
            grad_w[static_cast<std::size_t>(cls * dim + j)] +=
                g * sample.features[static_cast<std::size_t>(j)];
          }
        }
      }
      for (std::size_t i = 0; i < model.weights.size(); ++i) {
        model.weights[i] -= config.learning_rate * (grad_w[i] / batch_len);
      }
      for (std::size_t cls = 0; cls < 3; ++cls) {
        model.bias[cls] -= config.learning_rate * (grad_b[cls] / batch_len);
      }
      ++batch_index;
    }
    report.epoch_mean_loss.push_back(epoch_loss_sum / static_cast<double>(n));
  }
  report.dev_label_accuracy = dataset_label_accuracy(model, dev_split);
  return {std::move(model), report};
}

// Highest dev label accuracy wins; exact ties go to the lowest run index.
inline std::size_t select_best_of_n(std::span<const TrainReport> runs) {
  if (runs.empty()) throw InvalidInput("run set must be non-empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].dev_label_accuracy > runs[best].dev_label_accuracy) best = i;
  }
  return best;
}

inline const std::pair<LinearModel, TrainReport>& select_best_of_n(
    const std::vector<std::pair<LinearModel, TrainReport>>& runs) {
  if (runs.empty()) throw InvalidInput("run set must be non-empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].second.dev_label_accuracy > runs[best].second.dev_label_accuracy) best = i;
  }
  return runs[best];
}

// ---------------------------------------------------------------------------
// Checkpoint container, format version 1: a single JSON object holding the
// dimension, W row-major, b, and the TrainConfig used. Doubles round-trip
// exactly through the serializer.

inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json loss_spec_to_json(const LossSpec& spec) {
  nlohmann::json obj;
  obj["kind"] = std::string(loss_kind_name(spec.kind));
  obj["lambda"] = spec.lambda;
  if (spec.weights) {
    obj["weights"] = std::vector<double>(spec.weights->begin(), spec.weights->end());
  } else {
    obj["weights"] = nullptr;
  }
  return obj;
}

inline LossSpec loss_spec_from_json(const nlohmann::json& obj) {
  LossSpec spec;
  spec.kind = loss_kind_from_name(obj.at("kind").get<std::string>());
  spec.lambda = obj.at("lambda").get<double>();
  if (obj.contains("weights") && !obj.at("weights").is_null()) {
    const auto w = obj.at("weights").get<std::vector<double>>();
    if (w.size() != 3) throw InvalidInput("checkpoint weights must have 3 entries");
    spec.weights = Vec3{w[0], w[1], w[2]};
  }
  return spec;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const LinearModel& model,
                            const TrainConfig& config) {
  nlohmann::json obj;
  obj["format"] = "verdict-checkpoint";
  obj["version"] = kCheckpointVersion;
  obj["dim"] = model.dim;
  obj["weights"] = model.weights;
  obj["bias"] = std::vector<double>(model.bias.begin(), model.bias.end());
  nlohmann::json cfg;
  cfg["loss"] = detail::loss_spec_to_json(config.loss);
  cfg["epochs"] = config.epochs;
  cfg["batch_size"] = config.batch_size;
  cfg["learning_rate"] = config.learning_rate;
  cfg["seed"] = config.seed;
  cfg["shuffle"] = config.shuffle;
  obj["config"] = cfg;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << obj.dump(2) << '\n';
  if (!out) throw IoError("failed while writing " + path);
}

inline std::pair<LinearModel, TrainConfig> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("cannot parse checkpoint " + path + ": " + e.what());
  }
  if (!obj.is_object() || obj.value("format", std::string()) != "verdict-checkpoint") {
    throw InvalidInput(path + " is not a verdict checkpoint");
  }
  if (obj.value("version", 0) != kCheckpointVersion) {
    throw InvalidInput("unsupported checkpoint version in " + path);
  }
  LinearModel model;
  model.dim = obj.at("dim").get<int>();
  model.weights = obj.at("weights").get<std::vector<double>>();
  const auto bias = obj.at("bias").get<std::vector<double>>();
  if (model.dim < 1 || model.weights.size() != static_cast<std::size_t>(3 * model.dim) ||
      bias.size() != 3) {
    throw InvalidInput("checkpoint " + path + " has inconsistent dimensions");
  }
  model.bias = Vec3{bias[0], bias[1], bias[2]};
  TrainConfig config;
  const auto& cfg = obj.at("config");
  config.loss = detail::loss_spec_from_json(cfg.at("loss"));
  config.epochs = cfg.at("epochs").get<int>();
  config.batch_size = cfg.at("batch_size").get<int>();
  config.learning_rate = cfg.at("learning_rate").get<double>();
  config.seed = cfg.at("seed").get<std::uint64_t>();
  config.shuffle = cfg.at("shuffle").get<bool>();
  return {std::move(model), config};
}

}  // namespace verdict
