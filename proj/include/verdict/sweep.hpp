#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "verdict/class_weights.hpp"
#include "verdict/dataset.hpp"
#include "verdict/errors.hpp"
#include "verdict/loss.hpp"
#include "verdict/metrics.hpp"
#include "verdict/trainer.hpp"

namespace verdict {

// Hyperparameter grid for the lambda/beta sweep. beta = 0 means class
// weighting off.
struct SweepGrid {
  std::vector<double> lambdas{0.03125, 0.0625, 0.125, 0.25, 0.5, 1.0};
  std::vector<double> betas{0.0, 0.9999, 0.99999, 0.999999};
};

struct ReportRow {
  LossKind kind = LossKind::CE;
  double lambda = 0.0;  // always 0 for CE rows
  bool weighted = false;
  double beta = 0.0;
  double dev_la = 0.0;
  std::optional<double> dev_fs;
  double delta_la = 0.0;               // vs the unweighted CE baseline row
  std::optional<double> delta_fs;
  double mcnemar_p = 1.0;              // label-correctness changes vs baseline
  bool significant = false;            // p < 0.05
  bool best = false;                   // per-kind argmax of dev LA
};

struct SweepOptions {
  TrainConfig base;   // kind/lambda/weights are overwritten per grid point
  int runs = 3;
  int jobs = 1;
  int fever_k = 5;
};

// Sorts and deduplicates grid values in place; returns one warning per
// removed duplicate or out-of-domain value rejection is left to run_sweep.
inline std::vector<std::string> normalize_grid(SweepGrid& grid) {
  std::vector<std::string> warnings;
  auto dedupe = [&warnings](std::vector<double>& values, const char* name) {
    std::sort(values.begin(), values.end());
    auto last = std::unique(values.begin(), values.end());
    if (last != values.end()) {
      warnings.push_back("duplicate " + std::string(name) +
                         " grid values removed: " + std::to_string(values.end() - last));
      values.erase(last, values.end());
    }
  };
  dedupe(grid.lambdas, "lambda");
  dedupe(grid.betas, "beta");
  return warnings;
}

namespace detail {

struct SweepPoint {
  LossKind kind;
  double lambda;
  double beta;
};

struct PointOutcome {
  double dev_la = 0.0;
  std::optional<double> dev_fs;
  std::vector<bool> dev_correct;
};

inline std::vector<SweepPoint> enumerate_points(const SweepGrid& grid) {
  std::vector<SweepPoint> points;
  // The unweighted CE baseline is always part of the run set.
  points.push_back({LossKind::CE, 0.0, 0.0});
  for (double beta : grid.betas) {
    if (beta != 0.0) points.push_back({LossKind::CE, 0.0, beta});
  }
  for (LossKind kind : {LossKind::OVA, LossKind::SRN, LossKind::SR}) {
    for (double lambda : grid.lambdas) {
      for (double beta : grid.betas) {
        points.push_back({kind, lambda, beta});
      }
    }
  }
  return points;
}

inline PointOutcome run_point(const Dataset& train_split, const Dataset& dev_split,
                              const SweepPoint& point, const SweepOptions& options,
                              const ClassCounts& train_counts, bool dev_has_evidence) {
  TrainConfig config = options.base;
  config.loss.kind = point.kind;
  config.loss.lambda = point.lambda;
  if (point.beta != 0.0) {
    config.loss.weights = class_balanced_weights(train_counts, point.beta);
  } else {
    config.loss.weights.reset();
  }

  // Run seeds depend only on (base seed, run index): grid points that reduce
  // to the same objective (e.g. lambda = 0) then reproduce the baseline run
  // bit for bit.
  std::vector<std::pair<LinearModel, TrainReport>> runs;
  runs.reserve(static_cast<std::size_t>(options.runs));
  for (int r = 0; r < options.runs; ++r) {
    TrainConfig run_config = config;
    run_config.seed = mix_seed(options.base.seed, static_cast<std::uint64_t>(r));
    runs.push_back(train(train_split, dev_split, run_config));
  }
  const auto& [model, report] = select_best_of_n(runs);

  PointOutcome outcome;
  outcome.dev_la = report.dev_label_accuracy;
  outcome.dev_correct.reserve(dev_split.size());
  std::vector<PredictionRecord> records;
  records.reserve(dev_split.size());
  for (const Sample& sample : dev_split.samples) {
    const VerdictLabel predicted = predict(model, sample.features);
    outcome.dev_correct.push_back(predicted == sample.gold);
    records.push_back(
        {sample.claim_id, sample.gold, predicted, sample.gold_evidence, sample.retrieved});
  }
  if (dev_has_evidence) {
    outcome.dev_fs = fever_score(records, options.fever_k);
  }
  return outcome;
}

}  // namespace detail

// Runs the full grid (plus the CE baseline) and reports every point with its
// deltas and McNemar p-value against the baseline. Points execute on up to
// options.jobs threads; output is independent of the thread count.
inline std::vector<ReportRow> run_sweep(const Dataset& train_split, const Dataset& dev_split,
                                        const SweepGrid& grid, const SweepOptions& options) {
  if (options.runs < 1) throw InvalidInput("runs must be >= 1");
  if (options.jobs < 1) throw InvalidInput("jobs must be >= 1");
  for (double lambda : grid.lambdas) {
    if (!(lambda >= 0.0)) throw InvalidInput("lambda grid values must be >= 0");
  }
  for (double beta : grid.betas) {
    if (!(beta >= 0.0 && beta < 1.0)) throw InvalidInput("beta grid values must lie in [0, 1)");
  }

  const auto points = detail::enumerate_points(grid);
  const ClassCounts train_counts = train_split.class_counts();
  const bool dev_has_evidence = dev_split.has_evidence();

  std::vector<detail::PointOutcome> outcomes(points.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      try {
        outcomes[i] = detail::run_point(train_split, dev_split, points[i], options,
                                        train_counts, dev_has_evidence);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const std::size_t thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(options.jobs), points.size());
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
  }
  if (failure) std::rethrow_exception(failure);

  const detail::PointOutcome& baseline = outcomes[0];
  std::vector<ReportRow> rows;
  rows.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& point = points[i];
    const auto& outcome = outcomes[i];
    ReportRow row;
    row.kind = point.kind;
    row.lambda = point.lambda;
    row.weighted = point.beta != 0.0;
    row.beta = point.beta;
    row.dev_la = outcome.dev_la;
    row.dev_fs = outcome.dev_fs;
    row.delta_la = outcome.dev_la - baseline.dev_la;
    if (outcome.dev_fs && baseline.dev_fs) row.delta_fs = *outcome.dev_fs - *baseline.dev_fs;
    const McNemarResult mc = mcnemar(baseline.dev_correct, outcome.dev_correct);
    row.mcnemar_p = mc.p_value;
    row.significant = mc.p_value < 0.05;
    rows.push_back(row);
  }

  // Per-kind argmax of dev LA; rows are ordered by (kind, lambda, beta), so
  // keeping the first strict maximum applies the smaller-lambda-then-beta
  // tie-break.
  for (LossKind kind : kAllLossKinds) {
    std::size_t best = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].kind != kind) continue;
      if (best == rows.size() || rows[i].dev_la > rows[best].dev_la) best = i;
    }
    if (best < rows.size()) rows[best].best = true;
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Rendering. Both forms are byte-stable functions of the rows.

namespace detail {

inline std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

}  // namespace detail

inline std::string sweep_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "kind,lambda,weighted,beta,dev_la,dev_fs,delta_la,delta_fs,mcnemar_p,significant,best\n";
  for (const ReportRow& row : rows) {
    out << loss_kind_name(row.kind) << ',' << detail::format_double(row.lambda) << ','
        << (row.weighted ? "yes" : "no") << ',' << detail::format_double(row.beta) << ','
        << detail::format_double(row.dev_la) << ','
        << (row.dev_fs ? detail::format_double(*row.dev_fs) : "") << ','
        << detail::format_double(row.delta_la) << ','
        << (row.delta_fs ? detail::format_double(*row.delta_fs) : "") << ','
        << detail::format_double(row.mcnemar_p) << ',' << (row.significant ? "yes" : "no") << ','
        << (row.best ? "yes" : "no") << '\n';
  }
  return out.str();
}

namespace detail {

inline std::string score_cell(double value, double delta, bool with_delta, bool significant) {
  std::string cell = format_percent(value);
  if (with_delta) {
    cell += " (";
    cell += delta >= 0.0 ? "+" : "";
    cell += format_percent(delta);
    cell += ")";
  }
  if (significant) cell += "*";
  return cell;
}

}  // namespace detail

inline std::string sweep_table(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %-9s %-9s %-8s %-22s %-22s %-10s %s\n", "objective",
                "lambda", "weighting", "beta", "dev LA", "dev FS", "mcnemar p", "");
  out << line;
  for (const ReportRow& row : rows) {
    const bool is_baseline = row.kind == LossKind::CE && !row.weighted;
    std::string name(loss_kind_name(row.kind));
    if (is_baseline) name += " (base)";
    const std::string lambda_cell =
        row.kind == LossKind::CE ? "-" : detail::format_double(row.lambda);
    const std::string beta_cell = row.weighted ? detail::format_double(row.beta) : "-";
    const std::string la_cell =
        detail::score_cell(row.dev_la, row.delta_la, !is_baseline, row.significant);
    const std::string fs_cell =
        row.dev_fs ? detail::score_cell(*row.dev_fs, row.delta_fs.value_or(0.0),
                                        !is_baseline && row.delta_fs.has_value(), false)
                   : "-";
    char p_cell[32];
    std::snprintf(p_cell, sizeof(p_cell), "%.4g", row.mcnemar_p);
    std::snprintf(line, sizeof(line), "%-10s %-9s %-9s %-8s %-22s %-22s %-10s %s\n", name.c_str(),
                  lambda_cell.c_str(), row.weighted ? "yes" : "no", beta_cell.c_str(),
                  la_cell.c_str(), fs_cell.c_str(), p_cell, row.best ? "<= best" : "");
    out << line;
  }

  // Tuned-vs-fixed comparison for OVA when the grid carried lambda = 1.
  const ReportRow* ova_best = nullptr;
  const ReportRow* ova_unit = nullptr;
  for (const ReportRow& row : rows) {
    if (row.kind != LossKind::OVA) continue;
    if (row.best) ova_best = &row;
    if (row.lambda == 1.0 && (ova_unit == nullptr || row.dev_la > ova_unit->dev_la)) {
      ova_unit = &row;
    }
  }
  if (ova_best && ova_unit && ova_best->lambda != 1.0) {
    out << "\nova: tuned lambda vs fixed lambda=1\n";
    for (const ReportRow* row : {ova_best, ova_unit}) {
      std::snprintf(line, sizeof(line), "  lambda=%-8s beta=%-8s LA %-8s FS %s\n",
                    detail::format_double(row->lambda).c_str(),
                    row->weighted ? detail::format_double(row->beta).c_str() : "-",
                    format_percent(row->dev_la).c_str(),
                    row->dev_fs ? format_percent(*row->dev_fs).c_str() : "-");
      out << line;
    }
  }
  return out.str();
}

}  // namespace verdict
