#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flexssl/augment.hpp"
#include "flexssl/cpl.hpp"
#include "flexssl/datagen.hpp"
#include "flexssl/metrics.hpp"
#include "flexssl/mlp.hpp"
#include "flexssl/sslloss.hpp"

namespace flexssl::trainer {

struct TrainConfig {
  sslloss::AlgorithmSpec spec = sslloss::AlgorithmSpec::preset("flexmatch");
  std::size_t batch_size = 64;
  std::int64_t iterations = 20000;
  double lr = 0.03;
  double momentum = 0.9;
  double ema = 0.999;
  double weight_decay = 5e-4;
  std::int64_t checkpoint_every = 200;
  std::uint64_t seed = 1;
  std::vector<std::size_t> hidden = {64, 64};

  cpl::Mapping mapping = cpl::Mapping::convex;
  bool warmup = true;
  double threshold_floor = 0.0;
  // Freeze every normalized learning effect at 1 (flexible variants only).
  bool pin_full_effects = false;

  // Adds weight * KL(uniform || batch-mean prediction) on the prediction branch.
  bool class_balance = false;
  double class_balance_weight = 1.0;

  augment::AugmentConfig augment;

  void validate() const;
};

struct MetricsRecord {
  std::int64_t iteration = 0;
  double error = 0.0;
  std::vector<double> class_accuracy;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  double utilization = 0.0;         // mean mask pass rate since the previous checkpoint
  std::vector<double> thresholds;   // per-class thresholds at the last iteration
  double loss_s = 0.0;              // mean since the previous checkpoint
  double loss_u = 0.0;
  double pseudo_acc = 0.0;          // correctness of masked-in pseudo labels since the previous checkpoint
};

struct RunArtifact {
  std::vector<MetricsRecord> checkpoints;
  numkit::MlpModel model;
  std::optional<cpl::CurriculumState> curriculum;
  double wall_seconds = 0.0;
};

// Runs the full training loop and evaluates the EMA weights every
// `checkpoint_every` iterations (and after the last one). Throws
// DivergenceError if the total loss becomes non-finite.
RunArtifact train(const TrainConfig& config, const datagen::SplitDataset& data);

// Classification metrics of `model` on (x, y); EMA parameters by default.
metrics::ClassificationMetrics evaluate(const numkit::MlpModel& model, const Matrix& x, std::span<const int> y,
                                        bool use_ema = true);

struct RunSummary {
  double best_error = 0.0;
  std::int64_t best_iteration = 0;
  double median_last20_error = 0.0;
  std::vector<double> final_class_accuracy;
};

RunSummary summarize(const std::vector<MetricsRecord>& checkpoints);

// First checkpoint iteration whose error is <= `target_error`, if any.
std::optional<std::int64_t> first_iteration_reaching(const std::vector<MetricsRecord>& checkpoints,
                                                     double target_error);

// Column order: iteration, error, acc_0..acc_{C-1}, precision, recall, f1,
// auc, utilization, thr_0..thr_{C-1}, loss_s, loss_u, pseudo_acc.
void write_metrics_csv(const std::vector<MetricsRecord>& checkpoints, std::size_t class_count, std::ostream& out);
std::vector<MetricsRecord> read_metrics_csv(std::istream& in);

}  // namespace flexssl::trainer
