#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flexssl/config.hpp"
#include "flexssl/datagen.hpp"
#include "flexssl/trainer.hpp"

namespace flexssl::harness {

namespace fs = std::filesystem;

// Pool described by `spec`: generated, or loaded when `spec.csv` is set.
datagen::LabeledPool build_pool(const DatasetSpec& spec);

// Split for one run. A budget of 0 labels every training sample.
datagen::SplitDataset build_split(const DatasetSpec& spec, const datagen::LabeledPool& pool,
                                  std::size_t labels_per_class, std::uint64_t seed);

// Outcome of one (variant, budget, seed) cell.
struct RunRecord {
  std::string run_id;
  std::string variant;
  std::size_t labels_per_class = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;
  trainer::RunSummary summary;
  double wall_seconds = 0.0;
  fs::path metrics_csv;
};

struct CellStats {
  std::string variant;
  std::size_t labels_per_class = 0;
  std::vector<std::string> run_ids;
  std::size_t failed = 0;
  double best_mean = 0.0;
  double best_std = 0.0;
  double median_mean = 0.0;
  double median_std = 0.0;
};

struct PlanResult {
  std::vector<RunRecord> runs;
  std::vector<CellStats> cells;

  bool all_ok() const;
};

// Unique run id of one cell, e.g. "flexmatch_l4_s1".
std::string run_id(const std::string& variant, std::size_t labels_per_class, std::uint64_t seed);

// Trains one cell and writes `<dir>/metrics.csv`. Failures are captured in the record.
RunRecord run_one(const trainer::TrainConfig& config, const datagen::SplitDataset& data, const std::string& id,
                  const std::string& variant, std::size_t labels_per_class, const fs::path& dir);

// Runs every cell of the plan (up to plan.jobs at a time), then writes
// `<out>/runs/<id>/metrics.csv`, `<out>/summary.csv` (one line per run) and
// `<out>/table.md` (best and median-of-last-20 error, mean +- sample std).
PlanResult run_plan(const ExperimentPlan& plan);

// Mean/std aggregation of runs by (variant, budget), in plan order.
std::vector<CellStats> aggregate(const ExperimentPlan& plan, const std::vector<RunRecord>& runs);

void write_summary_csv(const std::vector<RunRecord>& runs, std::ostream& out);
void write_table_markdown(const ExperimentPlan& plan, const std::vector<CellStats>& cells, std::ostream& out);

enum class AblationKind { tau_sweep, mapping, warmup, class_balance };

AblationKind parse_ablation(const std::string& name);
std::string to_string(AblationKind kind);

struct AblationRow {
  std::string setting;
  std::string dataset;
  std::vector<std::string> run_ids;
  std::size_t failed = 0;
  double best_mean = 0.0;
  double best_std = 0.0;
  double median_mean = 0.0;
};

struct AblationResult {
  AblationKind kind;
  std::vector<AblationRow> rows;

  bool all_ok() const;
};

// One sub-plan per setting of the ablated knob over the plan's seeds and first
// label budget; writes `<out>/ablation_<kind>/...` plus `.csv` and `.md` tables.
//  - tau_sweep: FlexMatch with tau in {0.85, 0.9, 0.95, 0.97, 1.0}
//  - mapping: FlexMatch with concave, linear and convex mappings
//  - warmup: FlexMatch with and without warm-up on two_moons and 4-class blobs
//  - class_balance: FixMatch plus the class-balancing term vs FlexMatch
AblationResult ablate(AblationKind kind, const ExperimentPlan& plan);

// Settings the ablation would run, without training (for inspection and tests).
std::vector<std::string> ablation_settings(AblationKind kind);

void write_ablation_csv(const AblationResult& result, std::ostream& out);

// Reads each `metrics.csv` under `dir` (a run directory or a plan output
// directory) and writes per-run curve CSVs under `<run>/curves/` plus
// `<dir>/report.md`. Returns the number of runs reported.
std::size_t report(const fs::path& dir);

}  // namespace flexssl::harness
