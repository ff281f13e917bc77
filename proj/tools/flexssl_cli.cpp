// flexssl command-line entry point.
//
//   flexssl gen-data  --config cfg.ini --out pool.csv
//   flexssl train     --config cfg.ini --algorithm flexmatch --labels-per-class 4 --out runs/one
//   flexssl plan      --config cfg.ini --jobs 4 --out runs/table
//   flexssl ablate    mapping --config cfg.ini --out runs/abl
//   flexssl report    runs/table
//   flexssl print-defaults > cfg.ini

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "flexssl/config.hpp"
#include "flexssl/datagen.hpp"
#include "flexssl/harness.hpp"

namespace fs = std::filesystem;
using namespace flexssl;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out;
  std::optional<std::string> algorithm;
  std::optional<std::size_t> labels_per_class;
  std::optional<std::int64_t> iterations;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Config file (sectioned key = value)");
    app->add_option("--seed", seed, "Run seed (replaces the plan's seed list)");
    app->add_option("--jobs", jobs, "Parallel runs");
    app->add_option("--out", out, "Output directory");
    app->add_option("--algorithm", algorithm, "Algorithm id (replaces the plan's algorithm list)");
    app->add_option("--labels-per-class", labels_per_class, "Label budget per class (0 = all)");
    app->add_option("--iterations", iterations, "Training iterations K");
  }

  harness::ExperimentPlan plan() const {
    harness::ExperimentPlan p = config.empty() ? harness::ExperimentPlan{} : harness::parse_config(config);
    if (seed) p.seeds = {*seed};
    if (jobs) p.jobs = *jobs;
    if (out) p.out_dir = *out;
    if (algorithm) p.variants = {*algorithm};
    if (labels_per_class) p.label_budgets = {*labels_per_class};
    if (iterations) {
      p.train.iterations = *iterations;
      p.train.checkpoint_every = std::min(p.train.checkpoint_every, *iterations);
    }
    return p;
  }
};

void print_plan_result(const harness::PlanResult& r) {
  for (const auto& run : r.runs) {
    if (run.ok) {
      std::cout << fmt::format("{:<28} best {:6.2f}%  median20 {:6.2f}%  ({:.1f}s)\n", run.run_id,
                               100.0 * run.summary.best_error, 100.0 * run.summary.median_last20_error,
                               run.wall_seconds);
    } else {
      std::cout << fmt::format("{:<28} FAILED: {}\n", run.run_id, run.failure);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised training with curriculum pseudo labeling"};
  app.require_subcommand(1);

  CommonFlags gen_flags, train_flags, plan_flags, ablate_flags;

  auto* gen = app.add_subcommand("gen-data", "Write the configured dataset pool as CSV");
  gen_flags.attach(gen);

  auto* train = app.add_subcommand("train", "Train one algorithm / budget / seed");
  train_flags.attach(train);

  auto* plan = app.add_subcommand("plan", "Run the algorithm x budget x seed plan and tabulate");
  plan_flags.attach(plan);

  std::string ablation_kind;
  auto* ablate = app.add_subcommand("ablate", "Run one ablation: tau_sweep, mapping, warmup, class_balance");
  ablate->add_option("kind", ablation_kind, "Ablation kind")->required();
  ablate_flags.attach(ablate);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Write curve CSVs and a markdown summary for a run directory");
  report->add_option("dir", report_dir, "Run or plan output directory")->required();

  auto* defaults = app.add_subcommand("print-defaults", "Print a config file holding every default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const auto p = gen_flags.plan();
      const auto pool = harness::build_pool(p.dataset);
      if (gen_flags.out) {
        std::ofstream out(*gen_flags.out, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + *gen_flags.out);
        datagen::write_csv(pool, out);
      } else {
        datagen::write_csv(pool, std::cout);
      }
      return 0;
    }
    if (*train) {
      auto p = train_flags.plan();
      if (!train_flags.seed) p.seeds = {p.seeds.front()};
      if (!train_flags.labels_per_class) p.label_budgets = {p.label_budgets.front()};
      if (!train_flags.algorithm) p.variants = {p.variants.back()};
      p.jobs = 1;
      const auto r = harness::run_plan(p);
      print_plan_result(r);
      return r.all_ok() ? 0 : 1;
    }
    if (*plan) {
      const auto r = harness::run_plan(plan_flags.plan());
      print_plan_result(r);
      std::cout << "summary: " << (fs::path(plan_flags.plan().out_dir) / "table.md").string() << '\n';
      return r.all_ok() ? 0 : 1;
    }
    if (*ablate) {
      const auto kind = harness::parse_ablation(ablation_kind);
      const auto r = harness::ablate(kind, ablate_flags.plan());
      for (const auto& row : r.rows) {
        std::cout << fmt::format("{:<10} {:<14} best {:6.2f}% ± {:.2f}  median20 {:6.2f}%{}\n", row.dataset, row.setting,
                                 100.0 * row.best_mean, 100.0 * row.best_std, 100.0 * row.median_mean,
                                 row.failed ? fmt::format("  ({} failed)", row.failed) : "");
      }
      return r.all_ok() ? 0 : 1;
    }
    if (*report) {
      const auto n = harness::report(report_dir);
      std::cout << "reported " << n << " run(s); see " << (fs::path(report_dir) / "report.md").string() << '\n';
      return 0;
    }
    if (*defaults) {
      harness::print_defaults(std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
