#include "flexssl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "flexssl/errors.hpp"
#include "flexssl/kernels.hpp"
#include "flexssl/metrics.hpp"

namespace flexssl::harness {

datagen::LabeledPool build_pool(const DatasetSpec& spec) {
  if (!spec.csv.empty()) return datagen::load_csv(spec.csv);
  return datagen::make_synthetic(datagen::parse_kind(spec.kind), spec.n_total, spec.classes, spec.noise, spec.seed);
}

datagen::SplitDataset build_split(const DatasetSpec& spec, const datagen::LabeledPool& pool,
                                  std::size_t labels_per_class, std::uint64_t seed) {
  const std::size_t budget = labels_per_class == 0 ? datagen::kAllLabeled : labels_per_class;
  return datagen::split(pool, budget, spec.eval_fraction, seed, spec.imbalance_ratio);
}

bool PlanResult::all_ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.ok; });
}

bool AblationResult::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const AblationRow& r) { return r.failed == 0; });
}

std::string run_id(const std::string& variant, std::size_t labels_per_class, std::uint64_t seed) {
  return fmt::format("{}_l{}_s{}", variant, labels_per_class, seed);
}

RunRecord run_one(const trainer::TrainConfig& config, const datagen::SplitDataset& data, const std::string& id,
                  const std::string& variant, std::size_t labels_per_class, const fs::path& dir) {
  RunRecord rec;
  rec.run_id = id;
  rec.variant = variant;
  rec.labels_per_class = labels_per_class;
  rec.seed = config.seed;
  rec.metrics_csv = dir / "metrics.csv";
  try {
    const auto run = trainer::train(config, data);
    fs::create_directories(dir);
    std::ofstream out(rec.metrics_csv, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + rec.metrics_csv.string());
    trainer::write_metrics_csv(run.checkpoints, data.class_count, out);
    rec.summary = trainer::summarize(run.checkpoints);
    rec.wall_seconds = run.wall_seconds;
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.failure = e.what();
  }
  return rec;
}

namespace {

struct Job {
  trainer::TrainConfig config;
  const datagen::SplitDataset* data;
  std::string id;
  std::string variant;
  std::size_t labels_per_class;
  fs::path dir;
};

std::vector<RunRecord> execute(const std::vector<Job>& jobs, int workers) {
  std::vector<RunRecord> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&](bool single) {
    if (!single) kernels::set_threads(1);
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& j = jobs[i];
      out[i] = run_one(j.config, *j.data, j.id, j.variant, j.labels_per_class, j.dir);
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, workers));
  if (n == 1 || jobs.size() <= 1) {
    worker(true);
    return out;
  }
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(n, jobs.size()); ++t) pool.emplace_back(worker, false);
  pool.clear();
  return out;
}

void write_file(const fs::path& path, const auto& writer) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  writer(out);
}

std::string pct(double v) { return fmt::format("{:.2f}", 100.0 * v); }

}  // namespace

std::vector<CellStats> aggregate(const ExperimentPlan& plan, const std::vector<RunRecord>& runs) {
  std::vector<CellStats> cells;
  for (const auto& variant : plan.variants) {
    for (std::size_t budget : plan.label_budgets) {
      CellStats cell;
      cell.variant = variant;
      cell.labels_per_class = budget;
      std::vector<double> best, median;
      for (const auto& r : runs) {
        if (r.variant != variant || r.labels_per_class != budget) continue;
        if (!r.ok) {
          ++cell.failed;
          continue;
        }
        cell.run_ids.push_back(r.run_id);
        best.push_back(r.summary.best_error);
        median.push_back(r.summary.median_last20_error);
      }
      cell.best_mean = metrics::mean(best);
      cell.best_std = metrics::sample_std(best);
      cell.median_mean = metrics::mean(median);
      cell.median_std = metrics::sample_std(median);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_summary_csv(const std::vector<RunRecord>& runs, std::ostream& out) {
  out << "run_id,algorithm,labels_per_class,seed,status,best_error,best_iteration,median_last20_error,"
         "final_class_accuracy\n";
  for (const auto& r : runs) {
    std::string acc;
    for (std::size_t c = 0; c < r.summary.final_class_accuracy.size(); ++c) {
      acc += (c ? ";" : "") + fmt::format("{}", r.summary.final_class_accuracy[c]);
    }
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.run_id, r.variant, r.labels_per_class, r.seed,
                       r.ok ? "ok" : "failed", r.summary.best_error, r.summary.best_iteration,
                       r.summary.median_last20_error, acc);
  }
}

void write_table_markdown(const ExperimentPlan& plan, const std::vector<CellStats>& cells, std::ostream& out) {
  auto table = [&](const char* title, bool best) {
    out << "## " << title << " (%)\n\n| Algorithm |";
    for (std::size_t b : plan.label_budgets) out << ' ' << b << " labels/class |";
    out << "\n|---|";
    for (std::size_t i = 0; i < plan.label_budgets.size(); ++i) out << "---:|";
    out << '\n';
    for (const auto& variant : plan.variants) {
      out << "| " << plan.algorithms.at(variant).display_name() << " |";
      for (std::size_t b : plan.label_budgets) {
        const auto it = std::find_if(cells.begin(), cells.end(),
                                     [&](const CellStats& c) { return c.variant == variant && c.labels_per_class == b; });
        if (it == cells.end() || it->run_ids.empty()) {
          out << " failed |";
          continue;
        }
        const double m = best ? it->best_mean : it->median_mean;
        const double s = best ? it->best_std : it->median_std;
        out << ' ' << pct(m) << " ± " << pct(s) << (it->failed ? " (partial)" : "") << " |";
      }
      out << '\n';
    }
    out << '\n';
  };
  out << "# Error rates\n\n";
  table("Best error over all checkpoints", true);
  table("Median error of the last 20 checkpoints", false);
  out << "## Runs per cell\n\n";
  for (const auto& c : cells) {
    out << "- " << c.variant << " / " << c.labels_per_class << ": ";
    for (std::size_t i = 0; i < c.run_ids.size(); ++i) out << (i ? ", " : "") << c.run_ids[i];
    if (c.failed) out << " (" << c.failed << " failed)";
    out << '\n';
  }
}

PlanResult run_plan(const ExperimentPlan& plan) {
  plan.validate();
  const auto pool = build_pool(plan.dataset);
  const fs::path out_dir(plan.out_dir);

  std::vector<std::pair<std::pair<std::size_t, std::uint64_t>, datagen::SplitDataset>> splits;
  for (std::size_t budget : plan.label_budgets) {
    for (std::uint64_t seed : plan.seeds) splits.push_back({{budget, seed}, build_split(plan.dataset, pool, budget, seed)});
  }
  auto split_for = [&](std::size_t budget, std::uint64_t seed) -> const datagen::SplitDataset* {
    for (const auto& [key, ds] : splits) {
      if (key.first == budget && key.second == seed) return &ds;
    }
    return nullptr;
  };

  std::vector<Job> jobs;
  for (const auto& variant : plan.variants) {
    for (std::size_t budget : plan.label_budgets) {
      for (std::uint64_t seed : plan.seeds) {
        const auto id = run_id(variant, budget, seed);
        jobs.push_back({plan.config_for(variant, seed), split_for(budget, seed), id, variant, budget,
                        out_dir / "runs" / id});
      }
    }
  }

  PlanResult result;
  result.runs = execute(jobs, plan.jobs);
  result.cells = aggregate(plan, result.runs);
  write_file(out_dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(result.runs, o); });
  write_file(out_dir / "table.md", [&](std::ostream& o) { write_table_markdown(plan, result.cells, o); });
  return result;
}

AblationKind parse_ablation(const std::string& name) {
  if (name == "tau_sweep") return AblationKind::tau_sweep;
  if (name == "mapping") return AblationKind::mapping;
  if (name == "warmup") return AblationKind::warmup;
  if (name == "class_balance") return AblationKind::class_balance;
  throw ConfigError("unknown ablation '" + name + "' (expected tau_sweep, mapping, warmup or class_balance)");
}

std::string to_string(AblationKind kind) {
  switch (kind) {
    case AblationKind::tau_sweep: return "tau_sweep";
    case AblationKind::mapping: return "mapping";
    case AblationKind::warmup: return "warmup";
    case AblationKind::class_balance: return "class_balance";
  }
  return "unknown";
}

namespace {

constexpr double kTauGrid[] = {0.85, 0.9, 0.95, 0.97, 1.0};

struct AblationSetting {
  std::string name;
  DatasetSpec dataset;
  trainer::TrainConfig config;  // seed filled per run
};

std::vector<AblationSetting> make_settings(AblationKind kind, const ExperimentPlan& plan) {
  std::vector<AblationSetting> out;
  const auto flex = plan.config_for("flexmatch", 0);
  switch (kind) {
    case AblationKind::tau_sweep:
      for (double tau : kTauGrid) {
        auto cfg = flex;
        cfg.spec.tau = tau;
        cfg.threshold_floor = std::min(cfg.threshold_floor, tau);
        out.push_back({fmt::format("tau={}", tau), plan.dataset, cfg});
      }
      break;
    case AblationKind::mapping:
      for (auto m : {cpl::Mapping::concave, cpl::Mapping::linear, cpl::Mapping::convex}) {
        auto cfg = flex;
        cfg.mapping = m;
        out.push_back({cpl::to_string(m), plan.dataset, cfg});
      }
      break;
    case AblationKind::warmup: {
      DatasetSpec moons = plan.dataset;
      moons.csv.clear();
      moons.kind = "two_moons";
      moons.classes = 2;
      DatasetSpec blobs = plan.dataset;
      blobs.csv.clear();
      blobs.kind = "blobs";
      blobs.classes = 4;
      blobs.noise = 1.0;
      for (const auto& ds : {moons, blobs}) {
        for (bool on : {true, false}) {
          auto cfg = flex;
          cfg.warmup = on;
          out.push_back({on ? "warmup=on" : "warmup=off", ds, cfg});
        }
      }
      break;
    }
    case AblationKind::class_balance: {
      auto fix = plan.config_for("fixmatch", 0);
      fix.class_balance = true;
      out.push_back({"FixMatch+L_b", plan.dataset, fix});
      out.push_back({"FlexMatch", plan.dataset, flex});
      break;
    }
  }
  return out;
}

std::string dataset_label(const DatasetSpec& d) { return d.csv.empty() ? d.kind : d.csv; }

std::string slug(std::string s) {
  for (char& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) c = '_';
  }
  return s;
}

}  // namespace

std::vector<std::string> ablation_settings(AblationKind kind) {
  std::vector<std::string> out;
  const ExperimentPlan plan;
  for (const auto& s : make_settings(kind, plan)) {
    out.push_back(kind == AblationKind::warmup ? s.dataset.kind + "/" + s.name : s.name);
  }
  return out;
}

AblationResult ablate(AblationKind kind, const ExperimentPlan& plan) {
  plan.validate();
  const auto settings = make_settings(kind, plan);
  const std::size_t budget = plan.label_budgets.front();
  const fs::path root = fs::path(plan.out_dir) / ("ablation_" + to_string(kind));

  // Pools and splits are shared by every setting that uses the same dataset.
  std::vector<std::pair<std::string, datagen::LabeledPool>> pools;
  std::vector<std::pair<std::string, datagen::SplitDataset>> splits;
  auto split_for = [&](const DatasetSpec& ds, std::uint64_t seed) -> const datagen::SplitDataset* {
    const auto key = fmt::format("{}:{}:{}", dataset_label(ds), ds.classes, ds.noise);
    const auto skey = fmt::format("{}:{}", key, seed);
    for (const auto& [k, s] : splits) {
      if (k == skey) return &s;
    }
    const datagen::LabeledPool* pool = nullptr;
    for (const auto& [k, p] : pools) {
      if (k == key) pool = &p;
    }
    if (!pool) {
      pools.emplace_back(key, build_pool(ds));
      pool = &pools.back().second;
    }
    splits.emplace_back(skey, build_split(ds, *pool, budget, seed));
    return &splits.back().second;
  };
  // Reserve so pointers into the vectors stay valid while jobs are queued.
  pools.reserve(settings.size());
  splits.reserve(settings.size() * plan.seeds.size());

  std::vector<Job> jobs;
  for (const auto& s : settings) {
    for (std::uint64_t seed : plan.seeds) {
      auto cfg = s.config;
      cfg.seed = seed;
      const auto setting_dir = slug(kind == AblationKind::warmup ? s.dataset.kind + "_" + s.name : s.name);
      const auto id = fmt::format("{}_s{}", setting_dir, seed);
      jobs.push_back({cfg, split_for(s.dataset, seed), id, s.name, budget, root / setting_dir / fmt::format("s{}", seed)});
    }
  }
  const auto runs = execute(jobs, plan.jobs);

  AblationResult result{kind, {}};
  std::size_t r = 0;
  for (const auto& s : settings) {
    AblationRow row;
    row.setting = s.name;
    row.dataset = dataset_label(s.dataset);
    std::vector<double> best, median;
    for (std::size_t i = 0; i < plan.seeds.size(); ++i, ++r) {
      if (!runs[r].ok) {
        ++row.failed;
        continue;
      }
      row.run_ids.push_back(runs[r].run_id);
      best.push_back(runs[r].summary.best_error);
      median.push_back(runs[r].summary.median_last20_error);
    }
    row.best_mean = metrics::mean(best);
    row.best_std = metrics::sample_std(best);
    row.median_mean = metrics::mean(median);
    result.rows.push_back(std::move(row));
  }

  write_file(root.string() + ".csv", [&](std::ostream& o) { write_ablation_csv(result, o); });
  write_file(root.string() + ".md", [&](std::ostream& o) {
    o << "# Ablation: " << to_string(kind) << "\n\n| Dataset | Setting | Best error (%) | Median last 20 (%) |\n"
      << "|---|---|---:|---:|\n";
    for (const auto& row : result.rows) {
      o << "| " << row.dataset << " | " << row.setting << " | " << pct(row.best_mean) << " ± " << pct(row.best_std)
        << " | " << pct(row.median_mean) << " |\n";
    }
  });
  return result;
}

void write_ablation_csv(const AblationResult& result, std::ostream& out) {
  out << "dataset,setting,runs,failed,best_error_mean,best_error_std,median_last20_mean\n";
  for (const auto& r : result.rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.dataset, r.setting, r.run_ids.size(), r.failed, r.best_mean,
                       r.best_std, r.median_mean);
  }
}

}  // namespace flexssl::harness
