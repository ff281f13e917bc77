#include <algorithm>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "flexssl/errors.hpp"
#include "flexssl/harness.hpp"

namespace flexssl::harness {
namespace {

std::vector<fs::path> find_runs(const fs::path& dir) {
  std::vector<fs::path> out;
  if (fs::exists(dir / "metrics.csv")) {
    out.push_back(dir);
    return out;
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "metrics.csv") out.push_back(entry.path().parent_path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_curve(const fs::path& path, const std::string& header, const std::vector<trainer::MetricsRecord>& recs,
                 const auto& row) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << header << '\n';
  for (const auto& r : recs) out << r.iteration << row(r) << '\n';
}

std::string join_values(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += fmt::format(",{}", x);
  return s;
}

}  // namespace

std::size_t report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("report: '" + dir.string() + "' is not a directory");
  const auto runs = find_runs(dir);
  if (runs.empty()) throw ConfigError("report: no metrics.csv found under '" + dir.string() + "'");

  std::string md = "# Run report\n\n| Run | Checkpoints | Best error (%) | Best at | Median last 20 (%) | Final per-class accuracy |\n"
                   "|---|---:|---:|---:|---:|---|\n";
  for (const auto& run_dir : runs) {
    std::ifstream in(run_dir / "metrics.csv");
    const auto recs = trainer::read_metrics_csv(in);
    if (recs.empty()) continue;
    const std::size_t classes = recs.front().class_accuracy.size();
    const fs::path curves = run_dir / "curves";
    fs::create_directories(curves);

    std::string cls_header, thr_header;
    for (std::size_t c = 0; c < classes; ++c) {
      cls_header += fmt::format(",acc_{}", c);
      thr_header += fmt::format(",thr_{}", c);
    }
    write_curve(curves / "loss.csv", "iteration,loss_s,loss_u", recs,
                [](const auto& r) { return fmt::format(",{},{}", r.loss_s, r.loss_u); });
    write_curve(curves / "error.csv", "iteration,error,precision,recall,f1,auc", recs, [](const auto& r) {
      return fmt::format(",{},{},{},{},{}", r.error, r.precision, r.recall, r.f1, r.auc);
    });
    write_curve(curves / "utilization.csv", "iteration,utilization,pseudo_acc", recs,
                [](const auto& r) { return fmt::format(",{},{}", r.utilization, r.pseudo_acc); });
    write_curve(curves / "class_accuracy.csv", "iteration" + cls_header, recs,
                [](const auto& r) { return join_values(r.class_accuracy); });
    write_curve(curves / "thresholds.csv", "iteration" + thr_header, recs,
                [](const auto& r) { return join_values(r.thresholds); });

    const auto s = trainer::summarize(recs);
    std::string acc;
    for (std::size_t c = 0; c < s.final_class_accuracy.size(); ++c) {
      acc += (c ? " " : "") + fmt::format("{:.3f}", s.final_class_accuracy[c]);
    }
    const auto name = fs::relative(run_dir, dir).string();
    md += fmt::format("| {} | {} | {:.2f} | {} | {:.2f} | {} |\n", name == "." ? run_dir.filename().string() : name,
                      recs.size(), 100.0 * s.best_error, s.best_iteration, 100.0 * s.median_last20_error, acc);
  }
  std::ofstream out(dir / "report.md", std::ios::binary);
  if (!out) throw ConfigError("cannot write report.md");
  out << md;
  return runs.size();
}

}  // namespace flexssl::harness
