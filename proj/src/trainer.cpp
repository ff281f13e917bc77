#include "flexssl/trainer.hpp"

#include <chrono>
#include <random>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "flexssl/errors.hpp"
#include "flexssl/optim.hpp"

namespace flexssl::trainer {

void TrainConfig::validate() const {
  spec.validate();
  augment.validate();
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (iterations <= 0) throw ConfigError("iterations must be positive");
  if (checkpoint_every <= 0 || checkpoint_every > iterations) {
    throw ConfigError("checkpoint_every must lie in [1, iterations]");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(ema >= 0.0 && ema < 1.0)) throw ConfigError("ema must lie in [0, 1)");
  if (!(weight_decay >= 0.0) || lr * weight_decay >= 1.0) throw ConfigError("weight_decay must be >= 0 and lr*wd < 1");
  if (!(threshold_floor >= 0.0 && threshold_floor <= spec.tau)) throw ConfigError("threshold_floor must lie in [0, tau]");
  if (!(class_balance_weight >= 0.0)) throw ConfigError("class_balance_weight must be >= 0");
  if (class_balance && !spec.uses_unlabeled()) throw ConfigError("class_balance needs an unlabeled term");
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("hidden layer sizes must be positive");
  }
}

metrics::ClassificationMetrics evaluate(const numkit::MlpModel& model, const Matrix& x, std::span<const int> y,
                                        bool use_ema) {
  if (x.rows() == 0) throw ConfigError("evaluation set is empty");
  return metrics::classification_metrics(numkit::softmax(numkit::forward(model, x, use_ema)), y);
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

struct WindowStats {
  double loss_s = 0.0;
  double loss_u = 0.0;
  double utilization = 0.0;
  std::int64_t steps = 0;
  std::int64_t passed = 0;
  std::int64_t passed_correct = 0;

  void reset() { *this = WindowStats{}; }
};

}  // namespace

RunArtifact train(const TrainConfig& config, const datagen::SplitDataset& data) {
  config.validate();
  if (data.eval_count() == 0) throw ConfigError("train: evaluation set is empty");
  const auto& spec = config.spec;

  std::vector<std::size_t> sizes{data.feature_dim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(data.class_count);

  RunArtifact run{{}, numkit::MlpModel(sizes, derive_seed(config.seed, 1)), std::nullopt, 0.0};
  auto& model = run.model;
  augment::Rng rng(derive_seed(config.seed, 2));
  const augment::Augmenter aug(config.augment, data.feature_scale);
  datagen::BatchSampler sampler(data, config.batch_size, spec.uses_unlabeled() ? spec.mu : 0);
  auto opt = numkit::OptimizerState::for_model(model, config.momentum, config.lr, config.iterations);

  if (spec.flexible) {
    run.curriculum.emplace(data.unlabeled_count(), data.class_count,
                           cpl::CurriculumOptions{spec.tau, config.mapping, config.warmup, config.threshold_floor});
    run.curriculum->pin_full_effects(config.pin_full_effects);
  }
  cpl::CurriculumState* state = run.curriculum ? &*run.curriculum : nullptr;
  const auto& truth = data.diagnostic_unlabeled_labels();

  std::vector<double> last_thresholds(data.class_count, spec.tau);
  WindowStats window;
  const auto t0 = std::chrono::steady_clock::now();

  for (std::int64_t k = 0; k < config.iterations; ++k) {
    const auto batch = sampler.next(rng);
    auto sup = sslloss::supervised_loss(model, batch.labeled_x, batch.labeled_y, aug, rng);
    numkit::Gradients grads = numkit::backward(model, sup.trace, sup.dlogits);
    double total = sup.loss;
    window.loss_s += sup.loss;

    if (spec.uses_unlabeled()) {
      auto unsup = sslloss::unsupervised_loss(spec, model, batch.unlabeled_x, batch.unlabeled_index, state, aug, rng);
      total = sslloss::total_loss(spec, sup.loss, unsup.loss);
      Matrix& dl = unsup.pass.dlogits;
      if (spec.lambda != 1.0) {
        for (double& v : dl.values()) v *= spec.lambda;
      }
      if (config.class_balance) {
        total += config.class_balance_weight * sslloss::class_balance_loss(unsup.pass.probs);
        const Matrix gb = sslloss::class_balance_grad(unsup.pass.probs);
        auto dv = dl.values();
        auto bv = gb.values();
        for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += config.class_balance_weight * bv[i];
      }
      grads += numkit::backward(model, unsup.pass.trace, dl);

      window.loss_u += unsup.loss;
      window.utilization += unsup.utilization;
      for (std::size_t i = 0; i < unsup.mask.size(); ++i) {
        if (!unsup.mask[i]) continue;
        ++window.passed;
        if (unsup.pseudo_labels[i] == truth[batch.unlabeled_index[i]]) ++window.passed_correct;
      }
      last_thresholds = unsup.thresholds;
    }

    if (!std::isfinite(total) || !grads.all_finite()) {
      throw DivergenceError(fmt::format("non-finite loss at iteration {}", k + 1), k + 1);
    }

    const double lr = opt.current_lr();
    numkit::apply_weight_decay(model, lr, config.weight_decay);
    numkit::sgd_step(model, grads, opt);
    numkit::ema_update(model, config.ema);
    ++window.steps;

    const std::int64_t done = k + 1;
    if (done % config.checkpoint_every == 0 || done == config.iterations) {
      const auto m = evaluate(model, data.eval_x, data.eval_y, true);
      MetricsRecord rec;
      rec.iteration = done;
      rec.error = m.error;
      rec.class_accuracy = m.class_accuracy;
      rec.precision = m.precision;
      rec.recall = m.recall;
      rec.f1 = m.f1;
      rec.auc = m.auc;
      const auto steps = static_cast<double>(window.steps);
      rec.utilization = window.utilization / steps;
      rec.thresholds = last_thresholds;
      rec.loss_s = window.loss_s / steps;
      rec.loss_u = window.loss_u / steps;
      rec.pseudo_acc = window.passed == 0 ? 0.0 : static_cast<double>(window.passed_correct) / static_cast<double>(window.passed);
      run.checkpoints.push_back(std::move(rec));
      window.reset();
    }
  }
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

RunSummary summarize(const std::vector<MetricsRecord>& checkpoints) {
  if (checkpoints.empty()) throw ArgumentError("summarize: no checkpoints");
  RunSummary s;
  std::vector<double> errors;
  errors.reserve(checkpoints.size());
  s.best_error = checkpoints.front().error;
  s.best_iteration = checkpoints.front().iteration;
  for (const auto& c : checkpoints) {
    errors.push_back(c.error);
    if (c.error < s.best_error) {
      s.best_error = c.error;
      s.best_iteration = c.iteration;
    }
  }
  s.median_last20_error = metrics::median_of_last(errors, 20);
  s.final_class_accuracy = checkpoints.back().class_accuracy;
  return s;
}

std::optional<std::int64_t> first_iteration_reaching(const std::vector<MetricsRecord>& checkpoints,
                                                     double target_error) {
  for (const auto& c : checkpoints) {
    if (c.error <= target_error) return c.iteration;
  }
  return std::nullopt;
}

void write_metrics_csv(const std::vector<MetricsRecord>& checkpoints, std::size_t class_count, std::ostream& out) {
  out << "iteration,error";
  for (std::size_t c = 0; c < class_count; ++c) out << ",acc_" << c;
  out << ",precision,recall,f1,auc,utilization";
  for (std::size_t c = 0; c < class_count; ++c) out << ",thr_" << c;
  out << ",loss_s,loss_u,pseudo_acc\n";
  for (const auto& r : checkpoints) {
    if (r.class_accuracy.size() != class_count || r.thresholds.size() != class_count) {
      throw ShapeError("metrics record has the wrong class count");
    }
    std::string line = fmt::format("{},{}", r.iteration, r.error);
    for (double a : r.class_accuracy) line += fmt::format(",{}", a);
    line += fmt::format(",{},{},{},{},{}", r.precision, r.recall, r.f1, r.auc, r.utilization);
    for (double t : r.thresholds) line += fmt::format(",{}", t);
    line += fmt::format(",{},{},{}\n", r.loss_s, r.loss_u, r.pseudo_acc);
    out << line;
  }
}

std::vector<MetricsRecord> read_metrics_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty metrics file", line_no);
  std::size_t acc_cols = 0;
  {
    std::stringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.starts_with("acc_")) ++acc_cols;
    }
  }
  const std::size_t expected = 2 + acc_cols + 5 + acc_cols + 3;
  std::vector<MetricsRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) {
      try {
        v.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ParseError("bad metrics value '" + field + "'", line_no);
      }
    }
    if (v.size() != expected) throw ParseError("wrong number of metrics columns", line_no);
    MetricsRecord r;
    std::size_t i = 0;
    r.iteration = static_cast<std::int64_t>(v[i++]);
    r.error = v[i++];
    r.class_accuracy.assign(v.begin() + static_cast<long>(i), v.begin() + static_cast<long>(i + acc_cols));
    i += acc_cols;
    r.precision = v[i++];
    r.recall = v[i++];
    r.f1 = v[i++];
    r.auc = v[i++];
    r.utilization = v[i++];
    r.thresholds.assign(v.begin() + static_cast<long>(i), v.begin() + static_cast<long>(i + acc_cols));
    i += acc_cols;
    r.loss_s = v[i++];
    r.loss_u = v[i++];
    r.pseudo_acc = v[i++];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace flexssl::trainer
