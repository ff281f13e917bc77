#include "flexssl/sslloss.hpp"

#include <algorithm>
#include <cmath>

#include "flexssl/errors.hpp"

namespace flexssl::sslloss {

AlgorithmSpec AlgorithmSpec::preset(const std::string& name) {
  AlgorithmSpec s;
  if (name == "supervised") {
    s.family = Family::supervised;
    s.mu = 0;
    s.lambda = 0.0;
  } else if (name == "pl" || name == "flex_pl") {
    s.family = Family::pseudo_label;
    s.tau = 0.95;
    s.mu = 1;
  } else if (name == "uda" || name == "flex_uda") {
    s.family = Family::uda;
    s.tau = 0.8;
    s.temperature = 0.5;
    s.mu = 7;
  } else if (name == "fixmatch" || name == "flexmatch") {
    s.family = Family::fixmatch;
    s.tau = 0.95;
    s.mu = 7;
  } else {
    throw ConfigError("unknown algorithm '" + name + "'");
  }
  s.flexible = name.starts_with("flex");
  return s;
}

std::string AlgorithmSpec::id() const {
  switch (family) {
    case Family::supervised: return "supervised";
    case Family::pseudo_label: return flexible ? "flex_pl" : "pl";
    case Family::uda: return flexible ? "flex_uda" : "uda";
    case Family::fixmatch: return flexible ? "flexmatch" : "fixmatch";
  }
  return "unknown";
}

std::string AlgorithmSpec::display_name() const {
  switch (family) {
    case Family::supervised: return "Supervised";
    case Family::pseudo_label: return flexible ? "Flex-PL" : "PL";
    case Family::uda: return flexible ? "Flex-UDA" : "UDA";
    case Family::fixmatch: return flexible ? "FlexMatch" : "FixMatch";
  }
  return "unknown";
}

void AlgorithmSpec::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (uses_unlabeled() && mu < 1) throw ConfigError("mu must be >= 1");
  if (family == Family::supervised && flexible) throw ConfigError("supervised training has no flexible variant");
}

const std::vector<std::string>& variant_ids() {
  static const std::vector<std::string> ids = {"pl", "flex_pl", "uda", "flex_uda", "fixmatch", "flexmatch"};
  return ids;
}

double cross_entropy(int target, std::span<const double> probs) {
  if (target < 0 || static_cast<std::size_t>(target) >= probs.size()) throw ArgumentError("cross_entropy: class out of range");
  return -std::log(probs[static_cast<std::size_t>(target)]);
}

double cross_entropy(std::span<const double> target, std::span<const double> probs) {
  if (target.size() != probs.size()) throw ShapeError("cross_entropy: length mismatch");
  double h = 0.0;
  for (std::size_t c = 0; c < target.size(); ++c) {
    if (target[c] != 0.0) h -= target[c] * std::log(probs[c]);
  }
  return h;
}

std::vector<double> sharpen(std::span<const double> p, double temperature) {
  if (!(temperature > 0.0)) throw ArgumentError("sharpen: temperature must be positive");
  std::vector<double> q(p.size());
  if (temperature == 1.0) {
    double s = 0.0;
    for (double v : p) s += v;
    for (std::size_t c = 0; c < p.size(); ++c) q[c] = p[c] / s;
    return q;
  }
  // Power in log space relative to the largest entry to avoid underflow.
  const double inv_t = 1.0 / temperature;
  const double top = std::log(*std::max_element(p.begin(), p.end()));
  double s = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    q[c] = std::exp((std::log(p[c]) - top) * inv_t);
    s += q[c];
  }
  for (double& v : q) v /= s;
  return q;
}

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

LossPass supervised_loss(const numkit::MlpModel& model, const Matrix& x, std::span<const int> y,
                         const augment::Augmenter& aug, augment::Rng& rng) {
  if (x.rows() != y.size()) throw ShapeError("supervised_loss: label count != batch rows");
  if (x.rows() == 0) throw ArgumentError("supervised_loss: empty batch");
  LossPass out;
  out.trace = numkit::forward_train(model, aug.weak(x, rng));
  out.probs = numkit::softmax(out.trace.logits);
  out.dlogits = out.probs;
  const double inv_b = 1.0 / static_cast<double>(x.rows());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    sum += cross_entropy(y[i], out.probs.row(i));
    auto g = out.dlogits.row(i);
    g[static_cast<std::size_t>(y[i])] -= 1.0;
    for (double& v : g) v *= inv_b;
  }
  out.loss = sum * inv_b;
  return out;
}

UnsupBatchResult unsupervised_loss(const AlgorithmSpec& spec, const numkit::MlpModel& model,
                                   const Matrix& unlabeled_x, std::span<const std::size_t> indices,
                                   cpl::CurriculumState* state, const augment::Augmenter& aug, augment::Rng& rng) {
  if (!spec.uses_unlabeled()) throw StateError("unsupervised_loss: supervised spec has no unlabeled term");
  if (spec.flexible && state == nullptr) throw StateError("unsupervised_loss: flexible variant needs a curriculum state");
  if (indices.size() != unlabeled_x.rows()) throw ShapeError("unsupervised_loss: index count != batch rows");
  const std::size_t n = unlabeled_x.rows();
  if (n == 0) throw ArgumentError("unsupervised_loss: empty batch");
  const std::size_t classes = model.class_count();

  UnsupBatchResult r;
  const Matrix weak_probs = numkit::softmax(numkit::forward(model, aug.weak(unlabeled_x, rng)));
  r.targets = Matrix(n, classes);
  r.pseudo_labels.resize(n);
  r.confidence.resize(n);
  std::vector<cpl::Confidence> conf(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto q = weak_probs.row(i);
    const int label = argmax(q);
    r.pseudo_labels[i] = label;
    r.confidence[i] = q[static_cast<std::size_t>(label)];
    conf[i] = {r.confidence[i], label};
    auto t = r.targets.row(i);
    if (spec.soft_targets()) {
      const auto s = sharpen(q, spec.temperature);
      std::copy(s.begin(), s.end(), t.begin());
    } else {
      t[static_cast<std::size_t>(label)] = 1.0;
    }
  }

  if (spec.flexible) {
    r.thresholds = state->thresholds().threshold;
  } else {
    r.thresholds.assign(classes, spec.tau);
  }
  r.mask = cpl::apply_thresholds(conf, r.thresholds);

  Matrix inputs = spec.family == Family::pseudo_label ? aug.weak(unlabeled_x, rng) : aug.strong(unlabeled_x, rng);
  r.pass.trace = numkit::forward_train(model, std::move(inputs));
  r.pass.probs = numkit::softmax(r.pass.trace.logits);
  r.pass.dlogits = Matrix(n, classes);

  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  std::size_t passed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!r.mask[i]) continue;
    ++passed;
    auto p = r.pass.probs.row(i);
    auto t = r.targets.row(i);
    sum += cross_entropy(t, p);
    auto g = r.pass.dlogits.row(i);
    for (std::size_t c = 0; c < classes; ++c) g[c] = (p[c] - t[c]) * inv_n;
  }
  r.loss = sum * inv_n;
  r.pass.loss = r.loss;
  r.utilization = static_cast<double>(passed) * inv_n;

  if (spec.flexible) {
    std::vector<cpl::Prediction> preds(n);
    for (std::size_t i = 0; i < n; ++i) preds[i] = {indices[i], r.confidence[i], r.pseudo_labels[i]};
    state->record_predictions(preds);
  }
  return r;
}

double total_loss(const AlgorithmSpec& spec, double supervised, double unsupervised) {
  return supervised + spec.lambda * unsupervised;
}

double class_balance_loss(const Matrix& probs) {
  if (probs.rows() == 0) throw ArgumentError("class_balance_loss: empty batch");
  const std::size_t classes = probs.cols();
  const double q = 1.0 / static_cast<double>(classes);
  double loss = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) mean += probs(i, c);
    mean /= static_cast<double>(probs.rows());
    loss += q * std::log(q / mean);
  }
  return loss;
}

Matrix class_balance_grad(const Matrix& probs) {
  if (probs.rows() == 0) throw ArgumentError("class_balance_grad: empty batch");
  const std::size_t n = probs.rows();
  const std::size_t classes = probs.cols();
  const double q = 1.0 / static_cast<double>(classes);
  std::vector<double> mean(classes, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < classes; ++c) mean[c] += probs(i, c);
  }
  for (double& m : mean) m /= static_cast<double>(n);

  Matrix g(n, classes);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double weighted = 0.0;
    for (std::size_t c = 0; c < classes; ++c) weighted += q * probs(i, c) / mean[c];
    for (std::size_t j = 0; j < classes; ++j) g(i, j) = inv_n * probs(i, j) * (weighted - q / mean[j]);
  }
  return g;
}

}  // namespace flexssl::sslloss
