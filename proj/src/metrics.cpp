#include "flexssl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flexssl/errors.hpp"

namespace flexssl::metrics {

ClassificationMetrics classification_metrics(const Matrix& probs, std::span<const int> labels) {
  if (probs.rows() != labels.size()) throw ShapeError("metrics: label count != rows");
  if (probs.rows() == 0) throw ArgumentError("metrics: empty evaluation set");
  const std::size_t classes = probs.cols();
  std::vector<std::size_t> tp(classes, 0), predicted(classes, 0), actual(classes, 0);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    auto row = probs.row(i);
    const auto pred = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    const auto truth = static_cast<std::size_t>(labels[i]);
    if (truth >= classes) throw ArgumentError("metrics: label out of range");
    ++predicted[pred];
    ++actual[truth];
    if (pred == truth) {
      ++tp[pred];
    } else {
      ++wrong;
    }
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };

  ClassificationMetrics m;
  m.error = static_cast<double>(wrong) / static_cast<double>(probs.rows());
  m.class_accuracy.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    const double p = ratio(tp[c], predicted[c]);
    const double r = ratio(tp[c], actual[c]);
    m.class_accuracy[c] = r;
    m.precision += p;
    m.recall += r;
    m.f1 += (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  const auto k = static_cast<double>(classes);
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  m.auc = macro_auc_ovr(probs, labels);
  return m;
}

double binary_auc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw ShapeError("auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double macro_auc_ovr(const Matrix& probs, std::span<const int> labels) {
  const std::size_t classes = probs.cols();
  std::vector<double> scores(probs.rows());
  std::vector<std::uint8_t> pos(probs.rows());
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
      scores[i] = probs(i, c);
      pos[i] = labels[i] == static_cast<int>(c) ? 1 : 0;
      n_pos += pos[i];
    }
    if (n_pos == 0 || n_pos == probs.rows()) continue;
    sum += binary_auc(scores, pos);
    ++defined;
  }
  return defined == 0 ? 0.5 : sum / static_cast<double>(defined);
}

double median_of_last(std::span<const double> values, std::size_t window) {
  if (values.empty()) throw ArgumentError("median: no values");
  const std::size_t take = std::min(window, values.size());
  std::vector<double> tail(values.end() - static_cast<long>(take), values.end());
  std::sort(tail.begin(), tail.end());
  const std::size_t mid = take / 2;
  return take % 2 == 1 ? tail[mid] : 0.5 * (tail[mid - 1] + tail[mid]);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mu = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace flexssl::metrics
