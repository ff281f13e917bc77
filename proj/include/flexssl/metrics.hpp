#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flexssl/matrix.hpp"

namespace flexssl::metrics {

struct ClassificationMetrics {
  double error = 0.0;
  std::vector<double> class_accuracy;  // per-class recall
  double precision = 0.0;              // macro
  double recall = 0.0;                 // macro
  double f1 = 0.0;                     // macro, per-class F1 averaged
  double auc = 0.0;                    // macro one-vs-rest
};

// Scores `probs` (rows = samples) against `labels`. Predictions are row
// argmaxes with ties to the lowest class. Undefined ratios (0/0) count as 0.
ClassificationMetrics classification_metrics(const Matrix& probs, std::span<const int> labels);

// Rank-based (Mann-Whitney) AUC of `scores` for the positive flags, with
// tied scores sharing their average rank. Returns 0.5 when either side is empty.
double binary_auc(std::span<const double> scores, std::span<const std::uint8_t> positive);

// Mean of one-vs-rest AUCs over the classes that have both positives and negatives.
double macro_auc_ovr(const Matrix& probs, std::span<const int> labels);

// Median of the last `window` values (all values if fewer).
double median_of_last(std::span<const double> values, std::size_t window = 20);

double mean(std::span<const double> values);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_std(std::span<const double> values);

}  // namespace flexssl::metrics
