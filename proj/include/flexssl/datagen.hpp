#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "flexssl/matrix.hpp"

namespace flexssl::datagen {

using Rng = std::mt19937_64;

enum class SyntheticKind { two_moons, blobs, rings };

SyntheticKind parse_kind(const std::string& name);
std::string to_string(SyntheticKind kind);

// Fully labeled feature matrix, one row per sample.
struct LabeledPool {
  Matrix features;
  std::vector<int> labels;
  std::size_t class_count = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

// Balanced synthetic pool (class counts differ by at most one), shuffled,
// deterministic for a seed. `noise` is the std of isotropic gaussian jitter.
LabeledPool make_synthetic(SyntheticKind kind, std::size_t n_total, std::size_t class_count, double noise,
                           std::uint64_t seed);

// Reads `f1,...,fd,label`. Labels must be 0-based and contiguous.
LabeledPool load_csv(const std::string& path);
LabeledPool parse_csv(std::istream& in);
void write_csv(const LabeledPool& pool, std::ostream& out);

// Pass as `labels_per_class` to label every training sample.
inline constexpr std::size_t kAllLabeled = std::numeric_limits<std::size_t>::max();

// Labeled / unlabeled / evaluation partition of a pool.
//
// Unlabeled row n carries the stable index n for the whole run. True labels
// of unlabeled rows are kept for diagnostics only and are never part of a
// training batch.
class SplitDataset {
 public:
  Matrix labeled_x;
  std::vector<int> labeled_y;
  Matrix unlabeled_x;
  Matrix eval_x;
  std::vector<int> eval_y;
  std::size_t class_count = 0;
  std::size_t feature_dim = 0;
  // Per-feature standard deviation of the training rows (1 where degenerate).
  std::vector<double> feature_scale;

  // Pool row ids of each partition, for disjointness checks.
  std::vector<std::size_t> labeled_source;
  std::vector<std::size_t> unlabeled_source;
  std::vector<std::size_t> eval_source;

  std::size_t labeled_count() const noexcept { return labeled_y.size(); }
  std::size_t unlabeled_count() const noexcept { return unlabeled_x.rows(); }
  std::size_t eval_count() const noexcept { return eval_y.size(); }

  const std::vector<int>& diagnostic_unlabeled_labels() const noexcept { return unlabeled_truth_; }

 private:
  friend SplitDataset split(const LabeledPool&, std::size_t, double, std::uint64_t, double);
  std::vector<int> unlabeled_truth_;
};

// Holds out floor(eval_fraction * n_c) samples of each class for evaluation,
// labels exactly `labels_per_class` of the rest, and leaves the remainder
// unlabeled. `imbalance_ratio` > 1 thins the unlabeled rows of class c to a
// fraction ratio^(-c / (C - 1)), so the last class keeps 1/ratio of them.
SplitDataset split(const LabeledPool& pool, std::size_t labels_per_class, double eval_fraction, std::uint64_t seed,
                   double imbalance_ratio = 1.0);

// B labeled samples and mu*B unlabeled samples with their stable indices.
struct BatchPair {
  Matrix labeled_x;
  std::vector<int> labeled_y;
  Matrix unlabeled_x;
  std::vector<std::size_t> unlabeled_index;
};

// Draws labeled rows uniformly with replacement and walks the unlabeled set
// through successive random permutations, so each shuffle cycle visits every
// index exactly once.
class BatchSampler {
 public:
  BatchSampler(const SplitDataset& data, std::size_t batch_size, std::size_t mu);

  BatchPair next(Rng& rng);

  std::size_t batch_size() const noexcept { return batch_size_; }
  std::size_t unlabeled_batch_size() const noexcept { return batch_size_ * mu_; }

 private:
  const SplitDataset* data_;
  std::size_t batch_size_;
  std::size_t mu_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

}  // namespace flexssl::datagen
