#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flexssl::cpl {

// Shape of the map from normalized learning effect to threshold scale.
enum class Mapping { linear, convex, concave };

Mapping parse_mapping(const std::string& name);
std::string to_string(Mapping m);

// concave: ln(x + 1) / ln 2, linear: x, convex: x / (2 - x). All map [0, 1]
// onto [0, 1] monotonically and fix both endpoints.
double map_effect(double beta, Mapping mapping);

// One confident-or-not prediction on an unlabeled sample.
struct Prediction {
  std::size_t index;
  double confidence;  // max class probability
  int label;          // argmax class, lowest index on ties
};

// Per-class confidence and predicted class, for masking.
struct Confidence {
  double confidence;
  int label;
};

struct ThresholdVector {
  std::vector<double> threshold;  // T(c) in [0, tau]
  std::vector<double> beta;       // normalized learning effect in [0, 1]
  bool warmup_active = false;
};

struct CurriculumOptions {
  double tau = 0.95;
  Mapping mapping = Mapping::convex;
  bool warmup = true;
  // Lower limit on every flexible threshold; 0 disables it.
  double threshold_floor = 0.0;
};

// Curriculum pseudo-labeling state: the per-sample prediction cache, the
// per-class learning-effect counters derived from it, and the flexible
// thresholds computed from those counters.
//
// A cache entry is -1 until the sample's max probability first exceeds the
// fixed tau, after which it holds the latest confidently predicted class and
// never returns to -1. Counters are maintained incrementally and always equal
// a recount of the cache.
class CurriculumState {
 public:
  static constexpr int kUnused = -1;

  CurriculumState(std::size_t unlabeled_count, std::size_t class_count, CurriculumOptions options);

  std::size_t unlabeled_count() const noexcept { return cache_.size(); }
  std::size_t class_count() const noexcept { return counts_.size(); }
  const CurriculumOptions& options() const noexcept { return opts_; }
  double tau() const noexcept { return opts_.tau; }

  // Marks every prediction whose confidence strictly exceeds the fixed tau.
  // The batch is validated before any entry changes.
  void record_predictions(std::span<const Prediction> batch);

  // sigma(c): number of cached samples currently attributed to class c.
  const std::vector<std::int64_t>& learning_effects() const noexcept { return counts_; }
  std::int64_t unused_count() const noexcept { return unused_; }
  const std::vector<int>& cache() const noexcept { return cache_; }

  // beta(c) with warm-up: sigma / max(max sigma, unused) while unused
  // samples dominate, else sigma / max sigma (0 when every sigma is 0).
  ThresholdVector normalized_effects() const;

  // T(c) = max(floor, M(beta(c)) * tau), recomputed from the current counters.
  ThresholdVector thresholds() const;

  // Pass iff confidence > T(label). Uses a freshly computed threshold vector.
  std::vector<std::uint8_t> mask(std::span<const Confidence> batch) const;

  // Forces beta(c) = 1 for every class regardless of the counters. With the
  // linear mapping this reduces every flexible threshold to tau exactly.
  void pin_full_effects(bool pinned) noexcept { pinned_ = pinned; }
  bool pinned() const noexcept { return pinned_; }

 private:
  CurriculumOptions opts_;
  std::vector<int> cache_;
  std::vector<std::int64_t> counts_;
  std::int64_t unused_;
  bool pinned_ = false;
};

// Pass iff confidence > threshold[label].
std::vector<std::uint8_t> apply_thresholds(std::span<const Confidence> batch, std::span<const double> threshold);

}  // namespace flexssl::cpl
