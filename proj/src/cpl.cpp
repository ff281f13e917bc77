#include "flexssl/cpl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flexssl/errors.hpp"

namespace flexssl::cpl {

Mapping parse_mapping(const std::string& name) {
  if (name == "linear") return Mapping::linear;
  if (name == "convex") return Mapping::convex;
  if (name == "concave") return Mapping::concave;
  throw ConfigError("unknown mapping '" + name + "' (expected linear, convex or concave)");
}

std::string to_string(Mapping m) {
  switch (m) {
    case Mapping::linear: return "linear";
    case Mapping::convex: return "convex";
    case Mapping::concave: return "concave";
  }
  return "unknown";
}

double map_effect(double beta, Mapping mapping) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ArgumentError("map_effect: beta outside [0, 1]");
  switch (mapping) {
    case Mapping::linear: return beta;
    case Mapping::convex: return beta / (2.0 - beta);
    case Mapping::concave: return std::log(beta + 1.0) / std::numbers::ln2;
  }
  return beta;
}

CurriculumState::CurriculumState(std::size_t unlabeled_count, std::size_t class_count, CurriculumOptions options)
    : opts_(options),
      cache_(unlabeled_count, kUnused),
      counts_(class_count, 0),
      unused_(static_cast<std::int64_t>(unlabeled_count)) {
  if (unlabeled_count == 0) throw ConfigError("curriculum: no unlabeled data");
  if (class_count == 0) throw ConfigError("curriculum: no classes");
  if (!(opts_.tau > 0.0 && opts_.tau <= 1.0)) throw ConfigError("curriculum: tau must lie in (0, 1]");
  if (!(opts_.threshold_floor >= 0.0 && opts_.threshold_floor <= opts_.tau)) {
    throw ConfigError("curriculum: threshold_floor must lie in [0, tau]");
  }
}

void CurriculumState::record_predictions(std::span<const Prediction> batch) {
  const auto classes = static_cast<int>(counts_.size());
  for (const auto& p : batch) {
    if (p.index >= cache_.size()) throw ArgumentError("record_predictions: index " + std::to_string(p.index) + " out of range");
    if (p.label < 0 || p.label >= classes) throw ArgumentError("record_predictions: class out of range");
    if (!(p.confidence > 0.0 && p.confidence <= 1.0)) throw ArgumentError("record_predictions: confidence outside (0, 1]");
  }
  for (const auto& p : batch) {
    if (!(p.confidence > opts_.tau)) continue;
    int& slot = cache_[p.index];
    if (slot == p.label) continue;
    if (slot == kUnused) {
      --unused_;
    } else {
      --counts_[static_cast<std::size_t>(slot)];
    }
    ++counts_[static_cast<std::size_t>(p.label)];
    slot = p.label;
  }
}

ThresholdVector CurriculumState::normalized_effects() const {
  ThresholdVector out;
  const std::size_t classes = counts_.size();
  out.beta.assign(classes, 0.0);
  out.threshold.assign(classes, 0.0);
  if (pinned_) {
    std::fill(out.beta.begin(), out.beta.end(), 1.0);
    return out;
  }
  const std::int64_t top = *std::max_element(counts_.begin(), counts_.end());
  std::int64_t denom = top;
  if (opts_.warmup && top < unused_) {
    out.warmup_active = true;
    denom = unused_;
  }
  if (denom == 0) return out;
  for (std::size_t c = 0; c < classes; ++c) {
    out.beta[c] = static_cast<double>(counts_[c]) / static_cast<double>(denom);
  }
  return out;
}

ThresholdVector CurriculumState::thresholds() const {
  ThresholdVector out = normalized_effects();
  for (std::size_t c = 0; c < out.beta.size(); ++c) {
    out.threshold[c] = std::max(opts_.threshold_floor, map_effect(out.beta[c], opts_.mapping) * opts_.tau);
  }
  return out;
}

std::vector<std::uint8_t> apply_thresholds(std::span<const Confidence> batch, std::span<const double> threshold) {
  std::vector<std::uint8_t> pass(batch.size(), 0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int l = batch[i].label;
    if (l < 0 || static_cast<std::size_t>(l) >= threshold.size()) throw ArgumentError("mask: class out of range");
    pass[i] = batch[i].confidence > threshold[static_cast<std::size_t>(l)] ? 1 : 0;
  }
  return pass;
}

std::vector<std::uint8_t> CurriculumState::mask(std::span<const Confidence> batch) const {
  return apply_thresholds(batch, thresholds().threshold);
}

}  // namespace flexssl::cpl
