#include "flexssl/augment.hpp"

#include <cmath>

namespace flexssl::augment {

void AugmentConfig::validate() const {
  auto ok = [](double v) { return std::isfinite(v); };
  if (!ok(weak_noise_sigma) || weak_noise_sigma < 0.0) throw ConfigError("augment: weak_noise_sigma must be >= 0");
  if (!ok(strong_noise_sigma) || strong_noise_sigma < 0.0) throw ConfigError("augment: strong_noise_sigma must be >= 0");
  if (!ok(strong_dropout_prob) || strong_dropout_prob < 0.0 || strong_dropout_prob >= 1.0) {
    throw ConfigError("augment: strong_dropout_prob must lie in [0, 1)");
  }
  if (!ok(strong_scale_lo) || !ok(strong_scale_hi) || strong_scale_lo <= 0.0 || strong_scale_hi < strong_scale_lo) {
    throw ConfigError("augment: strong scale range must be positive and ordered");
  }
}

Augmenter::Augmenter(AugmentConfig cfg, std::vector<double> feature_scale)
    : cfg_(cfg), feature_scale_(std::move(feature_scale)) {
  cfg_.validate();
  for (double s : feature_scale_) {
    if (!std::isfinite(s) || s < 0.0) throw ConfigError("augment: feature scale must be finite and >= 0");
  }
}

void Augmenter::weak_into(std::span<const double> x, std::span<double> out, Rng& rng) const {
  if (!feature_scale_.empty() && feature_scale_.size() != x.size()) throw ShapeError("augment: feature count");
  if (cfg_.weak_noise_sigma == 0.0) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t f = 0; f < x.size(); ++f) out[f] = x[f] + cfg_.weak_noise_sigma * scale(f) * noise(rng);
}

void Augmenter::strong_into(std::span<const double> x, std::span<double> out, Rng& rng) const {
  if (!feature_scale_.empty() && feature_scale_.size() != x.size()) throw ShapeError("augment: feature count");
  std::normal_distribution<double> noise(0.0, 1.0);
  std::bernoulli_distribution drop(cfg_.strong_dropout_prob);
  std::uniform_real_distribution<double> gain(cfg_.strong_scale_lo, cfg_.strong_scale_hi);
  for (std::size_t f = 0; f < x.size(); ++f) {
    out[f] = cfg_.strong_noise_sigma == 0.0 ? x[f] : x[f] + cfg_.strong_noise_sigma * scale(f) * noise(rng);
  }
  if (cfg_.strong_dropout_prob > 0.0) {
    for (std::size_t f = 0; f < x.size(); ++f) {
      if (drop(rng)) out[f] = 0.0;
    }
  }
  const double g = cfg_.strong_scale_lo == cfg_.strong_scale_hi ? cfg_.strong_scale_lo : gain(rng);
  if (g != 1.0) {
    for (double& v : out) v *= g;
  }
}

std::vector<double> Augmenter::weak(std::span<const double> x, Rng& rng) const {
  std::vector<double> out(x.size());
  weak_into(x, out, rng);
  return out;
}

std::vector<double> Augmenter::strong(std::span<const double> x, Rng& rng) const {
  std::vector<double> out(x.size());
  strong_into(x, out, rng);
  return out;
}

Matrix Augmenter::weak(const Matrix& batch, Rng& rng) const {
  Matrix out(batch.rows(), batch.cols());
  for (std::size_t i = 0; i < batch.rows(); ++i) weak_into(batch.row(i), out.row(i), rng);
  return out;
}

Matrix Augmenter::strong(const Matrix& batch, Rng& rng) const {
  Matrix out(batch.rows(), batch.cols());
  for (std::size_t i = 0; i < batch.rows(); ++i) strong_into(batch.row(i), out.row(i), rng);
  return out;
}

}  // namespace flexssl::augment
