#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "flexssl/matrix.hpp"

namespace flexssl::augment {

using Rng = std::mt19937_64;

// Magnitudes of the weak and strong feature-vector augmentations. Noise
// sigmas are in units of each feature's standard deviation.
struct AugmentConfig {
  double weak_noise_sigma = 0.05;
  double strong_noise_sigma = 0.25;
  double strong_dropout_prob = 0.2;
  double strong_scale_lo = 0.7;
  double strong_scale_hi = 1.3;

  // Throws ConfigError when a magnitude is out of range.
  void validate() const;
};

// Applies weak and strong augmentations. `feature_scale` holds the
// per-feature standard deviation that the noise sigmas are measured in; an
// empty span means unit scale.
class Augmenter {
 public:
  Augmenter(AugmentConfig cfg, std::vector<double> feature_scale = {});

  const AugmentConfig& config() const noexcept { return cfg_; }

  // x + N(0, (weak_sigma * scale_f)^2) per feature.
  std::vector<double> weak(std::span<const double> x, Rng& rng) const;

  // Gaussian noise, then per-feature zeroing, then one global scale factor.
  std::vector<double> strong(std::span<const double> x, Rng& rng) const;

  // Row-wise batch versions; rows are processed in order from one rng stream.
  Matrix weak(const Matrix& batch, Rng& rng) const;
  Matrix strong(const Matrix& batch, Rng& rng) const;

 private:
  double scale(std::size_t f) const noexcept { return feature_scale_.empty() ? 1.0 : feature_scale_[f]; }
  void weak_into(std::span<const double> x, std::span<double> out, Rng& rng) const;
  void strong_into(std::span<const double> x, std::span<double> out, Rng& rng) const;

  AugmentConfig cfg_;
  std::vector<double> feature_scale_;
};

}  // namespace flexssl::augment
