#include <cmath>

#include <gtest/gtest.h>

#include "flexssl/augment.hpp"
#include "flexssl/errors.hpp"

namespace flexssl::augment {
namespace {

TEST(Weak, ZeroSigmaIsIdentity) {
  AugmentConfig cfg;
  cfg.weak_noise_sigma = 0.0;
  Augmenter aug(cfg);
  Rng rng(1);
  const std::vector<double> x{1.5, -2.0, 0.25};
  EXPECT_EQ(aug.weak(x, rng), x);
}

TEST(Weak, NoiseStdMatchesSigma) {
  Augmenter aug(AugmentConfig{});
  Rng rng(42);
  const std::vector<double> x{3.0};
  double s = 0.0, s2 = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double d = aug.weak(x, rng)[0] - x[0];
    s += d;
    s2 += d * d;
  }
  const double sd = std::sqrt((s2 - s * s / n) / (n - 1));
  EXPECT_NEAR(sd, 0.05, 0.2 * 0.05);
}

TEST(Weak, NoiseScalesWithFeatureStd) {
  Augmenter aug(AugmentConfig{}, {1.0, 10.0});
  Rng rng(5);
  double s0 = 0.0, s1 = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const auto y = aug.weak(std::vector<double>{0.0, 0.0}, rng);
    s0 += y[0] * y[0];
    s1 += y[1] * y[1];
  }
  EXPECT_NEAR(std::sqrt(s1 / s0), 10.0, 1.0);
}

TEST(Weak, IndependentDrawsDiffer) {
  Augmenter aug(AugmentConfig{});
  Rng rng(9);
  const std::vector<double> x{1.0, 1.0};
  EXPECT_NE(aug.weak(x, rng), aug.weak(x, rng));
}

TEST(Strong, DegenerateConfigIsIdentity) {
  AugmentConfig cfg;
  cfg.strong_noise_sigma = 0.0;
  cfg.strong_dropout_prob = 0.0;
  cfg.strong_scale_lo = cfg.strong_scale_hi = 1.0;
  Augmenter aug(cfg);
  Rng rng(3);
  const std::vector<double> x{0.5, -7.0, 2.0};
  EXPECT_EQ(aug.strong(x, rng), x);
}

TEST(Strong, ZeroingRateMatchesDropout) {
  AugmentConfig cfg;
  cfg.strong_noise_sigma = 0.0;
  Augmenter aug(cfg);
  Rng rng(11);
  const std::vector<double> x(10, 1.0);
  int zeros = 0;
  for (int i = 0; i < 1000; ++i) {
    for (double v : aug.strong(x, rng)) zeros += v == 0.0;
  }
  EXPECT_NEAR(zeros / 10000.0, 0.2, 0.02);
}

TEST(Strong, DisplacesMoreThanWeak) {
  Augmenter aug(AugmentConfig{});
  Rng rng(13);
  for (const std::vector<double>& x : {std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, -2.0},
                                       std::vector<double>{10.0, 0.1}}) {
    double weak = 0.0, strong = 0.0;
    for (int i = 0; i < 4000; ++i) {
      const auto w = aug.weak(x, rng);
      const auto s = aug.strong(x, rng);
      for (std::size_t f = 0; f < x.size(); ++f) {
        weak += (w[f] - x[f]) * (w[f] - x[f]);
        strong += (s[f] - x[f]) * (s[f] - x[f]);
      }
    }
    EXPECT_GT(strong, weak);
  }
}

TEST(Augment, DeterministicForSeed) {
  Augmenter aug(AugmentConfig{});
  Matrix batch(4, 3, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  Rng a(77), b(77);
  EXPECT_EQ(aug.strong(batch, a), aug.strong(batch, b));
  EXPECT_EQ(aug.weak(batch, a), aug.weak(batch, b));
}

TEST(Augment, BatchMatchesRowByRow) {
  Augmenter aug(AugmentConfig{});
  Matrix batch(2, 2, std::vector<double>{1, 2, 3, 4});
  Rng a(8), b(8);
  const Matrix out = aug.strong(batch, a);
  for (std::size_t r = 0; r < 2; ++r) {
    const auto row = aug.strong(batch.row(r), b);
    EXPECT_EQ(out(r, 0), row[0]);
    EXPECT_EQ(out(r, 1), row[1]);
  }
}

TEST(Config, RejectsInvalidMagnitudes) {
  AugmentConfig cfg;
  cfg.strong_dropout_prob = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(Augmenter{cfg}, ConfigError);
  cfg = {};
  cfg.weak_noise_sigma = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.strong_scale_lo = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.strong_scale_lo = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_NO_THROW(AugmentConfig{}.validate());
}

TEST(Augment, RejectsFeatureCountMismatch) {
  Augmenter aug(AugmentConfig{}, {1.0, 1.0});
  Rng rng(1);
  EXPECT_THROW(aug.weak(std::vector<double>{1.0}, rng), ShapeError);
}

}  // namespace
}  // namespace flexssl::augment
