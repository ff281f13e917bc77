#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "flexssl/errors.hpp"
#include "flexssl/metrics.hpp"

namespace flexssl::metrics {
namespace {

TEST(Classification, PerfectClassifier) {
  const Matrix p(4, 2, std::vector<double>{0.9, 0.1, 0.2, 0.8, 0.7, 0.3, 0.4, 0.6});
  const std::vector<int> y{0, 1, 0, 1};
  const auto m = classification_metrics(p, y);
  EXPECT_EQ(m.error, 0.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(m.auc, 1.0);
  EXPECT_EQ(m.class_accuracy, (std::vector<double>{1.0, 1.0}));
}

TEST(Classification, ConstantPredictorMacroF1IsOneThird) {
  const Matrix p(4, 2, std::vector<double>{0.9, 0.1, 0.9, 0.1, 0.9, 0.1, 0.9, 0.1});
  const std::vector<int> y{0, 0, 1, 1};
  const auto m = classification_metrics(p, y);
  EXPECT_EQ(m.error, 0.5);
  EXPECT_EQ(m.f1, 1.0 / 3.0);
  EXPECT_EQ(m.precision, 0.25);
  EXPECT_EQ(m.recall, 0.5);
  EXPECT_EQ(m.class_accuracy, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(m.auc, 0.5);
}

TEST(Classification, ErrorAndClassAccuracyDifferUnderImbalance) {
  const Matrix p(4, 2, std::vector<double>{0.9, 0.1, 0.9, 0.1, 0.9, 0.1, 0.9, 0.1});
  const std::vector<int> y{0, 0, 0, 1};
  const auto m = classification_metrics(p, y);
  EXPECT_EQ(m.error, 0.25);
  EXPECT_EQ(1.0 - (m.class_accuracy[0] + m.class_accuracy[1]) / 2, 0.5);
}

TEST(Classification, RejectsEmptyOrMismatched) {
  EXPECT_THROW(classification_metrics(Matrix(0, 2), std::vector<int>{}), ArgumentError);
  EXPECT_THROW(classification_metrics(Matrix(2, 2), std::vector<int>{0}), ShapeError);
}

TEST(Auc, TiesCountHalf) {
  const std::vector<double> s{0.5, 0.5};
  const std::vector<std::uint8_t> pos{1, 0};
  EXPECT_EQ(binary_auc(s, pos), 0.5);
  const std::vector<double> s2{0.1, 0.4, 0.35, 0.8};
  const std::vector<std::uint8_t> pos2{0, 0, 1, 1};
  EXPECT_EQ(binary_auc(s2, pos2), 0.75);
}

TEST(Auc, RandomScoresNearHalf) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u;
  std::vector<double> s(20000);
  std::vector<std::uint8_t> pos(20000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u(rng);
    pos[i] = rng() % 2;
  }
  EXPECT_NEAR(binary_auc(s, pos), 0.5, 0.02);
}

TEST(Auc, InvertedScoresGiveZero) {
  const std::vector<double> s{0.9, 0.8, 0.2, 0.1};
  const std::vector<std::uint8_t> pos{0, 0, 1, 1};
  EXPECT_EQ(binary_auc(s, pos), 0.0);
}

TEST(Median, LastTwentyOfOneToTwenty) {
  std::vector<double> v(20);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(median_of_last(v), 10.5);
}

TEST(Median, UsesOnlyTheWindow) {
  std::vector<double> v(30);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(median_of_last(v), 20.5);
  EXPECT_EQ(median_of_last(std::vector<double>{4.0}), 4.0);
  EXPECT_EQ(median_of_last(std::vector<double>{3.0, 1.0, 2.0}), 2.0);
  EXPECT_THROW(median_of_last(std::vector<double>{}), ArgumentError);
}

TEST(Stats, MeanAndSampleStd) {
  const std::vector<double> v{2.0, 4.0, 6.0};
  EXPECT_EQ(mean(v), 4.0);
  EXPECT_EQ(sample_std(v), 2.0);
  EXPECT_EQ(sample_std(std::vector<double>{5.0}), 0.0);
}

}  // namespace
}  // namespace flexssl::metrics
