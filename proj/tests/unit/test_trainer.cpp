#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "flexssl/errors.hpp"
#include "flexssl/trainer.hpp"

namespace flexssl::trainer {
namespace {

datagen::SplitDataset moons(std::size_t lpc = 4, std::uint64_t seed = 1) {
  return datagen::split(datagen::make_synthetic(datagen::SyntheticKind::two_moons, 1000, 2, 0.1, 0), lpc, 0.2, seed);
}

TrainConfig small(const std::string& variant, std::int64_t iterations = 300) {
  TrainConfig cfg;
  cfg.spec = sslloss::AlgorithmSpec::preset(variant);
  cfg.iterations = iterations;
  cfg.checkpoint_every = 50;
  cfg.hidden = {16, 16};
  cfg.batch_size = 16;
  return cfg;
}

std::string csv(const RunArtifact& run, std::size_t C) {
  std::ostringstream out;
  write_metrics_csv(run.checkpoints, C, out);
  return out.str();
}

TEST(Train, DeterministicForSeed) {
  const auto data = moons();
  const auto cfg = small("flexmatch");
  EXPECT_EQ(csv(train(cfg, data), 2), csv(train(cfg, data), 2));
  auto other = cfg;
  other.seed = 2;
  EXPECT_NE(csv(train(cfg, data), 2), csv(train(other, data), 2));
}

TEST(Train, CheckpointCadence) {
  auto cfg = small("fixmatch", 120);
  const auto run = train(cfg, moons());
  std::vector<std::int64_t> its;
  for (const auto& r : run.checkpoints) its.push_back(r.iteration);
  EXPECT_EQ(its, (std::vector<std::int64_t>{50, 100, 120}));
}

TEST(Train, EvaluatesShadowWeights) {
  const auto data = moons();
  const auto run = train(small("fixmatch", 100), data);
  const auto live = evaluate(run.model, data.eval_x, data.eval_y, false);
  const auto ema = evaluate(run.model, data.eval_x, data.eval_y, true);
  EXPECT_EQ(live.class_accuracy.size(), ema.class_accuracy.size());
  EXPECT_NE(run.model.live(), run.model.shadow());
  EXPECT_EQ(run.checkpoints.back().error, ema.error);
  EXPECT_TRUE(live.auc != ema.auc || live.error != ema.error);
}

TEST(Train, SupervisedOnlyImprovesOnBlobs) {
  const auto data =
      datagen::split(datagen::make_synthetic(datagen::SyntheticKind::blobs, 800, 4, 1.0, 0), 10, 0.2, 1);
  auto cfg = small("fixmatch", 500);
  cfg.spec.lambda = 0.0;
  cfg.checkpoint_every = 5;
  const auto run = train(cfg, data);
  EXPECT_LT(run.checkpoints.back().error, run.checkpoints.front().error);
  EXPECT_LT(run.checkpoints.back().error, 0.25);
}

TEST(Train, LambdaZeroStaysFinite) {
  auto cfg = small("uda", 200);
  cfg.spec.lambda = 0.0;
  const auto run = train(cfg, moons());
  for (const auto& r : run.checkpoints) EXPECT_TRUE(std::isfinite(r.error));
}

TEST(Train, FlexThresholdsStartAtZeroAndReachTau) {
  auto cfg = small("flexmatch", 600);
  cfg.checkpoint_every = 1;
  const auto run = train(cfg, moons());
  for (double t : run.checkpoints.front().thresholds) EXPECT_EQ(t, 0.0);
  const bool reached = std::any_of(run.checkpoints.begin(), run.checkpoints.end(), [&](const MetricsRecord& r) {
    return *std::max_element(r.thresholds.begin(), r.thresholds.end()) == cfg.spec.tau;
  });
  EXPECT_TRUE(reached);
  ASSERT_TRUE(run.curriculum.has_value());
  EXPECT_LT(run.curriculum->unused_count(), static_cast<std::int64_t>(run.curriculum->unlabeled_count()));
}

TEST(Train, FixedThresholdsAreTau) {
  const auto run = train(small("fixmatch", 60), moons());
  for (double t : run.checkpoints.back().thresholds) EXPECT_EQ(t, 0.95);
  EXPECT_FALSE(run.curriculum.has_value());
}

TEST(Train, PinnedLinearFlexMatchEqualsFixMatch) {
  const auto data = moons();
  auto fix = small("fixmatch", 200);
  auto flex = small("flexmatch", 200);
  flex.pin_full_effects = true;
  flex.mapping = cpl::Mapping::linear;
  flex.warmup = false;
  EXPECT_EQ(csv(train(fix, data), 2), csv(train(flex, data), 2));
}

TEST(Train, DivergenceNamesIteration) {
  auto cfg = small("fixmatch", 50);
  cfg.lr = 1e300;
  cfg.weight_decay = 0.0;
  try {
    train(cfg, moons());
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.iteration(), 1);
    EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos);
  }
}

TEST(Train, ClassBalanceTermRuns) {
  auto cfg = small("fixmatch", 100);
  cfg.class_balance = true;
  const auto run = train(cfg, moons());
  EXPECT_EQ(run.checkpoints.size(), 2u);
}

TEST(Config, ValidateRejectsBadValues) {
  auto cfg = small("fixmatch");
  cfg.iterations = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small("fixmatch");
  cfg.checkpoint_every = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small("fixmatch");
  cfg.ema = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small("fixmatch");
  cfg.momentum = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small("fixmatch");
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_NO_THROW(TrainConfig{}.validate());
}

TEST(Evaluate, EmptySetIsAnError) {
  const numkit::MlpModel model({2, 2}, 1);
  EXPECT_THROW(evaluate(model, Matrix(0, 2), std::vector<int>{}), ConfigError);
  const auto data = datagen::split(datagen::make_synthetic(datagen::SyntheticKind::two_moons, 100, 2, 0.1, 0), 4, 0.0, 1);
  EXPECT_THROW(train(small("fixmatch", 10), data), ConfigError);
}

MetricsRecord at(std::int64_t it, double err) {
  MetricsRecord r;
  r.iteration = it;
  r.error = err;
  r.class_accuracy = {1.0 - err, 1.0 - err};
  r.thresholds = {0.5, 0.95};
  return r;
}

TEST(Summary, MedianOfLastTwenty) {
  std::vector<MetricsRecord> cps;
  for (int i = 1; i <= 20; ++i) cps.push_back(at(i * 10, i / 100.0));
  const auto s = summarize(cps);
  EXPECT_DOUBLE_EQ(s.median_last20_error, 0.105);
  EXPECT_EQ(s.best_error, 0.01);
  EXPECT_EQ(s.best_iteration, 10);
}

TEST(Summary, MonotoneAndSingle) {
  std::vector<MetricsRecord> cps{at(1, 0.4), at(2, 0.3), at(3, 0.2)};
  EXPECT_EQ(summarize(cps).best_error, 0.2);
  EXPECT_EQ(summarize(cps).best_iteration, 3);
  const auto one = summarize({at(5, 0.25)});
  EXPECT_EQ(one.best_error, 0.25);
  EXPECT_EQ(one.median_last20_error, 0.25);
  EXPECT_THROW(summarize({}), ArgumentError);
}

TEST(Summary, FirstIterationReaching) {
  std::vector<MetricsRecord> cps{at(100, 0.4), at(200, 0.1), at(300, 0.05)};
  EXPECT_EQ(first_iteration_reaching(cps, 0.1), 200);
  EXPECT_EQ(first_iteration_reaching(cps, 0.01), std::nullopt);
}

TEST(MetricsCsv, ColumnOrderAndRoundTrip) {
  std::vector<MetricsRecord> cps{at(200, 0.125)};
  cps[0].precision = 0.5;
  cps[0].loss_u = 0.75;
  std::ostringstream out;
  write_metrics_csv(cps, 2, out);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "iteration,error,acc_0,acc_1,precision,recall,f1,auc,utilization,thr_0,thr_1,loss_s,loss_u,pseudo_acc");
  std::istringstream in(text);
  const auto back = read_metrics_csv(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].iteration, 200);
  EXPECT_EQ(back[0].error, 0.125);
  EXPECT_EQ(back[0].thresholds, cps[0].thresholds);
  EXPECT_EQ(back[0].loss_u, 0.75);
}

}  // namespace
}  // namespace flexssl::trainer
