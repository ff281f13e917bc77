#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "flexssl/mlp.hpp"
#include "flexssl/optim.hpp"

namespace flexssl::numkit {
namespace {

// Independent forward pass: plain nested loops, no kernels.
Matrix naive_forward(const std::vector<DenseParams>& layers, const Matrix& x) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < x.rows(); ++i) rows.emplace_back(x.row(i).begin(), x.row(i).end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    for (auto& r : rows) {
      std::vector<double> next(L.weight.cols());
      for (std::size_t j = 0; j < next.size(); ++j) {
        double s = L.bias[j];
        for (std::size_t p = 0; p < r.size(); ++p) s += r[p] * L.weight(p, j);
        next[j] = (l + 1 < layers.size()) ? std::max(0.0, s) : s;
      }
      r = std::move(next);
    }
  }
  Matrix out(x.rows(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  Matrix m(r, c);
  for (double& v : m.values()) v = d(rng);
  return m;
}

TEST(Forward, ZeroParametersGiveZeroLogits) {
  MlpModel model({3, 5, 4}, 1);
  for (auto& p : model.live()) p.weight.fill(0.0);
  std::mt19937_64 rng(2);
  const Matrix logits = forward(model, random_matrix(6, 3, rng));
  for (double v : logits.values()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, IdentityLayerPassesInputThrough) {
  Matrix eye(2, 2, std::vector<double>{1, 0, 0, 1});
  MlpModel model({DenseParams{eye, {0.0, 0.0}}});
  const Matrix logits = forward(model, Matrix(1, 2, std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(logits(0, 0), 1.0);
  EXPECT_EQ(logits(0, 1), 2.0);
}

TEST(Forward, MatchesNaiveImplementation) {
  MlpModel model({2, 4, 3}, 42);
  for (auto& p : model.live()) {
    for (std::size_t j = 0; j < p.bias.size(); ++j) p.bias[j] = 0.1 * static_cast<double>(j + 1);
  }
  const Matrix x(3, 2, std::vector<double>{0.5, -1.0, 2.0, 0.25, -0.75, 1.5});
  const Matrix got = forward(model, x);
  const Matrix want = naive_forward(model.live(), x);
  ASSERT_TRUE(got.same_shape(want));
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.values()[i], want.values()[i], 1e-14);
}

TEST(Forward, UsesShadowWhenAsked) {
  MlpModel model({2, 3}, 5);
  model.shadow()[0].weight.fill(0.0);
  const Matrix x(1, 2, std::vector<double>{1.0, 1.0});
  EXPECT_EQ(forward(model, x, true)(0, 0), 0.0);
  EXPECT_NE(forward(model, x, false)(0, 0), 0.0);
}

TEST(Forward, RejectsWrongFeatureCount) {
  MlpModel model({2, 3}, 5);
  EXPECT_THROW(forward(model, Matrix(1, 3)), ShapeError);
}

TEST(Softmax, KnownValues) {
  const Matrix p = softmax(Matrix(2, 3, std::vector<double>{0, 0, 0, std::log(2.0), 0, -1e300}));
  EXPECT_NEAR(p(0, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p(1, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_GT(p(1, 2), 0.0);
}

TEST(Softmax, RowsSumToOneAndArePositive) {
  std::mt19937_64 rng(3);
  const Matrix p = softmax(random_matrix(200, 7, rng, 30.0));
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double s = 0.0;
    for (double v : p.row(i)) {
      EXPECT_GT(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

// Loss used for gradient checks: sum_ij c_ij * logit_ij, so dL/dlogits = c.
double probe_loss(const MlpModel& m, const Matrix& x, const Matrix& c) {
  const Matrix z = forward(m, x);
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += c.values()[i] * z.values()[i];
  return s;
}

double max_relative_fd_error(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dim(1, 5);
  const std::vector<std::size_t> sizes{dim(rng), dim(rng) + 1, dim(rng) + 1, dim(rng) + 1};
  MlpModel model(sizes, seed);
  for (auto& p : model.live()) {
    for (double& b : p.bias) b = std::normal_distribution<double>(0.0, 0.5)(rng);
  }
  const Matrix x = random_matrix(4, sizes.front(), rng);
  const Matrix c = random_matrix(4, sizes.back(), rng);
  const Gradients g = backward(model, forward_train(model, x), c);

  double worst = 0.0;
  const double h = 1e-5;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    auto check = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = probe_loss(model, x, c);
      param = saved - h;
      const double down = probe_loss(model, x, c);
      param = saved;
      const double numeric = (up - down) / (2 * h);
      const double rel = std::abs(numeric - analytic) / std::max(1.0, std::abs(numeric) + std::abs(analytic));
      worst = std::max(worst, rel);
    };
    auto& p = model.live()[l];
    for (std::size_t i = 0; i < p.weight.size(); ++i) check(p.weight.values()[i], g.layers[l].weight.values()[i]);
    for (std::size_t i = 0; i < p.bias.size(); ++i) check(p.bias[i], g.layers[l].bias[i]);
  }
  return worst;
}

TEST(Backward, MatchesCentralDifferences) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) EXPECT_LT(max_relative_fd_error(seed), 1e-4) << "seed " << seed;
}

TEST(Backward, ZeroUpstreamGradientGivesZero) {
  MlpModel model({3, 4, 2}, 9);
  std::mt19937_64 rng(1);
  const auto trace = forward_train(model, random_matrix(5, 3, rng));
  const Gradients g = backward(model, trace, Matrix(5, 2));
  for (const auto& p : g.layers) {
    for (double v : p.weight.values()) EXPECT_EQ(v, 0.0);
    for (double v : p.bias) EXPECT_EQ(v, 0.0);
  }
}

TEST(Backward, SingleLinearLayerIsXTransposeDelta) {
  std::mt19937_64 rng(4);
  MlpModel model({3, 2}, 4);
  const Matrix x = random_matrix(5, 3, rng);
  const Matrix delta = random_matrix(5, 2, rng);
  const Gradients g = backward(model, forward_train(model, x), delta);
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t j = 0; j < 2; ++j) {
      double want = 0.0;
      for (std::size_t i = 0; i < 5; ++i) want += x(i, p) * delta(i, j);
      EXPECT_NEAR(g.layers[0].weight(p, j), want, 1e-14);
    }
  }
  for (std::size_t j = 0; j < 2; ++j) {
    double want = 0.0;
    for (std::size_t i = 0; i < 5; ++i) want += delta(i, j);
    EXPECT_NEAR(g.layers[0].bias[j], want, 1e-14);
  }
}

TEST(Backward, RequiresTrace) {
  MlpModel model({2, 2}, 1);
  EXPECT_THROW(backward(model, ForwardTrace{}, Matrix(1, 2)), StateError);
}

TEST(Backward, ZeroRowsContributeNothing) {
  std::mt19937_64 rng(11);
  MlpModel model({2, 8, 3}, 11);
  const Matrix x = random_matrix(6, 2, rng);
  Matrix d = random_matrix(6, 3, rng);
  for (std::size_t j = 0; j < 3; ++j) d(1, j) = d(4, j) = 0.0;
  const Gradients full = backward(model, forward_train(model, x), d);

  Matrix xs(4, 2), ds(4, 3);
  std::size_t r = 0;
  for (std::size_t i : {0, 2, 3, 5}) {
    for (std::size_t f = 0; f < 2; ++f) xs(r, f) = x(i, f);
    for (std::size_t j = 0; j < 3; ++j) ds(r, j) = d(i, j);
    ++r;
  }
  const Gradients reduced = backward(model, forward_train(model, xs), ds);
  EXPECT_EQ(full.layers, reduced.layers);
}

TEST(CosineLr, KnownValues) {
  EXPECT_EQ(cosine_lr(0, 100, 0.03), 0.03);
  EXPECT_NEAR(cosine_lr(100, 100, 0.03), 0.03 * std::cos(7.0 * std::numbers::pi / 16.0), 1e-15);
  EXPECT_NEAR(cosine_lr(100, 100, 0.03), 0.005853, 1e-6);
  EXPECT_NEAR(cosine_lr(50, 100, 1.0), 0.77301, 1e-5);
}

TEST(CosineLr, MonotoneAndPositive) {
  double prev = cosine_lr(0, 1000, 0.5);
  for (int k = 1; k <= 1000; ++k) {
    const double v = cosine_lr(k, 1000, 0.5);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
}

TEST(CosineLr, RejectsBadArguments) {
  EXPECT_THROW(cosine_lr(0, 0, 0.03), ArgumentError);
  EXPECT_THROW(cosine_lr(11, 10, 0.03), ArgumentError);
}

MlpModel scalar_model(double w) { return MlpModel({DenseParams{Matrix(1, 1, w), {0.0}}}); }

Gradients scalar_grad(double g) { return Gradients{{DenseParams{Matrix(1, 1, g), {0.0}}}}; }

TEST(Sgd, ZeroGradientLeavesParametersUnchanged) {
  MlpModel model({3, 4, 2}, 8);
  const auto before = model.live();
  auto opt = OptimizerState::for_model(model, 0.9, 0.03, 10);
  sgd_step(model, Gradients::zeros_like(model), opt);
  EXPECT_EQ(model.live(), before);
  EXPECT_EQ(opt.step, 1);
}

TEST(Sgd, PlainStep) {
  MlpModel model = scalar_model(0.0);
  auto opt = OptimizerState::for_model(model, 0.0, 0.1, 1);
  sgd_step(model, scalar_grad(1.0), opt);
  EXPECT_DOUBLE_EQ(model.live()[0].weight(0, 0), -0.1);
}

TEST(Sgd, MomentumAccumulates) {
  MlpModel model = scalar_model(0.0);
  // A huge horizon keeps the cosine factor at exactly 1 for the first steps.
  auto opt = OptimizerState::for_model(model, 0.9, 1.0, std::int64_t{1} << 60);
  sgd_step(model, scalar_grad(1.0), opt);
  sgd_step(model, scalar_grad(1.0), opt);
  EXPECT_NEAR(model.live()[0].weight(0, 0), -2.9, 1e-15);
}

TEST(Sgd, StopsAtBudget) {
  MlpModel model = scalar_model(0.0);
  auto opt = OptimizerState::for_model(model, 0.9, 0.1, 1);
  sgd_step(model, scalar_grad(1.0), opt);
  EXPECT_THROW(sgd_step(model, scalar_grad(1.0), opt), StateError);
}

TEST(Sgd, RejectsShapeMismatch) {
  MlpModel model = scalar_model(0.0);
  auto opt = OptimizerState::for_model(model, 0.9, 0.1, 5);
  Gradients bad{{DenseParams{Matrix(2, 1), {0.0}}}};
  EXPECT_THROW(sgd_step(model, bad, opt), ShapeError);
}

TEST(WeightDecay, ShrinksWeightsNotBiases) {
  MlpModel model({DenseParams{Matrix(1, 1, 2.0), {3.0}}});
  apply_weight_decay(model, 0.5, 0.1);
  EXPECT_DOUBLE_EQ(model.live()[0].weight(0, 0), 2.0 * 0.95);
  EXPECT_EQ(model.live()[0].bias[0], 3.0);
}

TEST(Ema, KnownUpdates) {
  MlpModel model = scalar_model(1.0);
  model.shadow()[0].weight(0, 0) = 0.0;
  ema_update(model, 0.999);
  EXPECT_NEAR(model.shadow()[0].weight(0, 0), 0.001, 1e-15);

  MlpModel fixed = scalar_model(0.7);
  ema_update(fixed, 0.999);
  EXPECT_EQ(fixed.shadow(), fixed.live());

  MlpModel jump = scalar_model(4.0);
  jump.shadow()[0].weight(0, 0) = -1.0;
  ema_update(jump, 0.0);
  EXPECT_EQ(jump.shadow(), jump.live());
}

TEST(Ema, ContractsTowardLive) {
  MlpModel model({2, 3, 2}, 6);
  std::mt19937_64 rng(6);
  for (auto& p : model.shadow()) {
    for (double& v : p.weight.values()) v = std::normal_distribution<double>(0, 1)(rng);
  }
  const auto before = model.shadow();
  ema_update(model, 0.9);
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    for (std::size_t i = 0; i < before[l].weight.size(); ++i) {
      const double live = model.live()[l].weight.values()[i];
      EXPECT_NEAR(std::abs(model.shadow()[l].weight.values()[i] - live), 0.9 * std::abs(before[l].weight.values()[i] - live),
                  1e-12);
    }
  }
}

TEST(Init, GlorotBoundsAndZeroBias) {
  MlpModel model({2, 64, 64, 3}, 1);
  for (const auto& p : model.live()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(p.weight.rows() + p.weight.cols()));
    for (double w : p.weight.values()) EXPECT_LE(std::abs(w), limit);
    for (double b : p.bias) EXPECT_EQ(b, 0.0);
  }
  EXPECT_EQ(model.shadow(), model.live());
  EXPECT_EQ(MlpModel({2, 64, 64, 3}, 1).live(), model.live());
}

}  // namespace
}  // namespace flexssl::numkit
