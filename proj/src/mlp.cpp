#include "flexssl/mlp.hpp"

#include <cmath>
#include <random>

#include "flexssl/kernels.hpp"

namespace flexssl::numkit {

MlpModel::MlpModel(std::vector<std::size_t> layer_sizes, std::uint64_t seed) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ArgumentError("an MLP needs at least input and output sizes");
  for (std::size_t s : sizes_) {
    if (s == 0) throw ArgumentError("layer sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::size_t fan_in = sizes_[l];
    const std::size_t fan_out = sizes_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseParams p{Matrix(fan_in, fan_out), std::vector<double>(fan_out, 0.0)};
    for (double& w : p.weight.values()) w = dist(rng);
    live_.push_back(std::move(p));
  }
  shadow_ = live_;
}

MlpModel::MlpModel(std::vector<DenseParams> layers) : live_(std::move(layers)) {
  if (live_.empty()) throw ArgumentError("an MLP needs at least one layer");
  sizes_.push_back(live_.front().weight.rows());
  for (const auto& p : live_) {
    if (p.weight.rows() != sizes_.back()) throw ShapeError("layer shapes do not chain");
    if (p.bias.size() != p.weight.cols()) throw ShapeError("bias length != layer width");
    sizes_.push_back(p.weight.cols());
  }
  shadow_ = live_;
}

Gradients Gradients::zeros_like(const MlpModel& model) {
  Gradients g;
  for (const auto& p : model.live()) {
    g.layers.push_back({Matrix(p.weight.rows(), p.weight.cols()), std::vector<double>(p.bias.size(), 0.0)});
  }
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (other.layers.size() != layers.size()) throw ShapeError("gradient layer counts differ");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& a = layers[l];
    const auto& b = other.layers[l];
    if (!a.weight.same_shape(b.weight) || a.bias.size() != b.bias.size()) throw ShapeError("gradient shapes differ");
    auto av = a.weight.values();
    auto bv = b.weight.values();
    for (std::size_t i = 0; i < av.size(); ++i) av[i] += bv[i];
    for (std::size_t i = 0; i < a.bias.size(); ++i) a.bias[i] += b.bias[i];
  }
  return *this;
}

bool Gradients::all_finite() const {
  for (const auto& p : layers) {
    if (!p.weight.all_finite()) return false;
    for (double b : p.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

namespace {

void check_input(const MlpModel& model, const Matrix& batch) {
  if (batch.cols() != model.input_dim()) {
    throw ShapeError("batch has " + std::to_string(batch.cols()) + " features, model expects " +
                     std::to_string(model.input_dim()));
  }
}

}  // namespace

Matrix forward(const MlpModel& model, const Matrix& batch, bool use_ema) {
  check_input(model, batch);
  const auto& layers = use_ema ? model.shadow() : model.live();
  Matrix cur = batch;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix next(cur.rows(), layers[l].weight.cols());
    kernels::affine(cur, layers[l].weight, layers[l].bias, next);
    if (l + 1 < layers.size()) kernels::relu_inplace(next);
    cur = std::move(next);
  }
  return cur;
}

ForwardTrace forward_train(const MlpModel& model, Matrix batch) {
  check_input(model, batch);
  ForwardTrace t;
  t.input = std::move(batch);
  const auto& layers = model.live();
  const Matrix* cur = &t.input;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Matrix h(cur->rows(), layers[l].weight.cols());
    kernels::affine(*cur, layers[l].weight, layers[l].bias, h);
    kernels::relu_inplace(h);
    t.hidden.push_back(std::move(h));
    cur = &t.hidden.back();
  }
  t.logits = Matrix(cur->rows(), layers.back().weight.cols());
  kernels::affine(*cur, layers.back().weight, layers.back().bias, t.logits);
  t.complete = true;
  return t;
}

Gradients backward(const MlpModel& model, const ForwardTrace& trace, const Matrix& dlogits) {
  if (!trace.complete || trace.hidden.size() + 1 != model.layer_count()) {
    throw StateError("backward called without a matching forward trace");
  }
  if (!dlogits.same_shape(trace.logits)) throw ShapeError("dlogits shape != logits shape");

  const auto& layers = model.live();
  Gradients g = Gradients::zeros_like(model);
  Matrix delta = dlogits;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix& in = l == 0 ? trace.input : trace.hidden[l - 1];
    kernels::matmul_tn(in, delta, g.layers[l].weight);
    kernels::column_sums(delta, g.layers[l].bias);
    if (l == 0) break;
    Matrix prev(delta.rows(), layers[l].weight.rows());
    kernels::matmul_nt(delta, layers[l].weight, prev);
    kernels::relu_mask(trace.hidden[l - 1], prev);
    delta = std::move(prev);
  }
  return g;
}

Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  kernels::softmax_rows(logits, p);
  return p;
}

void ema_update(MlpModel& model, double momentum) {
  auto& shadow = model.shadow();
  const auto& live = model.live();
  const double keep = 1.0 - momentum;
  for (std::size_t l = 0; l < live.size(); ++l) {
    auto sv = shadow[l].weight.values();
    auto lv = live[l].weight.values();
    for (std::size_t i = 0; i < sv.size(); ++i) sv[i] = momentum * sv[i] + keep * lv[i];
    for (std::size_t i = 0; i < live[l].bias.size(); ++i) {
      shadow[l].bias[i] = momentum * shadow[l].bias[i] + keep * live[l].bias[i];
    }
  }
}

}  // namespace flexssl::numkit
