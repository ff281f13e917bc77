#include "flexssl/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace flexssl::numkit {

double cosine_lr(std::int64_t k, std::int64_t total_steps, double base_lr) {
  if (total_steps <= 0) throw ArgumentError("cosine_lr: total steps must be positive");
  if (k < 0 || k > total_steps) throw ArgumentError("cosine_lr: step outside [0, K]");
  return base_lr * std::cos(7.0 * std::numbers::pi * static_cast<double>(k) / (16.0 * static_cast<double>(total_steps)));
}

OptimizerState OptimizerState::for_model(const MlpModel& model, double momentum, double base_lr,
                                         std::int64_t total_steps) {
  if (total_steps <= 0) throw ArgumentError("optimizer: total steps must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ArgumentError("optimizer: momentum must lie in [0, 1)");
  OptimizerState s;
  s.velocity = Gradients::zeros_like(model).layers;
  s.momentum = momentum;
  s.base_lr = base_lr;
  s.total_steps = total_steps;
  return s;
}

void sgd_step(MlpModel& model, const Gradients& grads, OptimizerState& opt) {
  auto& params = model.live();
  if (grads.layers.size() != params.size() || opt.velocity.size() != params.size()) {
    throw ShapeError("sgd_step: layer counts differ");
  }
  if (opt.step >= opt.total_steps) throw StateError("sgd_step: step budget exhausted");
  const double lr = opt.current_lr();
  for (std::size_t l = 0; l < params.size(); ++l) {
    auto& p = params[l];
    auto& v = opt.velocity[l];
    const auto& g = grads.layers[l];
    if (!g.weight.same_shape(p.weight) || g.bias.size() != p.bias.size() || !v.weight.same_shape(p.weight)) {
      throw ShapeError("sgd_step: gradient shape mismatch in layer " + std::to_string(l));
    }
    auto pw = p.weight.values();
    auto vw = v.weight.values();
    auto gw = g.weight.values();
    for (std::size_t i = 0; i < pw.size(); ++i) {
      vw[i] = opt.momentum * vw[i] + gw[i];
      pw[i] -= lr * vw[i];
    }
    for (std::size_t i = 0; i < p.bias.size(); ++i) {
      v.bias[i] = opt.momentum * v.bias[i] + g.bias[i];
      p.bias[i] -= lr * v.bias[i];
    }
  }
  ++opt.step;
}

void apply_weight_decay(MlpModel& model, double lr, double decay) {
  if (decay == 0.0) return;
  const double keep = 1.0 - lr * decay;
  for (auto& p : model.live()) {
    for (double& w : p.weight.values()) w *= keep;
  }
}

}  // namespace flexssl::numkit
