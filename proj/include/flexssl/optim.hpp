#pragma once

#include <cstdint>
#include <vector>

#include "flexssl/mlp.hpp"

namespace flexssl::numkit {

// eta0 * cos(7 pi k / (16 K)). Stays positive up to and including k = K.
double cosine_lr(std::int64_t k, std::int64_t total_steps, double base_lr);

// SGD with heavy-ball momentum on a cosine-decayed learning rate.
struct OptimizerState {
  std::vector<DenseParams> velocity;
  double momentum = 0.9;
  double base_lr = 0.03;
  std::int64_t total_steps = 1;
  std::int64_t step = 0;

  static OptimizerState for_model(const MlpModel& model, double momentum, double base_lr, std::int64_t total_steps);

  double current_lr() const { return cosine_lr(step, total_steps, base_lr); }
};

// v <- momentum * v + g; p <- p - lr * v with lr = cosine_lr(step). Advances step.
void sgd_step(MlpModel& model, const Gradients& grads, OptimizerState& opt);

// Decoupled weight decay on weight matrices only: w <- w * (1 - lr * decay).
void apply_weight_decay(MlpModel& model, double lr, double decay);

}  // namespace flexssl::numkit
