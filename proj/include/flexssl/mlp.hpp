#pragma once

#include <cstdint>
#include <vector>

#include "flexssl/matrix.hpp"

namespace flexssl::numkit {

// Weight (fan_in x fan_out) and bias (fan_out) of one dense layer.
struct DenseParams {
  Matrix weight;
  std::vector<double> bias;

  friend bool operator==(const DenseParams&, const DenseParams&) = default;
};

// Fully connected network: ReLU on hidden layers, identity on the output
// layer. Keeps an exponential-moving-average shadow of every parameter; the
// shadow is what evaluation reads.
class MlpModel {
 public:
  // `layer_sizes` is {input_dim, hidden..., class_count}. Weights are drawn
  // from U(-a, a) with a = sqrt(6 / (fan_in + fan_out)); biases start at zero.
  // The shadow starts as an exact copy.
  MlpModel(std::vector<std::size_t> layer_sizes, std::uint64_t seed);

  // Builds a model from explicit parameters (shadow = copy).
  explicit MlpModel(std::vector<DenseParams> layers);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::size_t input_dim() const noexcept { return sizes_.front(); }
  std::size_t class_count() const noexcept { return sizes_.back(); }
  std::size_t layer_count() const noexcept { return live_.size(); }

  std::vector<DenseParams>& live() noexcept { return live_; }
  const std::vector<DenseParams>& live() const noexcept { return live_; }
  std::vector<DenseParams>& shadow() noexcept { return shadow_; }
  const std::vector<DenseParams>& shadow() const noexcept { return shadow_; }

  void reset_shadow() { shadow_ = live_; }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<DenseParams> live_;
  std::vector<DenseParams> shadow_;
};

// Parameter-shaped gradient container.
struct Gradients {
  std::vector<DenseParams> layers;

  static Gradients zeros_like(const MlpModel& model);
  Gradients& operator+=(const Gradients& other);
  bool all_finite() const;
};

// Activations kept from a training forward pass, consumed by backward().
struct ForwardTrace {
  Matrix input;
  std::vector<Matrix> hidden;  // post-ReLU output of each hidden layer
  Matrix logits;
  bool complete = false;
};

// Logits for every row of `batch`. `use_ema` selects the shadow parameters.
Matrix forward(const MlpModel& model, const Matrix& batch, bool use_ema = false);

// Forward pass with live parameters that keeps the activations backward() needs.
ForwardTrace forward_train(const MlpModel& model, Matrix batch);

// Gradients of a scalar loss w.r.t. the live parameters, given its gradient
// w.r.t. the logits of the traced pass. Batch averaging is the caller's job:
// `dlogits` must already carry the 1/B factor of a mean loss.
Gradients backward(const MlpModel& model, const ForwardTrace& trace, const Matrix& dlogits);

// Row-wise softmax. Rows sum to one and every entry is strictly positive.
Matrix softmax(const Matrix& logits);

// shadow <- m * shadow + (1 - m) * live.
void ema_update(MlpModel& model, double momentum);

}  // namespace flexssl::numkit
