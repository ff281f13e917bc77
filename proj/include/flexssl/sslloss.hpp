#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flexssl/augment.hpp"
#include "flexssl/cpl.hpp"
#include "flexssl/mlp.hpp"

namespace flexssl::sslloss {

enum class Family { supervised, pseudo_label, uda, fixmatch };

// One semi-supervised algorithm variant and its algorithm-dependent
// hyperparameters.
struct AlgorithmSpec {
  Family family = Family::fixmatch;
  bool flexible = false;
  double tau = 0.95;
  double temperature = 1.0;  // sharpening temperature, used by uda only
  std::size_t mu = 7;        // unlabeled-to-labeled batch ratio
  double lambda = 1.0;       // unsupervised loss weight

  // Defaults per variant: pl, flex_pl, uda, flex_uda, fixmatch, flexmatch,
  // supervised.
  static AlgorithmSpec preset(const std::string& name);

  // Short identifier accepted by preset().
  std::string id() const;
  // Row label used in reports (PL, Flex-PL, ...).
  std::string display_name() const;

  bool soft_targets() const noexcept { return family == Family::uda; }
  bool uses_unlabeled() const noexcept { return family != Family::supervised; }

  void validate() const;
};

// All variant ids in report order.
const std::vector<std::string>& variant_ids();

// H(onehot(target), p) = -log p[target].
double cross_entropy(int target, std::span<const double> probs);
// H(t, p) = -sum t_c log p_c.
double cross_entropy(std::span<const double> target, std::span<const double> probs);

// q_c = p_c^(1/T) / sum_j p_j^(1/T).
std::vector<double> sharpen(std::span<const double> p, double temperature);

// Index of the largest entry; the lowest index wins ties.
int argmax(std::span<const double> v);

// A traced forward pass together with its loss and the gradient of that loss
// w.r.t. the logits.
struct LossPass {
  double loss = 0.0;
  numkit::ForwardTrace trace;
  Matrix probs;
  Matrix dlogits;
};

// Mean cross-entropy over the weak-augmented labeled batch.
LossPass supervised_loss(const numkit::MlpModel& model, const Matrix& x, std::span<const int> y,
                         const augment::Augmenter& aug, augment::Rng& rng);

struct UnsupBatchResult {
  double loss = 0.0;
  std::vector<std::uint8_t> mask;
  double utilization = 0.0;
  Matrix targets;                  // detached pseudo-label distributions, one row per sample
  std::vector<int> pseudo_labels;  // argmax of the weak prediction
  std::vector<double> confidence;  // max of the weak prediction
  std::vector<double> thresholds;  // per-class thresholds used for the mask
  LossPass pass;                   // traced prediction branch; pass.loss == loss
};

// Thresholded pseudo-label consistency loss.
//
// Targets come from the weak branch with live weights and are treated as
// constants. The prediction branch is a second weak draw for pseudo_label
// and a strong draw for uda and fixmatch. Non-flexible variants mask with
// max(q) > tau; flexible variants mask with the curriculum thresholds as they
// stood before this batch, then record the batch into the cache using the
// fixed tau.
UnsupBatchResult unsupervised_loss(const AlgorithmSpec& spec, const numkit::MlpModel& model,
                                   const Matrix& unlabeled_x, std::span<const std::size_t> indices,
                                   cpl::CurriculumState* state, const augment::Augmenter& aug, augment::Rng& rng);

// L_s + lambda * L_u.
double total_loss(const AlgorithmSpec& spec, double supervised, double unsupervised);

// KL(uniform || mean of the batch's predicted distributions).
double class_balance_loss(const Matrix& probs);
// Gradient of class_balance_loss w.r.t. the logits that produced `probs`.
Matrix class_balance_grad(const Matrix& probs);

}  // namespace flexssl::sslloss
