#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "flexssl/sslloss.hpp"
#include "flexssl/trainer.hpp"

namespace flexssl::harness {

struct DatasetSpec {
  std::string kind = "two_moons";
  std::string csv;  // when set, the pool is loaded from this file instead
  std::size_t n_total = 2510;
  std::size_t classes = 2;
  double noise = 0.1;
  double eval_fraction = 0.2;
  std::uint64_t seed = 0;
  double imbalance_ratio = 1.0;
};

// Everything one `plan` invocation runs: the cross product of algorithm
// variants, label budgets and seeds over one dataset and training template.
struct ExperimentPlan {
  DatasetSpec dataset;
  // Algorithm-dependent settings for every known variant, keyed by id.
  std::map<std::string, sslloss::AlgorithmSpec> algorithms;
  std::vector<std::string> variants = {"fixmatch", "flexmatch"};
  std::vector<std::size_t> label_budgets = {4};
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  trainer::TrainConfig train;
  std::string out_dir = "runs";
  int jobs = 1;

  ExperimentPlan();

  // Training config for one cell of the plan.
  trainer::TrainConfig config_for(const std::string& variant, std::uint64_t seed) const;

  void validate() const;
};

// Sectioned key = value text: [dataset], [algorithm.<id>], [train],
// [augment], [plan]. `#` starts a comment. Unknown sections or keys and
// malformed values raise ParseError with the line number.
ExperimentPlan parse_config(const std::string& path);
ExperimentPlan parse_config_text(std::istream& in);

// Writes a complete config file holding every default, with comments.
void print_defaults(std::ostream& out);

}  // namespace flexssl::harness
