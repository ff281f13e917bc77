#include "flexssl/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <ostream>

#include <fmt/format.h>

#include "flexssl/errors.hpp"

namespace flexssl::harness {

ExperimentPlan::ExperimentPlan() {
  for (const auto& id : sslloss::variant_ids()) algorithms.emplace(id, sslloss::AlgorithmSpec::preset(id));
  algorithms.emplace("supervised", sslloss::AlgorithmSpec::preset("supervised"));
}

trainer::TrainConfig ExperimentPlan::config_for(const std::string& variant, std::uint64_t seed) const {
  const auto it = algorithms.find(variant);
  if (it == algorithms.end()) throw ConfigError("unknown algorithm '" + variant + "'");
  trainer::TrainConfig cfg = train;
  cfg.spec = it->second;
  cfg.seed = seed;
  return cfg;
}

void ExperimentPlan::validate() const {
  if (variants.empty() || label_budgets.empty() || seeds.empty()) throw ConfigError("plan: empty cross product");
  for (const auto& v : variants) {
    if (!algorithms.contains(v)) throw ConfigError("plan: unknown algorithm '" + v + "'");
  }
  auto has_duplicates = [](auto v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
  };
  if (has_duplicates(variants) || has_duplicates(label_budgets) || has_duplicates(seeds)) {
    throw ConfigError("plan: repeated algorithm, label budget or seed would give duplicate run ids");
  }
  if (jobs < 1) throw ConfigError("plan: jobs must be >= 1");
  for (const auto& [id, spec] : algorithms) spec.validate();
  train.validate();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line, const std::string& key) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("key '" + key + "': cannot parse '" + std::string(text) + "' as a number", line);
  }
  return v;
}

bool parse_bool(std::string_view text, std::size_t line, const std::string& key) {
  if (text == "true" || text == "on" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "off" || text == "0" || text == "no") return false;
  throw ParseError("key '" + key + "': expected a boolean, found '" + std::string(text) + "'", line);
}

std::vector<std::string> parse_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
std::vector<T> parse_number_list(std::string_view text, std::size_t line, const std::string& key) {
  std::vector<T> out;
  for (const auto& item : parse_list(text)) out.push_back(parse_number<T>(item, line, key));
  if (out.empty()) throw ParseError("key '" + key + "': empty list", line);
  return out;
}

using Setter = std::function<void(std::string_view, std::size_t, const std::string&)>;
using KeyTable = std::map<std::string, Setter>;

KeyTable dataset_keys(DatasetSpec& d) {
  return {
      {"kind", [&](auto v, auto, auto&) { d.kind = std::string(v); }},
      {"csv", [&](auto v, auto, auto&) { d.csv = std::string(v); }},
      {"n_total", [&](auto v, auto l, auto& k) { d.n_total = parse_number<std::size_t>(v, l, k); }},
      {"classes", [&](auto v, auto l, auto& k) { d.classes = parse_number<std::size_t>(v, l, k); }},
      {"noise", [&](auto v, auto l, auto& k) { d.noise = parse_number<double>(v, l, k); }},
      {"eval_fraction", [&](auto v, auto l, auto& k) { d.eval_fraction = parse_number<double>(v, l, k); }},
      {"seed", [&](auto v, auto l, auto& k) { d.seed = parse_number<std::uint64_t>(v, l, k); }},
      {"imbalance_ratio", [&](auto v, auto l, auto& k) { d.imbalance_ratio = parse_number<double>(v, l, k); }},
  };
}

KeyTable algorithm_keys(sslloss::AlgorithmSpec& a) {
  return {
      {"tau", [&](auto v, auto l, auto& k) { a.tau = parse_number<double>(v, l, k); }},
      {"temperature", [&](auto v, auto l, auto& k) { a.temperature = parse_number<double>(v, l, k); }},
      {"mu", [&](auto v, auto l, auto& k) { a.mu = parse_number<std::size_t>(v, l, k); }},
      {"lambda", [&](auto v, auto l, auto& k) { a.lambda = parse_number<double>(v, l, k); }},
  };
}

KeyTable train_keys(trainer::TrainConfig& t) {
  return {
      {"batch_size", [&](auto v, auto l, auto& k) { t.batch_size = parse_number<std::size_t>(v, l, k); }},
      {"iterations", [&](auto v, auto l, auto& k) { t.iterations = parse_number<std::int64_t>(v, l, k); }},
      {"lr", [&](auto v, auto l, auto& k) { t.lr = parse_number<double>(v, l, k); }},
      {"momentum", [&](auto v, auto l, auto& k) { t.momentum = parse_number<double>(v, l, k); }},
      {"ema", [&](auto v, auto l, auto& k) { t.ema = parse_number<double>(v, l, k); }},
      {"weight_decay", [&](auto v, auto l, auto& k) { t.weight_decay = parse_number<double>(v, l, k); }},
      {"checkpoint_every", [&](auto v, auto l, auto& k) { t.checkpoint_every = parse_number<std::int64_t>(v, l, k); }},
      {"hidden", [&](auto v, auto l, auto& k) { t.hidden = parse_number_list<std::size_t>(v, l, k); }},
      {"mapping",
       [&](auto v, auto l, auto& k) {
         try {
           t.mapping = cpl::parse_mapping(std::string(v));
         } catch (const ConfigError& e) {
           throw ParseError("key '" + k + "': " + e.what(), l);
         }
       }},
      {"warmup", [&](auto v, auto l, auto& k) { t.warmup = parse_bool(v, l, k); }},
      {"threshold_floor", [&](auto v, auto l, auto& k) { t.threshold_floor = parse_number<double>(v, l, k); }},
      {"class_balance", [&](auto v, auto l, auto& k) { t.class_balance = parse_bool(v, l, k); }},
      {"class_balance_weight", [&](auto v, auto l, auto& k) { t.class_balance_weight = parse_number<double>(v, l, k); }},
      {"pin_full_effects", [&](auto v, auto l, auto& k) { t.pin_full_effects = parse_bool(v, l, k); }},
  };
}

KeyTable augment_keys(augment::AugmentConfig& a) {
  return {
      {"weak_noise_sigma", [&](auto v, auto l, auto& k) { a.weak_noise_sigma = parse_number<double>(v, l, k); }},
      {"strong_noise_sigma", [&](auto v, auto l, auto& k) { a.strong_noise_sigma = parse_number<double>(v, l, k); }},
      {"strong_dropout_prob", [&](auto v, auto l, auto& k) { a.strong_dropout_prob = parse_number<double>(v, l, k); }},
      {"strong_scale_lo", [&](auto v, auto l, auto& k) { a.strong_scale_lo = parse_number<double>(v, l, k); }},
      {"strong_scale_hi", [&](auto v, auto l, auto& k) { a.strong_scale_hi = parse_number<double>(v, l, k); }},
  };
}

KeyTable plan_keys(ExperimentPlan& p) {
  return {
      {"algorithms", [&](auto v, auto, auto&) { p.variants = parse_list(v); }},
      {"labels_per_class",
       [&](auto v, auto l, auto& k) { p.label_budgets = parse_number_list<std::size_t>(v, l, k); }},
      {"seeds", [&](auto v, auto l, auto& k) { p.seeds = parse_number_list<std::uint64_t>(v, l, k); }},
      {"out", [&](auto v, auto, auto&) { p.out_dir = std::string(v); }},
      {"jobs", [&](auto v, auto l, auto& k) { p.jobs = parse_number<int>(v, l, k); }},
  };
}

}  // namespace

ExperimentPlan parse_config_text(std::istream& in) {
  ExperimentPlan plan;
  KeyTable current;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;

    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError("unterminated section header", line_no);
      section = std::string(trim(text.substr(1, text.size() - 2)));
      if (section == "dataset") {
        current = dataset_keys(plan.dataset);
      } else if (section == "train") {
        current = train_keys(plan.train);
      } else if (section == "augment") {
        current = augment_keys(plan.train.augment);
      } else if (section == "plan") {
        current = plan_keys(plan);
      } else if (section.starts_with("algorithm.")) {
        const std::string id = section.substr(10);
        const auto it = plan.algorithms.find(id);
        if (it == plan.algorithms.end()) throw ParseError("unknown algorithm section '" + section + "'", line_no);
        current = algorithm_keys(it->second);
      } else {
        throw ParseError("unknown section '" + section + "'", line_no);
      }
      continue;
    }

    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    if (section.empty()) throw ParseError("key outside of any section", line_no);
    const std::string key(trim(text.substr(0, eq)));
    const auto value = trim(text.substr(eq + 1));
    const auto setter = current.find(key);
    if (setter == current.end()) throw ParseError("unknown key '" + key + "' in section [" + section + "]", line_no);
    setter->second(value, line_no, key);
  }
  return plan;
}

ExperimentPlan parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'", 0);
  return parse_config_text(in);
}

namespace {

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt::format("{}", v[i]);
  return out;
}

}  // namespace

void print_defaults(std::ostream& out) {
  const ExperimentPlan p;
  const auto& d = p.dataset;
  const auto& t = p.train;
  const auto& a = t.augment;
  out << "# flexssl experiment configuration (all defaults)\n"
      << "# Command-line flags override values here.\n\n"
      << "[dataset]\n"
      << "# two_moons | blobs | rings; set csv = PATH to load f1..fd,label rows instead\n"
      << "kind = " << d.kind << "\n"
      << "# csv =\n"
      << "n_total = " << d.n_total << "\n"
      << "classes = " << d.classes << "\n"
      << "noise = " << fmt::format("{}", d.noise) << "\n"
      << "# fraction of each class held out for evaluation\n"
      << "eval_fraction = " << fmt::format("{}", d.eval_fraction) << "\n"
      << "# pool generation seed; the per-run seed picks the labeled subset\n"
      << "seed = " << d.seed << "\n"
      << "# > 1 thins the unlabeled rows of later classes (long tail)\n"
      << "imbalance_ratio = " << fmt::format("{}", d.imbalance_ratio) << "\n\n";
  for (const auto& id : sslloss::variant_ids()) {
    const auto& s = p.algorithms.at(id);
    out << "[algorithm." << id << "]\n"
        << "tau = " << fmt::format("{}", s.tau) << "\n"
        << "temperature = " << fmt::format("{}", s.temperature) << "\n"
        << "mu = " << s.mu << "\n"
        << "lambda = " << fmt::format("{}", s.lambda) << "\n\n";
  }
  out << "[train]\n"
      << "batch_size = " << t.batch_size << "\n"
      << "iterations = " << t.iterations << "\n"
      << "lr = " << fmt::format("{}", t.lr) << "\n"
      << "momentum = " << fmt::format("{}", t.momentum) << "\n"
      << "ema = " << fmt::format("{}", t.ema) << "\n"
      << "# decoupled, weights only, scaled by the current learning rate\n"
      << "weight_decay = " << fmt::format("{}", t.weight_decay) << "\n"
      << "checkpoint_every = " << t.checkpoint_every << "\n"
      << "hidden = " << join(t.hidden) << "\n"
      << "# linear | convex | concave\n"
      << "mapping = " << cpl::to_string(t.mapping) << "\n"
      << "warmup = " << (t.warmup ? "true" : "false") << "\n"
      << "threshold_floor = " << fmt::format("{}", t.threshold_floor) << "\n"
      << "class_balance = " << (t.class_balance ? "true" : "false") << "\n"
      << "class_balance_weight = " << fmt::format("{}", t.class_balance_weight) << "\n"
      << "pin_full_effects = " << (t.pin_full_effects ? "true" : "false") << "\n\n"
      << "[augment]\n"
      << "# noise sigmas are in units of each feature's standard deviation\n"
      << "weak_noise_sigma = " << fmt::format("{}", a.weak_noise_sigma) << "\n"
      << "strong_noise_sigma = " << fmt::format("{}", a.strong_noise_sigma) << "\n"
      << "strong_dropout_prob = " << fmt::format("{}", a.strong_dropout_prob) << "\n"
      << "strong_scale_lo = " << fmt::format("{}", a.strong_scale_lo) << "\n"
      << "strong_scale_hi = " << fmt::format("{}", a.strong_scale_hi) << "\n\n"
      << "[plan]\n"
      << "# any of: supervised, " << join(sslloss::variant_ids()) << "\n"
      << "algorithms = " << join(p.variants) << "\n"
      << "labels_per_class = " << join(p.label_budgets) << "\n"
      << "seeds = " << join(p.seeds) << "\n"
      << "out = " << p.out_dir << "\n"
      << "jobs = " << p.jobs << "\n";
}

}  // namespace flexssl::harness
