#include "flexssl/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

namespace flexssl::datagen {

SyntheticKind parse_kind(const std::string& name) {
  if (name == "two_moons") return SyntheticKind::two_moons;
  if (name == "blobs") return SyntheticKind::blobs;
  if (name == "rings") return SyntheticKind::rings;
  throw ConfigError("unsupported dataset kind '" + name + "' (expected two_moons, blobs or rings)");
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::two_moons: return "two_moons";
    case SyntheticKind::blobs: return "blobs";
    case SyntheticKind::rings: return "rings";
  }
  return "unknown";
}

LabeledPool make_synthetic(SyntheticKind kind, std::size_t n_total, std::size_t class_count, double noise,
                           std::uint64_t seed) {
  if (class_count == 0) throw ConfigError("class_count must be positive");
  if (n_total < class_count) throw ConfigError("n_total must be at least class_count");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("noise must be finite and >= 0");
  if (kind == SyntheticKind::two_moons && class_count != 2) throw ConfigError("two_moons has exactly 2 classes");

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  const double pi = std::numbers::pi;

  LabeledPool pool;
  pool.class_count = class_count;
  pool.features = Matrix(n_total, 2);
  pool.labels.resize(n_total);

  std::size_t row = 0;
  for (std::size_t c = 0; c < class_count; ++c) {
    const std::size_t count = n_total / class_count + (c < n_total % class_count ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i, ++row) {
      double x = 0.0;
      double y = 0.0;
      switch (kind) {
        case SyntheticKind::two_moons: {
          const double t = pi * unit(rng);
          // Centred so the pair of arcs has its midpoint at the origin.
          if (c == 0) {
            x = std::cos(t) - 0.5;
            y = std::sin(t) - 0.25;
          } else {
            x = 1.0 - std::cos(t) - 0.5;
            y = 0.5 - std::sin(t) - 0.25;
          }
          break;
        }
        case SyntheticKind::blobs: {
          const double a = 2.0 * pi * static_cast<double>(c) / static_cast<double>(class_count);
          x = 2.5 * std::cos(a);
          y = 2.5 * std::sin(a);
          break;
        }
        case SyntheticKind::rings: {
          const double t = 2.0 * pi * unit(rng);
          const double r = static_cast<double>(c + 1);
          x = r * std::cos(t);
          y = r * std::sin(t);
          break;
        }
      }
      if (noise > 0.0) {
        x += noise * jitter(rng);
        y += noise * jitter(rng);
      }
      pool.features(row, 0) = x;
      pool.features(row, 1) = y;
      pool.labels[row] = static_cast<int>(c);
    }
  }

  std::vector<std::size_t> perm(n_total);
  for (std::size_t i = 0; i < n_total; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  LabeledPool shuffled;
  shuffled.class_count = class_count;
  shuffled.features = Matrix(n_total, 2);
  shuffled.labels.resize(n_total);
  for (std::size_t i = 0; i < n_total; ++i) {
    shuffled.features(i, 0) = pool.features(perm[i], 0);
    shuffled.features(i, 1) = pool.features(perm[i], 1);
    shuffled.labels[i] = pool.labels[perm[i]];
  }
  return shuffled;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

LabeledPool parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file, expected header f1..fd,label", 1);
  ++line_no;
  const auto header = split_fields(trim(line));
  if (header.size() < 2 || trim(header.back()) != "label") {
    throw ParseError("header must be f1,...,fd,label", line_no);
  }
  const std::size_t dim = header.size() - 1;
  for (std::size_t f = 0; f < dim; ++f) {
    if (trim(header[f]) != "f" + std::to_string(f + 1)) throw ParseError("header must be f1,...,fd,label", line_no);
  }

  std::vector<double> values;
  std::vector<int> labels;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text);
    if (fields.size() != dim + 1) {
      throw ParseError("expected " + std::to_string(dim + 1) + " fields, found " + std::to_string(fields.size()),
                       line_no);
    }
    for (std::size_t f = 0; f < dim; ++f) {
      const auto tok = trim(fields[f]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("cannot parse feature '" + std::string(tok) + "'", line_no);
      }
      if (!std::isfinite(v)) throw ParseError("non-finite feature value", line_no);
      values.push_back(v);
    }
    const auto tok = trim(fields[dim]);
    int label = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), label);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || label < 0) {
      throw ParseError("label must be a non-negative integer, found '" + std::string(tok) + "'", line_no);
    }
    labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (labels.empty()) throw ParseError("no data rows", line_no);

  std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
  for (int l : labels) seen[static_cast<std::size_t>(l)] = true;
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) {
      throw ParseError("labels are not contiguous: class " + std::to_string(c) + " never appears", line_no);
    }
  }

  LabeledPool pool;
  pool.class_count = seen.size();
  pool.features = Matrix(labels.size(), dim, std::move(values));
  pool.labels = std::move(labels);
  return pool;
}

LabeledPool load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file '" + path + "'");
  return parse_csv(in);
}

void write_csv(const LabeledPool& pool, std::ostream& out) {
  const std::size_t dim = pool.features.cols();
  for (std::size_t f = 0; f < dim; ++f) out << 'f' << (f + 1) << ',';
  out << "label\n";
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t f = 0; f < dim; ++f) out << fmt::format("{}", pool.features(i, f)) << ',';
    out << pool.labels[i] << '\n';
  }
}

SplitDataset split(const LabeledPool& pool, std::size_t labels_per_class, double eval_fraction, std::uint64_t seed,
                   double imbalance_ratio) {
  const std::size_t classes = pool.class_count;
  if (classes == 0 || pool.size() == 0) throw ConfigError("split: empty pool");
  if (!(eval_fraction >= 0.0 && eval_fraction < 1.0)) throw ConfigError("split: eval_fraction must lie in [0, 1)");
  if (!(imbalance_ratio >= 1.0) || !std::isfinite(imbalance_ratio)) throw ConfigError("split: imbalance_ratio must be >= 1");
  const bool all_labeled = labels_per_class == kAllLabeled;
  if (!all_labeled) {
    if (labels_per_class == 0) throw ConfigError("split: labels_per_class must be positive");
    const double budget = static_cast<double>(pool.size()) * (1.0 - eval_fraction);
    if (static_cast<double>(labels_per_class * classes) > budget) {
      throw ConfigError("split: " + std::to_string(labels_per_class * classes) +
                        " labels exceed the training portion of the pool");
    }
  }

  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const int l = pool.labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= classes) throw ConfigError("split: label out of range");
    by_class[static_cast<std::size_t>(l)].push_back(i);
  }

  Rng rng(seed);
  std::vector<std::size_t> eval_rows, labeled_rows, unlabeled_rows;
  for (std::size_t c = 0; c < classes; ++c) {
    auto& rows = by_class[c];
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n_eval = static_cast<std::size_t>(std::floor(eval_fraction * static_cast<double>(rows.size())));
    const std::size_t n_train = rows.size() - n_eval;
    const std::size_t n_lab = all_labeled ? n_train : labels_per_class;
    if (n_lab == 0 || n_lab > n_train) {
      throw ConfigError("split: class " + std::to_string(c) + " has " + std::to_string(n_train) +
                        " training samples, cannot label " + std::to_string(n_lab));
    }
    eval_rows.insert(eval_rows.end(), rows.begin(), rows.begin() + static_cast<long>(n_eval));
    labeled_rows.insert(labeled_rows.end(), rows.begin() + static_cast<long>(n_eval),
                        rows.begin() + static_cast<long>(n_eval + n_lab));
    std::size_t n_unlab = n_train - n_lab;
    if (imbalance_ratio > 1.0 && classes > 1) {
      const double keep = std::pow(imbalance_ratio, -static_cast<double>(c) / static_cast<double>(classes - 1));
      n_unlab = static_cast<std::size_t>(std::ceil(keep * static_cast<double>(n_unlab)));
    }
    unlabeled_rows.insert(unlabeled_rows.end(), rows.begin() + static_cast<long>(n_eval + n_lab),
                          rows.begin() + static_cast<long>(n_eval + n_lab + n_unlab));
  }
  std::sort(eval_rows.begin(), eval_rows.end());
  std::sort(labeled_rows.begin(), labeled_rows.end());
  std::sort(unlabeled_rows.begin(), unlabeled_rows.end());

  const std::size_t dim = pool.features.cols();
  auto gather = [&](const std::vector<std::size_t>& rows, Matrix& x, std::vector<int>* y) {
    x = Matrix(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto src = pool.features.row(rows[i]);
      std::copy(src.begin(), src.end(), x.row(i).begin());
      if (y) y->push_back(pool.labels[rows[i]]);
    }
  };

  SplitDataset ds;
  ds.class_count = classes;
  ds.feature_dim = dim;
  gather(labeled_rows, ds.labeled_x, &ds.labeled_y);
  gather(unlabeled_rows, ds.unlabeled_x, &ds.unlabeled_truth_);
  gather(eval_rows, ds.eval_x, &ds.eval_y);
  ds.labeled_source = std::move(labeled_rows);
  ds.unlabeled_source = std::move(unlabeled_rows);
  ds.eval_source = std::move(eval_rows);

  ds.feature_scale.assign(dim, 1.0);
  const std::size_t n_train = ds.labeled_count() + ds.unlabeled_count();
  if (n_train > 1) {
    for (std::size_t f = 0; f < dim; ++f) {
      double mean = 0.0;
      for (std::size_t i = 0; i < ds.labeled_count(); ++i) mean += ds.labeled_x(i, f);
      for (std::size_t i = 0; i < ds.unlabeled_count(); ++i) mean += ds.unlabeled_x(i, f);
      mean /= static_cast<double>(n_train);
      double var = 0.0;
      for (std::size_t i = 0; i < ds.labeled_count(); ++i) var += (ds.labeled_x(i, f) - mean) * (ds.labeled_x(i, f) - mean);
      for (std::size_t i = 0; i < ds.unlabeled_count(); ++i) {
        var += (ds.unlabeled_x(i, f) - mean) * (ds.unlabeled_x(i, f) - mean);
      }
      const double sd = std::sqrt(var / static_cast<double>(n_train - 1));
      if (sd > 0.0) ds.feature_scale[f] = sd;
    }
  }
  return ds;
}

BatchSampler::BatchSampler(const SplitDataset& data, std::size_t batch_size, std::size_t mu)
    : data_(&data), batch_size_(batch_size), mu_(mu) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (data.labeled_count() == 0) throw ConfigError("labeled set is empty");
  if (mu > 0 && data.unlabeled_count() == 0) throw ConfigError("unlabeled set is empty");
}

BatchPair BatchSampler::next(Rng& rng) {
  const auto& d = *data_;
  const std::size_t dim = d.feature_dim;
  BatchPair b;
  b.labeled_x = Matrix(batch_size_, dim);
  b.labeled_y.resize(batch_size_);
  std::uniform_int_distribution<std::size_t> pick(0, d.labeled_count() - 1);
  for (std::size_t i = 0; i < batch_size_; ++i) {
    const std::size_t r = pick(rng);
    auto src = d.labeled_x.row(r);
    std::copy(src.begin(), src.end(), b.labeled_x.row(i).begin());
    b.labeled_y[i] = d.labeled_y[r];
  }

  const std::size_t nu = batch_size_ * mu_;
  b.unlabeled_x = Matrix(nu, dim);
  b.unlabeled_index.resize(nu);
  for (std::size_t i = 0; i < nu; ++i) {
    if (cursor_ == order_.size()) {
      order_.resize(d.unlabeled_count());
      for (std::size_t n = 0; n < order_.size(); ++n) order_[n] = n;
      std::shuffle(order_.begin(), order_.end(), rng);
      cursor_ = 0;
    }
    const std::size_t n = order_[cursor_++];
    auto src = d.unlabeled_x.row(n);
    std::copy(src.begin(), src.end(), b.unlabeled_x.row(i).begin());
    b.unlabeled_index[i] = n;
  }
  return b;
}

}  // namespace flexssl::datagen
