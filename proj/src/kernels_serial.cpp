#include <algorithm>
#include <cmath>
#include <limits>

#include "flexssl/kernels.hpp"

namespace flexssl::kernels::serial {

void affine(const Matrix& a, const Matrix& w, std::span<const double> bias, Matrix& out) {
  if (a.cols() != w.rows()) throw ShapeError("affine: input cols != weight rows");
  if (!bias.empty() && bias.size() != w.cols()) throw ShapeError("affine: bias length != weight cols");
  if (out.rows() != a.rows() || out.cols() != w.cols()) throw ShapeError("affine: output shape");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double acc = bias.empty() ? 0.0 : bias[j];
      for (std::size_t p = 0; p < a.cols(); ++p) acc += a(i, p) * w(p, j);
      out(i, j) = acc;
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& d, Matrix& out) {
  if (a.rows() != d.rows()) throw ShapeError("matmul_tn: row counts differ");
  if (out.rows() != a.cols() || out.cols() != d.cols()) throw ShapeError("matmul_tn: output shape");
  for (std::size_t p = 0; p < a.cols(); ++p) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, p) * d(i, j);
      out(p, j) = acc;
    }
  }
}

void matmul_nt(const Matrix& d, const Matrix& w, Matrix& out) {
  if (d.cols() != w.cols()) throw ShapeError("matmul_nt: inner dimensions differ");
  if (out.rows() != d.rows() || out.cols() != w.rows()) throw ShapeError("matmul_nt: output shape");
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t p = 0; p < w.rows(); ++p) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d.cols(); ++j) acc += d(i, j) * w(p, j);
      out(i, p) = acc;
    }
  }
}

void column_sums(const Matrix& d, std::span<double> out) {
  if (out.size() != d.cols()) throw ShapeError("column_sums: output length");
  for (std::size_t j = 0; j < d.cols(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i) acc += d(i, j);
    out[j] = acc;
  }
}

void relu_inplace(Matrix& m) {
  for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
}

void relu_mask(const Matrix& act, Matrix& d) {
  if (!act.same_shape(d)) throw ShapeError("relu_mask: shapes differ");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(act.values()[i] > 0.0)) d.values()[i] = 0.0;
  }
}

void softmax_rows(const Matrix& logits, Matrix& out) {
  if (!logits.same_shape(out)) throw ShapeError("softmax_rows: shapes differ");
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto z = logits.row(i);
    auto p = out.row(i);
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      p[j] = std::exp(z[j] - mx);
      sum += p[j];
    }
    for (double& v : p) v = std::max(v / sum, std::numeric_limits<double>::min());
  }
}

}  // namespace flexssl::kernels::serial
