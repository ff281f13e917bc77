#include "flexssl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

namespace flexssl::kernels {
namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr long kParallelWork = 1L << 15;
constexpr double kMinProb = std::numeric_limits<double>::min();

void check_affine(const Matrix& a, const Matrix& w, std::span<const double> bias, const Matrix& out) {
  if (a.cols() != w.rows()) throw ShapeError("affine: input cols != weight rows");
  if (!bias.empty() && bias.size() != w.cols()) throw ShapeError("affine: bias length != weight cols");
  if (out.rows() != a.rows() || out.cols() != w.cols()) throw ShapeError("affine: output shape");
}

}  // namespace

void set_threads(int n) { omp_set_num_threads(std::max(1, n)); }
int threads() { return omp_get_max_threads(); }

void affine(const Matrix& a, const Matrix& w, std::span<const double> bias, Matrix& out) {
  check_affine(a, w, bias, out);
  const long n = static_cast<long>(a.rows());
  const std::size_t k = a.cols();
  const std::size_t m = w.cols();
  const long work = n * static_cast<long>(k * m);
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long i = 0; i < n; ++i) {
    double* o = out.data() + i * m;
    const double* ai = a.data() + i * k;
    if (bias.empty()) {
      std::fill(o, o + m, 0.0);
    } else {
      std::copy(bias.begin(), bias.end(), o);
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double s = ai[p];
      const double* wp = w.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += s * wp[j];
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& d, Matrix& out) {
  if (a.rows() != d.rows()) throw ShapeError("matmul_tn: row counts differ");
  if (out.rows() != a.cols() || out.cols() != d.cols()) throw ShapeError("matmul_tn: output shape");
  const std::size_t n = a.rows();
  const long k = static_cast<long>(a.cols());
  const std::size_t m = d.cols();
  const long work = k * static_cast<long>(n * m);
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long p = 0; p < k; ++p) {
    double* o = out.data() + p * m;
    std::fill(o, o + m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = a(i, static_cast<std::size_t>(p));
      const double* di = d.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += s * di[j];
    }
  }
}

void matmul_nt(const Matrix& d, const Matrix& w, Matrix& out) {
  if (d.cols() != w.cols()) throw ShapeError("matmul_nt: inner dimensions differ");
  if (out.rows() != d.rows() || out.cols() != w.rows()) throw ShapeError("matmul_nt: output shape");
  const long n = static_cast<long>(d.rows());
  const std::size_t k = w.rows();
  const std::size_t m = d.cols();
  // Row-wise axpy over w^T keeps the j-ordered accumulation of a dot product
  // while letting the inner loop vectorize.
  Matrix wt(m, k);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < m; ++j) wt(j, p) = w(p, j);
  }
  const long work = n * static_cast<long>(k * m);
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long i = 0; i < n; ++i) {
    const double* di = d.data() + i * m;
    double* o = out.data() + i * k;
    std::fill(o, o + k, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double s = di[j];
      const double* wj = wt.data() + j * k;
      for (std::size_t p = 0; p < k; ++p) o[p] += s * wj[p];
    }
  }
}

void column_sums(const Matrix& d, std::span<double> out) {
  if (out.size() != d.cols()) throw ShapeError("column_sums: output length");
  const std::size_t n = d.rows();
  const long m = static_cast<long>(d.cols());
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m > kParallelWork)
  for (long j = 0; j < m; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += d(i, static_cast<std::size_t>(j));
    out[static_cast<std::size_t>(j)] = acc;
  }
}

void relu_inplace(Matrix& m) {
  auto v = m.values();
  const long n = static_cast<long>(v.size());
#pragma omp parallel for schedule(static) if (n > kParallelWork)
  for (long i = 0; i < n; ++i) v[i] = v[i] > 0.0 ? v[i] : 0.0;
}

void relu_mask(const Matrix& act, Matrix& d) {
  if (!act.same_shape(d)) throw ShapeError("relu_mask: shapes differ");
  auto a = act.values();
  auto g = d.values();
  const long n = static_cast<long>(g.size());
#pragma omp parallel for schedule(static) if (n > kParallelWork)
  for (long i = 0; i < n; ++i) {
    if (!(a[i] > 0.0)) g[i] = 0.0;
  }
}

void softmax_rows(const Matrix& logits, Matrix& out) {
  if (!logits.same_shape(out)) throw ShapeError("softmax_rows: shapes differ");
  const long n = static_cast<long>(logits.rows());
  const std::size_t c = logits.cols();
#pragma omp parallel for schedule(static) if (n * static_cast<long>(c) > kParallelWork)
  for (long i = 0; i < n; ++i) {
    const double* z = logits.data() + i * c;
    double* p = out.data() + i * c;
    const double mx = *std::max_element(z, z + c);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      p[j] = std::exp(z[j] - mx);
      sum += p[j];
    }
    // Entries stay strictly positive even when exp underflows.
    for (std::size_t j = 0; j < c; ++j) p[j] = std::max(p[j] / sum, kMinProb);
  }
}

}  // namespace flexssl::kernels
