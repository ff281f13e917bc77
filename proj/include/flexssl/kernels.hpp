#pragma once

#include <span>

#include "flexssl/matrix.hpp"

// Dense kernels used by the MLP. Functions in `kernels` are OpenMP-parallel;
// `kernels::serial` holds straightforward single-threaded references that the
// tests compare against bit for bit. Each output element is accumulated by one
// thread in a fixed order, so results do not depend on the thread count.
namespace flexssl::kernels {

// out = a * w + bias (bias broadcast over rows). `bias` may be empty.
void affine(const Matrix& a, const Matrix& w, std::span<const double> bias, Matrix& out);

// out = a^T * d.
void matmul_tn(const Matrix& a, const Matrix& d, Matrix& out);

// out = d * w^T.
void matmul_nt(const Matrix& d, const Matrix& w, Matrix& out);

// out[j] = sum_i d(i, j).
void column_sums(const Matrix& d, std::span<double> out);

void relu_inplace(Matrix& m);

// d(i, j) = 0 wherever act(i, j) <= 0.
void relu_mask(const Matrix& act, Matrix& d);

// Row-wise softmax with max subtraction.
void softmax_rows(const Matrix& logits, Matrix& out);

void set_threads(int n);
int threads();

namespace serial {

void affine(const Matrix& a, const Matrix& w, std::span<const double> bias, Matrix& out);
void matmul_tn(const Matrix& a, const Matrix& d, Matrix& out);
void matmul_nt(const Matrix& d, const Matrix& w, Matrix& out);
void column_sums(const Matrix& d, std::span<double> out);
void relu_inplace(Matrix& m);
void relu_mask(const Matrix& act, Matrix& d);
void softmax_rows(const Matrix& logits, Matrix& out);

}  // namespace serial
}  // namespace flexssl::kernels
