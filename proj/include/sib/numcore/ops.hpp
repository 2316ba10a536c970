#pragma once

#include "sib/numcore/tensor.hpp"

namespace sib {

// GEMM wrappers (Eigen-backed, single-threaded, deterministic).

// a · bᵀ
template <class T>
Matrix<T> matmul_abt(const Matrix<T>& a, const Matrix<T>& b);

// a · b
template <class T>
Matrix<T> matmul_ab(const Matrix<T>& a, const Matrix<T>& b);

// out += aᵀ · b
template <class T>
void accumulate_atb(Matrix<T>& out, const Matrix<T>& a, const Matrix<T>& b);

// out[c] += Σ_r m(r, c)
template <class T>
void accumulate_column_sums(Matrix<T>& out, const Matrix<T>& m);

// Adds the 1×cols row vector to every row of m.
template <class T>
void add_row_broadcast(Matrix<T>& m, const Matrix<T>& row);

}  // namespace sib
