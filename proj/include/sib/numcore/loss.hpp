#pragma once

#include <span>

#include "sib/numcore/tensor.hpp"

namespace sib {

template <class T>
struct LossAndGrad {
  double loss = 0.0;
  Matrix<T> grad;
};

// Row-wise softmax with max subtraction, evaluated in double.
template <class T>
Matrix<T> softmax_rows(const Matrix<T>& logits);

// Mean over rows of −Σ targets · log softmax(logits); grad = (softmax − targets) / rows.
// Targets may be one-hot or soft but each row must sum to 1 within 1e-6.
template <class T>
LossAndGrad<T> softmax_cross_entropy(const Matrix<T>& logits, const Matrix<T>& targets);

// Per-row losses (not averaged); same validation as softmax_cross_entropy.
template <class T>
std::vector<double> softmax_cross_entropy_rows(const Matrix<T>& logits, const Matrix<T>& targets);

template <class T>
Matrix<T> one_hot(std::span<const std::size_t> labels, std::size_t classes);

template <class T>
Matrix<T> one_hot_repeated(std::size_t label, std::size_t rows, std::size_t classes);

}  // namespace sib
