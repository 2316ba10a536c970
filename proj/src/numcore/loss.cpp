#include "sib/numcore/loss.hpp"

#include <algorithm>
#include <cmath>

namespace sib {
namespace {

void validate_targets_row(std::span<const double> row, std::size_t r) {
  double sum = 0.0;
  for (double v : row) {
    if (!std::isfinite(v)) throw ValidationError("target row " + std::to_string(r) + " is not finite");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ValidationError("target row " + std::to_string(r) + " sums to " + std::to_string(sum) +
                          ", expected 1");
  }
}

// log-sum-exp of a row, plus the softmax written into probs.
double log_softmax_row(std::span<const double> z, std::span<double> probs) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    probs[i] = std::exp(z[i] - zmax);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return zmax + std::log(total);
}

template <class T>
std::vector<double> to_double_row(std::span<const T> row) {
  return std::vector<double>(row.begin(), row.end());
}

}  // namespace

template <class T>
Matrix<T> softmax_rows(const Matrix<T>& logits) {
  Matrix<T> out(logits.rows(), logits.cols());
  std::vector<double> probs(logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto z = to_double_row(logits.row(r));
    log_softmax_row(z, probs);
    auto dst = out.row(r);
    for (std::size_t c = 0; c < probs.size(); ++c) dst[c] = static_cast<T>(probs[c]);
  }
  return out;
}

template <class T>
std::vector<double> softmax_cross_entropy_rows(const Matrix<T>& logits, const Matrix<T>& targets) {
  require_same_shape(logits, targets, "softmax_cross_entropy");
  std::vector<double> losses(logits.rows());
  std::vector<double> probs(logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto z = to_double_row(logits.row(r));
    const auto y = to_double_row(targets.row(r));
    validate_targets_row(y, r);
    const double lse = log_softmax_row(z, probs);
    double loss = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) loss -= y[c] * (z[c] - lse);
    losses[r] = loss;
  }
  return losses;
}

template <class T>
LossAndGrad<T> softmax_cross_entropy(const Matrix<T>& logits, const Matrix<T>& targets) {
  require_same_shape(logits, targets, "softmax_cross_entropy");
  LossAndGrad<T> result{0.0, Matrix<T>(logits.rows(), logits.cols())};
  if (logits.rows() == 0) return result;
  const double inv_batch = 1.0 / static_cast<double>(logits.rows());
  std::vector<double> probs(logits.cols());
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto z = to_double_row(logits.row(r));
    const auto y = to_double_row(targets.row(r));
    validate_targets_row(y, r);
    const double lse = log_softmax_row(z, probs);
    auto g = result.grad.row(r);
    for (std::size_t c = 0; c < z.size(); ++c) {
      total -= y[c] * (z[c] - lse);
      g[c] = static_cast<T>((probs[c] - y[c]) * inv_batch);
    }
  }
  result.loss = total * inv_batch;
  return result;
}

template <class T>
Matrix<T> one_hot(std::span<const std::size_t> labels, std::size_t classes) {
  Matrix<T> out(labels.size(), classes);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] >= classes) throw ValidationError("one_hot: label out of range");
    out(r, labels[r]) = T{1};
  }
  return out;
}

template <class T>
Matrix<T> one_hot_repeated(std::size_t label, std::size_t rows, std::size_t classes) {
  std::vector<std::size_t> labels(rows, label);
  return one_hot<T>(labels, classes);
}

#define SIB_INSTANTIATE(T)                                                                  \
  template Matrix<T> softmax_rows(const Matrix<T>&);                                        \
  template LossAndGrad<T> softmax_cross_entropy(const Matrix<T>&, const Matrix<T>&);        \
  template std::vector<double> softmax_cross_entropy_rows(const Matrix<T>&, const Matrix<T>&); \
  template Matrix<T> one_hot(std::span<const std::size_t>, std::size_t);                    \
  template Matrix<T> one_hot_repeated(std::size_t, std::size_t, std::size_t);

SIB_INSTANTIATE(float)
SIB_INSTANTIATE(double)
#undef SIB_INSTANTIATE

}  // namespace sib
