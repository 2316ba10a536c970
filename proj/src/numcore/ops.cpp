#include "sib/numcore/ops.hpp"

#include <Eigen/Core>

namespace sib {
namespace {

template <class T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
Eigen::Map<const RowMajor<T>> view(const Matrix<T>& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

template <class T>
Eigen::Map<RowMajor<T>> view(Matrix<T>& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

}  // namespace

template <class T>
Matrix<T> matmul_abt(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_abt: inner dims " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()));
  }
  Matrix<T> out(a.rows(), b.rows());
  if (a.cols() == 0) return out;
  view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

template <class T>
Matrix<T> matmul_ab(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul_ab: inner dims " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()));
  }
  Matrix<T> out(a.rows(), b.cols());
  if (a.cols() == 0) return out;
  view(out).noalias() = view(a) * view(b);
  return out;
}

template <class T>
void accumulate_atb(Matrix<T>& out, const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
    throw DimensionError("accumulate_atb: incompatible shapes");
  }
  if (a.rows() == 0) return;
  view(out).noalias() += view(a).transpose() * view(b);
}

template <class T>
void accumulate_column_sums(Matrix<T>& out, const Matrix<T>& m) {
  if (out.size() != m.cols()) throw DimensionError("accumulate_column_sums: width mismatch");
  // Reduce in double, then fold into the accumulator.
  std::vector<double> sums(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) sums[c] += static_cast<double>(row[c]);
  }
  auto dst = out.values();
  for (std::size_t c = 0; c < m.cols(); ++c) dst[c] = static_cast<T>(dst[c] + sums[c]);
}

template <class T>
void add_row_broadcast(Matrix<T>& m, const Matrix<T>& row) {
  if (row.size() != m.cols()) throw DimensionError("add_row_broadcast: width mismatch");
  auto b = row.values();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto dst = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) dst[c] += b[c];
  }
}

#define SIB_INSTANTIATE(T)                                                      \
  template Matrix<T> matmul_abt(const Matrix<T>&, const Matrix<T>&);            \
  template Matrix<T> matmul_ab(const Matrix<T>&, const Matrix<T>&);             \
  template void accumulate_atb(Matrix<T>&, const Matrix<T>&, const Matrix<T>&); \
  template void accumulate_column_sums(Matrix<T>&, const Matrix<T>&);           \
  template void add_row_broadcast(Matrix<T>&, const Matrix<T>&);

SIB_INSTANTIATE(float)
SIB_INSTANTIATE(double)
#undef SIB_INSTANTIATE

}  // namespace sib
