// SPDX-License-Identifier: Apache-2.0
#include "lrntf/tensor.hpp"

#include <Eigen/SVD>

#include <string>

#include "lrntf/error.hpp"

namespace lrntf {

Tensor3::Tensor3(Index n_row, Index n_col, Index depth, double value)
    : n_row_{n_row}, n_col_{n_col}, depth_{depth} {
  if (n_row < 0 || n_col < 0 || depth < 0)
    throw ShapeError("Tensor3: negative dimension");
  data_.assign(static_cast<std::size_t>(n_row * n_col * depth), value);
}

Mat slice(const Tensor3 &t, Index k) {
  if (k < 0 || k >= t.depth())
    throw IndexError("slice index " + std::to_string(k) + " out of range [0, " +
                     std::to_string(t.depth()) + ")");
  Mat out(t.n_row(), t.n_col());
  for (Index r = 0; r < t.n_row(); ++r)
    for (Index c = 0; c < t.n_col(); ++c) out(r, c) = t(r, c, k);
  return out;
}

void set_slice(Tensor3 &t, Index k, const Mat &m) {
  if (k < 0 || k >= t.depth())
    throw IndexError("slice index " + std::to_string(k) + " out of range [0, " +
                     std::to_string(t.depth()) + ")");
  if (m.rows() != t.n_row() || m.cols() != t.n_col())
    throw ShapeError("set_slice: matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", tensor slice is " +
                     std::to_string(t.n_row()) + "x" + std::to_string(t.n_col()));
  for (Index r = 0; r < t.n_row(); ++r)
    for (Index c = 0; c < t.n_col(); ++c) t(r, c, k) = m(r, c);
}

Tensor3 stack_slices(std::span<const Mat> slices) {
  if (slices.empty()) return {};
  const Index rows = slices.front().rows();
  const Index cols = slices.front().cols();
  const auto depth = static_cast<Index>(slices.size());
  Tensor3 out(rows, cols, depth);
  for (Index k = 0; k < depth; ++k) set_slice(out, k, slices[static_cast<std::size_t>(k)]);
  return out;
}

Tensor3 mode3_product(const Tensor3 &t, const Mat &x) {
  if (x.cols() != t.depth())
    throw ShapeError("mode3_product: matrix has " + std::to_string(x.cols()) +
                     " columns, tensor depth is " + std::to_string(t.depth()));
  Tensor3 out(t.n_row(), t.n_col(), x.rows());
  out.pixel_matrix().noalias() = t.pixel_matrix() * x.transpose();
  return out;
}

Tensor3 &outer_accumulate(Tensor3 &acc, const Mat &a, const Vec &c) {
  if (a.rows() != acc.n_row() || a.cols() != acc.n_col() || c.size() != acc.depth())
    throw ShapeError("outer_accumulate: operand shapes do not match accumulator");
  for (Index r = 0; r < acc.n_row(); ++r)
    for (Index col = 0; col < acc.n_col(); ++col) {
      const double w = a(r, col);
      double *fiber = &acc(r, col, 0);
      for (Index k = 0; k < acc.depth(); ++k) fiber[k] += w * c(k);
    }
  return acc;
}

double frob_norm_sq(const Tensor3 &t) {
  double s = 0.0;
  for (double v : t.values()) s += v * v;
  return s;
}

Svd thin_svd(const Mat &m) {
  if (!m.allFinite()) throw DomainError("thin_svd: matrix has non-finite entries");
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace lrntf
