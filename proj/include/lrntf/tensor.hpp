// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace lrntf {

using Index = Eigen::Index;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense third-order tensor of doubles, n_row x n_col x depth.
///
/// Storage is row-major over (row, col, depth): the entry (r, c, k) lives at
/// offset (r * n_col + c) * depth + k. Each pixel's fiber is therefore
/// contiguous, and the whole tensor can be viewed as an (n_row * n_col) x depth
/// row-major matrix with pixel index p = r * n_col + c. The cube file format
/// writes this buffer verbatim.
class Tensor3 {
 public:
  using PixelView = Eigen::Map<RowMat>;
  using ConstPixelView = Eigen::Map<const RowMat>;

  Tensor3() = default;
  Tensor3(Index n_row, Index n_col, Index depth, double value = 0.0);

  Index n_row() const noexcept { return n_row_; }
  Index n_col() const noexcept { return n_col_; }
  Index depth() const noexcept { return depth_; }
  Index pixels() const noexcept { return n_row_ * n_col_; }
  Index size() const noexcept { return n_row_ * n_col_ * depth_; }

  double &operator()(Index r, Index c, Index k) {
    return data_[static_cast<std::size_t>((r * n_col_ + c) * depth_ + k)];
  }
  double operator()(Index r, Index c, Index k) const {
    return data_[static_cast<std::size_t>((r * n_col_ + c) * depth_ + k)];
  }

  double *data() noexcept { return data_.data(); }
  const double *data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  /// Pixels x depth view sharing this tensor's storage.
  PixelView pixel_matrix() { return {data_.data(), pixels(), depth_}; }
  ConstPixelView pixel_matrix() const { return {data_.data(), pixels(), depth_}; }

  bool same_dims(const Tensor3 &o) const noexcept {
    return n_row_ == o.n_row_ && n_col_ == o.n_col_ && depth_ == o.depth_;
  }

  bool operator==(const Tensor3 &) const = default;

 private:
  Index n_row_ = 0;
  Index n_col_ = 0;
  Index depth_ = 0;
  std::vector<double> data_;
};

/// Frontal slice k as an n_row x n_col matrix. Always an explicit copy; use
/// set_slice to write back.
Mat slice(const Tensor3 &t, Index k);
void set_slice(Tensor3 &t, Index k, const Mat &m);

/// Builds a tensor whose k-th frontal slice is slices[k].
Tensor3 stack_slices(std::span<const Mat> slices);

/// Mode-3 product: out(i1, i2, j) = sum_k t(i1, i2, k) * x(j, k).
Tensor3 mode3_product(const Tensor3 &t, const Mat &x);

/// acc(i1, i2, j) += a(i1, i2) * c(j).
Tensor3 &outer_accumulate(Tensor3 &acc, const Mat &a, const Vec &c);

/// Squared Frobenius norm (sum of squared entries).
double frob_norm_sq(const Tensor3 &t);

struct Svd {
  Mat U;  ///< rows x p, orthonormal columns
  Vec s;  ///< p = min(rows, cols), nonincreasing
  Mat Z;  ///< cols x p, orthonormal columns
};

/// Thin SVD, m == U * diag(s) * Z^T. Throws DomainError on non-finite input.
Svd thin_svd(const Mat &m);

}  // namespace lrntf
