// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "lrntf/error.hpp"
#include "lrntf/tensor.hpp"

namespace lrntf {

struct FclsConfig {
  int max_iter = 500;       ///< active-set iterations per pixel
  double tol = 1e-10;       ///< KKT tolerance, relative to ||E^T f||_inf
  double asc_weight = 1e3;  ///< weight of the appended sum-to-one row
  void validate() const;
};

/// Raised when the active-set loop hits max_iter; carries the best iterate.
class FclsError : public SolverError {
 public:
  FclsError(const std::string &what, Vec best) : SolverError(what), best_{std::move(best)} {}
  const Vec &best() const noexcept { return best_; }

 private:
  Vec best_;
};

/// Fully constrained least squares for one library C (bands x R).
///
/// Solves min ||y - C a|| s.t. a >= 0, sum(a) = 1 by Lawson-Hanson NNLS on the
/// system [w 1^T; C] a = [w; y]. Once the support is known, the sum-to-one
/// constraint is imposed exactly on it through the equality-constrained normal
/// equations; the polished solution replaces the penalised one when it stays
/// nonnegative.
class Fcls {
 public:
  Fcls(const Mat &C, FclsConfig cfg = {});

  Vec solve(const Eigen::Ref<const Vec> &y) const;

  const FclsConfig &config() const noexcept { return cfg_; }

 private:
  Vec polish(const Eigen::Ref<const Vec> &y, const Vec &a) const;

  Mat C_;
  Mat E_;  // augmented (bands + 1) x R
  FclsConfig cfg_;
};

Vec fcls_pixel(const Vec &y, const Mat &C, const FclsConfig &cfg = {});

/// Pixelwise FCLS. Failures are rethrown naming the pixel (row, col).
Tensor3 fcls_cube(const Tensor3 &y, const Mat &C, const FclsConfig &cfg = {});

}  // namespace lrntf
