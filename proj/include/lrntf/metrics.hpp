// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lrntf/tensor.hpp"

namespace lrntf {

/// sqrt(||A - A_hat||_F^2 / (R * N)), N = n_row * n_col.
double rmse(const Tensor3 &a_true, const Tensor3 &a_est);

/// Per-slice RMSE, one entry per endmember.
Vec rmse_per_endmember(const Tensor3 &a_true, const Tensor3 &a_est);

/// sqrt(||Y - Y_hat||_F^2 / (N * L)).
double re(const Tensor3 &y, const Tensor3 &y_hat);

struct AngleStats {
  double mean = 0.0;     ///< radians
  Index degenerate = 0;  ///< pixels where either spectrum has zero norm
};

/// Mean spectral angle. A pixel whose spectra are both zero contributes 0, a
/// pixel with exactly one zero spectrum contributes pi/2; both are counted in
/// `degenerate`.
AngleStats asam_stats(const Tensor3 &y, const Tensor3 &y_hat);
double asam(const Tensor3 &y, const Tensor3 &y_hat);

/// Per-pixel reconstruction error sqrt(mean_b (y - y_hat)^2), n_row x n_col.
Mat error_map(const Tensor3 &y, const Tensor3 &y_hat);

struct MetricsReport {
  double rmse = 0.0;
  double re = 0.0;
  double asam = 0.0;
  Vec rmse_per_endmember;
};

enum class EnergyMode {
  Sigma,    ///< cumulative sum of singular values
  SigmaSq,  ///< cumulative sum of squared singular values
};

struct RankProfile {
  Vec singulars;     ///< nonincreasing
  Vec cum_energy;    ///< cum_energy[k] covers the first k + 1 singular values
  Index dim = 0;     ///< smallest count whose cumulative energy reaches the threshold
  Vec approx_error;  ///< approx_error[k] = ||m - best rank-(k + 1) approximation||_F
};

RankProfile rank_profile(const Mat &m, double energy = 0.95,
                         EnergyMode mode = EnergyMode::Sigma);

struct LowRank {
  Mat approx;
  Mat diff;  ///< m - approx
};

/// Truncated SVD reconstruction of rank k, 1 <= k <= min(rows, cols).
LowRank lowrank_approx(const Mat &m, Index k);

}  // namespace lrntf
