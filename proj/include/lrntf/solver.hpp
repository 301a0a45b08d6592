// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "lrntf/gbm.hpp"
#include "lrntf/tensor.hpp"

namespace lrntf {

/// How negative abundances are mapped back to the feasible set.
enum class Projection {
  Abs,    ///< x -> |x|
  Clamp,  ///< x -> max(x, 0)
};

/// When the projection (and the interaction cap) is applied.
enum class ProjectionSchedule {
  PerSlice,  ///< right after each slice update, before the next slice is solved
  PerSweep,  ///< once after all slices of a block have been updated
};

struct SolverConfig {
  double lambda1 = 0.1;  ///< nuclear-norm weight on abundance maps
  double lambda2 = 0.07; ///< nuclear-norm weight on interaction maps
  double mu = 8e-3;      ///< ADMM penalty, held fixed
  int max_iter = 1000;
  double tol = 1e-6;     ///< relative RE change that stops the loop; 0 disables
  bool record_trace = true;
  Projection projection = Projection::Clamp;
  ProjectionSchedule schedule = ProjectionSchedule::PerSlice;

  /// Throws ConfigError.
  void validate() const;
};

const char *to_string(Projection p) noexcept;
const char *to_string(ProjectionSchedule s) noexcept;
Projection parse_projection(const std::string &name);
ProjectionSchedule parse_schedule(const std::string &name);

/// Per-iteration history. `re` is always filled (the stopping rule needs it);
/// the other series are filled when record_trace is set, and `rmse` only when
/// ground truth was passed to solve().
struct Trace {
  std::vector<double> re;
  std::vector<double> data_term;  ///< 0.5 * ||y - forward||_F^2
  std::vector<double> res_av;     ///< sqrt(sum_i ||A_i - V_i||_F^2)
  std::vector<double> res_be;     ///< sqrt(sum_j ||B_j - E_j||_F^2)
  std::vector<double> res_asc;    ///< ||sum_i A_i - P||_F / ||P||_F
  std::vector<double> rmse;

  std::size_t size() const noexcept { return re.size(); }
};

/// ADMM iterate. Every matrix is n_row x n_col; slice q of B and E/H refers to
/// pair q of the endmember set.
struct AdmmState {
  Index n_row = 0;
  Index n_col = 0;
  std::vector<Mat> A, B;  ///< abundance / interaction maps
  std::vector<Mat> V, E;  ///< low-rank splitting copies
  std::vector<Mat> D, H;  ///< scaled multipliers for A = V and B = E
  Mat G;                  ///< multiplier for sum_i A_i = P
  Mat P;                  ///< all ones
  int iter = 0;

  /// Cold start: V = A, everything else zero. An empty init.B means zeros.
  static AdmmState from_init(const AbundanceState &init, Index interactions);

  AbundanceState abundances() const;
};

/// Precomputed quantities shared by all slice updates: the Gram matrix of the
/// stacked signatures W = [C M] and the correlation maps (Y x_3 W^T)_t.
/// Holds references; y and ems must outlive it.
class UnmixingProblem {
 public:
  UnmixingProblem(const Tensor3 &y, const EndmemberSet &ems);
  UnmixingProblem(Tensor3 &&, const EndmemberSet &) = delete;
  UnmixingProblem(const Tensor3 &, EndmemberSet &&) = delete;

  const Tensor3 &y() const noexcept { return y_; }
  const EndmemberSet &ems() const noexcept { return ems_; }
  const Mat &gram() const noexcept { return gram_; }
  /// sum_b Y(:, :, b) * w(b, t) for stacked signature column t.
  const Mat &correlation(Index t) const { return corr_[static_cast<std::size_t>(t)]; }

 private:
  const Tensor3 &y_;
  const EndmemberSet &ems_;
  Mat gram_;
  std::vector<Mat> corr_;
};

/// Closed-form minimiser of the augmented Lagrangian over A_i with all other
/// variables fixed:
///   (||c_i||^2 + 2 mu)^-1 (sum_b O_b c_bi + mu (V_i + D_i + P + G - A~)).
Mat update_A_slice(Index i, const AdmmState &state, const UnmixingProblem &problem,
                   const SolverConfig &cfg);

/// (||m_j||^2 + mu)^-1 (sum_b K_b m_bj + mu (E_j + H_j)).
Mat update_B_slice(Index j, const AdmmState &state, const UnmixingProblem &problem,
                   const SolverConfig &cfg);

/// Singular value soft-thresholding: the proximal operator of tau * ||.||_*.
Mat svt(const Mat &m, double tau);

Mat update_V(Index i, const AdmmState &state, const SolverConfig &cfg);
Mat update_E(Index j, const AdmmState &state, const SolverConfig &cfg);

/// D_i -= A_i - V_i;  H_j -= B_j - E_j;  G -= sum_i A_i - P.
void dual_updates(AdmmState &state);

/// A <- proj(A); B <- min(proj(B), A*) with A* recomputed from the new A.
void project(AdmmState &state, const PairIndex &pairs, Projection mode);

struct Residuals {
  double av = 0.0;
  double be = 0.0;
  double asc = 0.0;
};
Residuals primal_residuals(const AdmmState &state);

enum class StopReason { Continue, Converged, MaxIter };

/// Converged when |RE_k - RE_k-1| / max(RE_k-1, eps) < tol; MaxIter once the
/// trace holds max_iter entries.
StopReason check_convergence(const Trace &trace, const SolverConfig &cfg);

struct SolveResult {
  AbundanceState state;
  Trace trace;
  int iterations = 0;
  bool converged = false;
};

using IterationObserver = std::function<void(const AdmmState &, const Trace &)>;

/// Runs the ADMM loop from `init` (typically FCLS abundances, zero B).
/// Each sweep: A slices in order, B slices in order, V, E, then the duals.
/// `truth`, when given, adds an RMSE series to the trace.
SolveResult solve(const Tensor3 &y, const EndmemberSet &ems, const SolverConfig &cfg,
                  const AbundanceState &init, const Tensor3 *truth = nullptr,
                  const IterationObserver &observer = {});

}  // namespace lrntf
