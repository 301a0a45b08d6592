// SPDX-License-Identifier: Apache-2.0
#include "lrntf/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lrntf/error.hpp"
#include "lrntf/metrics.hpp"

namespace lrntf {

void SolverConfig::validate() const {
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) throw ConfigError("solver: lambda1 must be >= 0");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw ConfigError("solver: lambda2 must be >= 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("solver: mu must be > 0");
  if (max_iter < 0) throw ConfigError("solver: max_iter must be >= 0");
  if (!(tol >= 0.0)) throw ConfigError("solver: tol must be >= 0");
}

const char *to_string(Projection p) noexcept { return p == Projection::Abs ? "abs" : "clamp"; }

const char *to_string(ProjectionSchedule s) noexcept {
  return s == ProjectionSchedule::PerSlice ? "per_slice" : "per_sweep";
}

Projection parse_projection(const std::string &name) {
  if (name == "abs") return Projection::Abs;
  if (name == "clamp") return Projection::Clamp;
  throw ConfigError("unknown projection '" + name + "' (expected abs or clamp)");
}

ProjectionSchedule parse_schedule(const std::string &name) {
  if (name == "per_slice") return ProjectionSchedule::PerSlice;
  if (name == "per_sweep") return ProjectionSchedule::PerSweep;
  throw ConfigError("unknown projection schedule '" + name + "' (expected per_slice or per_sweep)");
}

AdmmState AdmmState::from_init(const AbundanceState &init, Index interactions) {
  AdmmState s;
  s.n_row = init.A.n_row();
  s.n_col = init.A.n_col();
  const Mat zero = Mat::Zero(s.n_row, s.n_col);
  for (Index i = 0; i < init.A.depth(); ++i) s.A.push_back(slice(init.A, i));
  if (init.B.size() == 0) {
    s.B.assign(static_cast<std::size_t>(interactions), zero);
  } else {
    for (Index j = 0; j < init.B.depth(); ++j) s.B.push_back(slice(init.B, j));
  }
  s.V = s.A;
  s.E.assign(s.B.size(), zero);
  s.D.assign(s.A.size(), zero);
  s.H.assign(s.B.size(), zero);
  s.G = zero;
  s.P = Mat::Ones(s.n_row, s.n_col);
  return s;
}

AbundanceState AdmmState::abundances() const {
  AbundanceState out{stack_slices(A), stack_slices(B)};
  if (B.empty()) out.B = Tensor3(n_row, n_col, 0);
  return out;
}

UnmixingProblem::UnmixingProblem(const Tensor3 &y, const EndmemberSet &ems) : y_{y}, ems_{ems} {
  if (y.depth() != ems.bands())
    throw ShapeError("cube has " + std::to_string(y.depth()) + " bands, endmembers have " +
                     std::to_string(ems.bands()));
  Mat W(ems.bands(), ems.count() + ems.interactions());
  W << ems.C(), ems.M();
  gram_ = W.transpose() * W;
  const Mat corr = y.pixel_matrix() * W;  // pixels x (R + K), column-major
  corr_.reserve(static_cast<std::size_t>(W.cols()));
  for (Index t = 0; t < W.cols(); ++t)
    corr_.emplace_back(Eigen::Map<const RowMat>(corr.col(t).data(), y.n_row(), y.n_col()));
}

namespace {

const Mat &stacked(const AdmmState &s, Index t) {
  const auto R = static_cast<Index>(s.A.size());
  return t < R ? s.A[static_cast<std::size_t>(t)] : s.B[static_cast<std::size_t>(t - R)];
}

// sum_b X_b w(b, t) where X is the residual with component t removed.
Mat partial_correlation(Index t, const AdmmState &s, const UnmixingProblem &problem) {
  const Mat &Q = problem.gram();
  Mat g = problem.correlation(t);
  for (Index u = 0; u < Q.rows(); ++u)
    if (u != t) g.noalias() -= Q(u, t) * stacked(s, u);
  return g;
}

void check_consistent(const AdmmState &s, const UnmixingProblem &problem) {
  const auto &ems = problem.ems();
  if (static_cast<Index>(s.A.size()) != ems.count() ||
      static_cast<Index>(s.B.size()) != ems.interactions())
    throw ShapeError("ADMM state does not match the endmember set");
  if (s.n_row != problem.y().n_row() || s.n_col != problem.y().n_col())
    throw ShapeError("ADMM state does not match the cube dimensions");
}

void apply(Mat &m, Projection mode) {
  if (mode == Projection::Abs)
    m = m.cwiseAbs();
  else
    m = m.cwiseMax(0.0);
}

}  // namespace

Mat update_A_slice(Index i, const AdmmState &state, const UnmixingProblem &problem,
                   const SolverConfig &cfg) {
  check_consistent(state, problem);
  if (i < 0 || i >= static_cast<Index>(state.A.size())) throw IndexError("update_A_slice: bad index");
  const auto k = static_cast<std::size_t>(i);
  Mat others = Mat::Zero(state.n_row, state.n_col);
  for (std::size_t u = 0; u < state.A.size(); ++u)
    if (u != k) others += state.A[u];
  const double mu = cfg.mu;
  Mat rhs = partial_correlation(i, state, problem);
  rhs += mu * (state.V[k] + state.D[k] + state.P + state.G - others);
  return rhs / (problem.gram()(i, i) + 2.0 * mu);
}

Mat update_B_slice(Index j, const AdmmState &state, const UnmixingProblem &problem,
                   const SolverConfig &cfg) {
  check_consistent(state, problem);
  if (j < 0 || j >= static_cast<Index>(state.B.size())) throw IndexError("update_B_slice: bad index");
  const auto k = static_cast<std::size_t>(j);
  const Index t = static_cast<Index>(state.A.size()) + j;
  const double mu = cfg.mu;
  Mat rhs = partial_correlation(t, state, problem);
  rhs += mu * (state.E[k] + state.H[k]);
  return rhs / (problem.gram()(t, t) + mu);
}

Mat svt(const Mat &m, double tau) {
  if (!(tau >= 0.0)) throw ConfigError("svt: threshold must be >= 0");
  if (!m.allFinite()) throw DomainError("svt: matrix has non-finite entries");
  if (tau == 0.0) return m;
  const Svd svd = thin_svd(m);
  Index keep = 0;
  while (keep < svd.s.size() && svd.s(keep) > tau) ++keep;
  if (keep == 0) return Mat::Zero(m.rows(), m.cols());
  const Vec shrunk = svd.s.head(keep).array() - tau;
  return svd.U.leftCols(keep) * shrunk.asDiagonal() * svd.Z.leftCols(keep).transpose();
}

Mat update_V(Index i, const AdmmState &state, const SolverConfig &cfg) {
  const auto k = static_cast<std::size_t>(i);
  return svt(state.A.at(k) - state.D.at(k), cfg.lambda1 / cfg.mu);
}

Mat update_E(Index j, const AdmmState &state, const SolverConfig &cfg) {
  const auto k = static_cast<std::size_t>(j);
  return svt(state.B.at(k) - state.H.at(k), cfg.lambda2 / cfg.mu);
}

void dual_updates(AdmmState &state) {
  Mat total = Mat::Zero(state.n_row, state.n_col);
  for (std::size_t i = 0; i < state.A.size(); ++i) {
    state.D[i] -= state.A[i] - state.V[i];
    total += state.A[i];
  }
  for (std::size_t j = 0; j < state.B.size(); ++j) state.H[j] -= state.B[j] - state.E[j];
  state.G -= total - state.P;
}

void project(AdmmState &state, const PairIndex &pairs, Projection mode) {
  if (pairs.size() != state.B.size()) throw ShapeError("project: pair index does not match B");
  for (auto &a : state.A) apply(a, mode);
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    apply(state.B[q], mode);
    state.B[q] = state.B[q].cwiseMin(
        state.A[static_cast<std::size_t>(i)].cwiseProduct(state.A[static_cast<std::size_t>(j)]));
  }
}

Residuals primal_residuals(const AdmmState &state) {
  Residuals r;
  Mat total = Mat::Zero(state.n_row, state.n_col);
  for (std::size_t i = 0; i < state.A.size(); ++i) {
    r.av += (state.A[i] - state.V[i]).squaredNorm();
    total += state.A[i];
  }
  for (std::size_t j = 0; j < state.B.size(); ++j) r.be += (state.B[j] - state.E[j]).squaredNorm();
  r.av = std::sqrt(r.av);
  r.be = std::sqrt(r.be);
  r.asc = (total - state.P).norm() / state.P.norm();
  return r;
}

StopReason check_convergence(const Trace &trace, const SolverConfig &cfg) {
  const std::size_t n = trace.re.size();
  if (n >= 2) {
    const double prev = trace.re[n - 2];
    const double change = std::abs(trace.re[n - 1] - prev) /
                          std::max(prev, std::numeric_limits<double>::epsilon());
    if (change < cfg.tol) return StopReason::Converged;
  }
  if (n >= static_cast<std::size_t>(cfg.max_iter)) return StopReason::MaxIter;
  return StopReason::Continue;
}

SolveResult solve(const Tensor3 &y, const EndmemberSet &ems, const SolverConfig &cfg,
                  const AbundanceState &init, const Tensor3 *truth,
                  const IterationObserver &observer) {
  cfg.validate();
  if (!y.pixel_matrix().allFinite()) throw DomainError("solve: cube has non-finite entries");
  if (init.A.n_row() != y.n_row() || init.A.n_col() != y.n_col() || init.A.depth() != ems.count())
    throw ShapeError("solve: initial abundances do not match cube / endmembers");
  if (init.B.size() != 0 && (init.B.n_row() != y.n_row() || init.B.n_col() != y.n_col() ||
                             init.B.depth() != ems.interactions()))
    throw ShapeError("solve: initial interaction cube does not match cube / pair count");
  if (truth && !truth->same_dims(init.A))
    throw ShapeError("solve: ground-truth abundances do not match the abundance cube");

  const UnmixingProblem problem(y, ems);
  AdmmState s = AdmmState::from_init(init, ems.interactions());
  SolveResult result;
  if (cfg.max_iter == 0) {
    result.state = s.abundances();
    return result;
  }

  const auto &pairs = ems.pairs();
  const bool per_slice = cfg.schedule == ProjectionSchedule::PerSlice;
  const auto R = static_cast<Index>(s.A.size());
  const auto K = static_cast<Index>(s.B.size());
  Trace &trace = result.trace;

  for (;;) {
    for (Index i = 0; i < R; ++i) {
      auto &a = s.A[static_cast<std::size_t>(i)];
      a = update_A_slice(i, s, problem, cfg);
      if (per_slice) apply(a, cfg.projection);
    }
    if (!per_slice)
      for (auto &a : s.A) apply(a, cfg.projection);

    for (Index j = 0; j < K; ++j) {
      auto &b = s.B[static_cast<std::size_t>(j)];
      b = update_B_slice(j, s, problem, cfg);
      if (per_slice) {
        const auto [p, q] = pairs[static_cast<std::size_t>(j)];
        apply(b, cfg.projection);
        b = b.cwiseMin(s.A[static_cast<std::size_t>(p)].cwiseProduct(s.A[static_cast<std::size_t>(q)]));
      }
    }
    if (!per_slice) project(s, pairs, cfg.projection);

    for (Index i = 0; i < R; ++i) s.V[static_cast<std::size_t>(i)] = update_V(i, s, cfg);
    for (Index j = 0; j < K; ++j) s.E[static_cast<std::size_t>(j)] = update_E(j, s, cfg);
    dual_updates(s);
    ++s.iter;

    const AbundanceState current = s.abundances();
    const Tensor3 y_hat = forward(current, ems);
    const double err = re(y, y_hat);
    if (!std::isfinite(err))
      throw SolverError("solve: iterate became non-finite at iteration " + std::to_string(s.iter));
    trace.re.push_back(err);
    if (cfg.record_trace) {
      const Residuals r = primal_residuals(s);
      trace.data_term.push_back(0.5 * err * err * static_cast<double>(y.size()));
      trace.res_av.push_back(r.av);
      trace.res_be.push_back(r.be);
      trace.res_asc.push_back(r.asc);
      if (truth) trace.rmse.push_back(rmse(*truth, current.A));
    }
    if (observer) observer(s, trace);

    const StopReason stop = check_convergence(trace, cfg);
    if (stop != StopReason::Continue) {
      result.converged = stop == StopReason::Converged;
      result.state = current;
      break;
    }
  }
  result.iterations = s.iter;
  return result;
}

}  // namespace lrntf
