// SPDX-License-Identifier: Apache-2.0
#include "lrntf/fcls.hpp"

#include <cmath>
#include <vector>

namespace lrntf {

void FclsConfig::validate() const {
  if (max_iter <= 0) throw ConfigError("fcls: max_iter must be positive");
  if (!(tol > 0.0)) throw ConfigError("fcls: tol must be positive");
  if (!(asc_weight > 0.0) || !std::isfinite(asc_weight))
    throw ConfigError("fcls: asc_weight must be positive and finite");
}

Fcls::Fcls(const Mat &C, FclsConfig cfg) : C_{C}, cfg_{cfg} {
  cfg_.validate();
  if (C_.cols() < 1) throw ConfigError("fcls: empty endmember matrix");
  E_.resize(C_.rows() + 1, C_.cols());
  E_.row(0).setConstant(cfg_.asc_weight);
  E_.bottomRows(C_.rows()) = C_;
}

namespace {

// Least squares restricted to the passive columns; zero elsewhere.
Vec passive_ls(const Mat &E, const Vec &f, const std::vector<bool> &passive) {
  std::vector<Index> cols;
  for (Index j = 0; j < static_cast<Index>(passive.size()); ++j)
    if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
  Vec z = Vec::Zero(E.cols());
  if (cols.empty()) return z;
  Mat Ep(E.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) Ep.col(static_cast<Index>(k)) = E.col(cols[k]);
  const Vec zp = Ep.colPivHouseholderQr().solve(f);
  for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = zp(static_cast<Index>(k));
  return z;
}

}  // namespace

Vec Fcls::solve(const Eigen::Ref<const Vec> &y) const {
  if (y.size() != C_.rows())
    throw ShapeError("fcls: spectrum has " + std::to_string(y.size()) + " bands, library has " +
                     std::to_string(C_.rows()));
  if (!y.allFinite()) throw DomainError("fcls: spectrum has non-finite entries");

  const Index R = C_.cols();
  Vec f(E_.rows());
  f(0) = cfg_.asc_weight;
  f.tail(C_.rows()) = y;

  const double scale = std::max(1.0, (E_.transpose() * f).cwiseAbs().maxCoeff());
  const double kkt_tol = cfg_.tol * scale;

  Vec a = Vec::Zero(R);
  std::vector<bool> passive(static_cast<std::size_t>(R), false);
  Vec w = E_.transpose() * (f - E_ * a);

  for (int iter = 0;; ++iter) {
    // Dual feasibility on the active set: the KKT conditions hold.
    Index best = -1;
    double best_w = kkt_tol;
    for (Index j = 0; j < R; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) break;
    if (iter >= cfg_.max_iter)
      throw FclsError("fcls: no convergence after " + std::to_string(cfg_.max_iter) +
                          " iterations (max dual violation " + std::to_string(best_w) + ")",
                      a);
    passive[static_cast<std::size_t>(best)] = true;

    for (;;) {
      Vec z = passive_ls(E_, f, passive);
      bool feasible = true;
      for (Index j = 0; j < R; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      if (feasible) {
        a = z;
        break;
      }
      // Step back towards a until the first passive variable hits zero.
      double alpha = 1.0;
      for (Index j = 0; j < R; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0)
          alpha = std::min(alpha, a(j) / (a(j) - z(j)));
      a += alpha * (z - a);
      for (Index j = 0; j < R; ++j)
        if (passive[static_cast<std::size_t>(j)] && a(j) <= 1e-15) {
          passive[static_cast<std::size_t>(j)] = false;
          a(j) = 0.0;
        }
    }
    w = E_.transpose() * (f - E_ * a);
  }
  return polish(y, a);
}

Vec Fcls::polish(const Eigen::Ref<const Vec> &y, const Vec &a) const {
  std::vector<Index> support;
  for (Index j = 0; j < a.size(); ++j)
    if (a(j) > 0.0) support.push_back(j);
  if (support.empty()) return a;
  const auto n = static_cast<Index>(support.size());
  Mat Cs(C_.rows(), n);
  for (Index k = 0; k < n; ++k) Cs.col(k) = C_.col(support[static_cast<std::size_t>(k)]);

  // [Cs^T Cs  1; 1^T 0] [x; nu] = [Cs^T y; 1]
  Mat K = Mat::Zero(n + 1, n + 1);
  K.topLeftCorner(n, n) = Cs.transpose() * Cs;
  K.topRightCorner(n, 1).setOnes();
  K.bottomLeftCorner(1, n).setOnes();
  Vec rhs(n + 1);
  rhs.head(n) = Cs.transpose() * y;
  rhs(n) = 1.0;
  const Vec sol = K.fullPivLu().solve(rhs);
  if (!sol.allFinite() || (sol.head(n).array() < 0.0).any()) return a;

  Vec out = Vec::Zero(a.size());
  for (Index k = 0; k < n; ++k) out(support[static_cast<std::size_t>(k)]) = sol(k);
  return out;
}

Vec fcls_pixel(const Vec &y, const Mat &C, const FclsConfig &cfg) { return Fcls(C, cfg).solve(y); }

Tensor3 fcls_cube(const Tensor3 &y, const Mat &C, const FclsConfig &cfg) {
  if (y.depth() != C.rows())
    throw ShapeError("fcls_cube: cube has " + std::to_string(y.depth()) + " bands, library has " +
                     std::to_string(C.rows()));
  const Fcls solver(C, cfg);
  Tensor3 A(y.n_row(), y.n_col(), C.cols());
  const auto Y = y.pixel_matrix();
  auto out = A.pixel_matrix();
  for (Index p = 0; p < y.pixels(); ++p) {
    const Vec spectrum = Y.row(p).transpose();
    try {
      out.row(p) = solver.solve(spectrum).transpose();
    } catch (const FclsError &e) {
      throw FclsError(std::string(e.what()) + " at pixel (" + std::to_string(p / y.n_col()) +
                          ", " + std::to_string(p % y.n_col()) + ")",
                      e.best());
    } catch (const Error &e) {
      throw Error(e.kind(), std::string(e.what()) + " at pixel (" +
                                std::to_string(p / y.n_col()) + ", " +
                                std::to_string(p % y.n_col()) + ")");
    }
  }
  return A;
}

}  // namespace lrntf
