// SPDX-License-Identifier: Apache-2.0
#include "lrntf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lrntf/error.hpp"

namespace lrntf {

namespace {

void require_same(const Tensor3 &a, const Tensor3 &b, const char *what) {
  if (!a.same_dims(b))
    throw ShapeError(std::string(what) + ": shape mismatch (" + std::to_string(a.n_row()) + "x" +
                     std::to_string(a.n_col()) + "x" + std::to_string(a.depth()) + " vs " +
                     std::to_string(b.n_row()) + "x" + std::to_string(b.n_col()) + "x" +
                     std::to_string(b.depth()) + ")");
}

double sq_diff(const Tensor3 &a, const Tensor3 &b) {
  auto x = a.values();
  auto y = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return s;
}

}  // namespace

double rmse(const Tensor3 &a_true, const Tensor3 &a_est) {
  require_same(a_true, a_est, "rmse");
  if (a_true.size() == 0) return 0.0;
  return std::sqrt(sq_diff(a_true, a_est) / static_cast<double>(a_true.size()));
}

Vec rmse_per_endmember(const Tensor3 &a_true, const Tensor3 &a_est) {
  require_same(a_true, a_est, "rmse_per_endmember");
  const auto diff = (a_true.pixel_matrix() - a_est.pixel_matrix()).eval();
  Vec out(a_true.depth());
  for (Index k = 0; k < out.size(); ++k)
    out(k) = std::sqrt(diff.col(k).squaredNorm() / static_cast<double>(a_true.pixels()));
  return out;
}

double re(const Tensor3 &y, const Tensor3 &y_hat) {
  require_same(y, y_hat, "re");
  if (y.size() == 0) return 0.0;
  return std::sqrt(sq_diff(y, y_hat) / static_cast<double>(y.size()));
}

AngleStats asam_stats(const Tensor3 &y, const Tensor3 &y_hat) {
  require_same(y, y_hat, "asam");
  AngleStats out;
  if (y.pixels() == 0) return out;
  const auto Y = y.pixel_matrix();
  const auto H = y_hat.pixel_matrix();
  double total = 0.0;
  for (Index p = 0; p < y.pixels(); ++p) {
    const double ny2 = Y.row(p).squaredNorm();
    const double nh2 = H.row(p).squaredNorm();
    if (ny2 == 0.0 || nh2 == 0.0) {
      ++out.degenerate;
      if (ny2 != nh2) total += std::numbers::pi / 2.0;
      continue;
    }
    // One square root keeps cos exactly 1 when y_hat is a power-of-two multiple of y.
    const double cosine = std::clamp(Y.row(p).dot(H.row(p)) / std::sqrt(ny2 * nh2), -1.0, 1.0);
    total += std::acos(cosine);
  }
  out.mean = total / static_cast<double>(y.pixels());
  return out;
}

double asam(const Tensor3 &y, const Tensor3 &y_hat) { return asam_stats(y, y_hat).mean; }

Mat error_map(const Tensor3 &y, const Tensor3 &y_hat) {
  require_same(y, y_hat, "error_map");
  Mat out(y.n_row(), y.n_col());
  for (Index r = 0; r < y.n_row(); ++r)
    for (Index c = 0; c < y.n_col(); ++c) {
      double s = 0.0;
      for (Index l = 0; l < y.depth(); ++l) {
        const double d = y(r, c, l) - y_hat(r, c, l);
        s += d * d;
      }
      out(r, c) = y.depth() ? std::sqrt(s / static_cast<double>(y.depth())) : 0.0;
    }
  return out;
}

RankProfile rank_profile(const Mat &m, double energy, EnergyMode mode) {
  if (!(energy > 0.0 && energy <= 1.0)) throw ConfigError("rank_profile: energy must be in (0, 1]");
  const Svd svd = thin_svd(m);
  RankProfile out;
  out.singulars = svd.s;
  const Index n = svd.s.size();
  const Vec w = mode == EnergyMode::Sigma ? svd.s : svd.s.cwiseAbs2().eval();
  const double total = w.sum();

  out.cum_energy.resize(n);
  double acc = 0.0;
  for (Index k = 0; k < n; ++k) {
    acc += w(k);
    out.cum_energy(k) = total > 0.0 ? acc / total : 1.0;
  }
  out.dim = n;
  for (Index k = 0; k < n; ++k)
    if (out.cum_energy(k) >= energy) {
      out.dim = total > 0.0 ? k + 1 : 0;
      break;
    }

  // Peel off one rank-1 term at a time; the residual norm is the truncation error.
  out.approx_error.resize(n);
  Mat residual = m;
  for (Index k = 0; k < n; ++k) {
    residual.noalias() -= svd.s(k) * svd.U.col(k) * svd.Z.col(k).transpose();
    out.approx_error(k) = residual.norm();
  }
  return out;
}

LowRank lowrank_approx(const Mat &m, Index k) {
  const Index p = std::min(m.rows(), m.cols());
  if (k < 1 || k > p)
    throw IndexError("lowrank_approx: rank " + std::to_string(k) + " outside [1, " +
                     std::to_string(p) + "]");
  const Svd svd = thin_svd(m);
  LowRank out;
  out.approx = svd.U.leftCols(k) * svd.s.head(k).asDiagonal() * svd.Z.leftCols(k).transpose();
  out.diff = m - out.approx;
  return out;
}

}  // namespace lrntf
