// SPDX-License-Identifier: Apache-2.0
#include "lrntf/gbm.hpp"

#include <string>

#include "lrntf/error.hpp"

namespace lrntf {

PairIndex make_pair_index(Index endmembers) {
  PairIndex pairs;
  pairs.reserve(static_cast<std::size_t>(endmembers * (endmembers - 1) / 2));
  for (Index i = 0; i < endmembers; ++i)
    for (Index j = i + 1; j < endmembers; ++j) pairs.emplace_back(i, j);
  return pairs;
}

Interactions build_interactions(const Mat &C) {
  if (C.cols() < 2)
    throw ConfigError("build_interactions: need at least 2 endmembers, got " +
                      std::to_string(C.cols()));
  Interactions out{Mat(C.rows(), C.cols() * (C.cols() - 1) / 2), make_pair_index(C.cols())};
  for (std::size_t q = 0; q < out.pairs.size(); ++q) {
    const auto [i, j] = out.pairs[q];
    out.M.col(static_cast<Index>(q)) = C.col(i).cwiseProduct(C.col(j));
  }
  return out;
}

EndmemberSet::EndmemberSet(Mat C, std::vector<std::string> names)
    : C_{std::move(C)}, names_{std::move(names)} {
  if (!C_.allFinite()) throw ValidationError("endmember matrix has non-finite entries");
  if ((C_.array() < 0.0).any()) throw ValidationError("endmember matrix has negative entries");
  auto inter = build_interactions(C_);
  M_ = std::move(inter.M);
  pairs_ = std::move(inter.pairs);
  if (names_.empty()) {
    for (Index k = 0; k < C_.cols(); ++k) names_.push_back("em_" + std::to_string(k));
  } else if (static_cast<Index>(names_.size()) != C_.cols()) {
    throw ShapeError("endmember names: got " + std::to_string(names_.size()) + " for " +
                     std::to_string(C_.cols()) + " columns");
  }
}

Tensor3 forward(const AbundanceState &state, const EndmemberSet &ems) {
  const auto &A = state.A;
  const auto &B = state.B;
  if (A.depth() != ems.count())
    throw ShapeError("forward: abundance depth " + std::to_string(A.depth()) + " vs " +
                     std::to_string(ems.count()) + " endmembers");
  if (B.depth() != ems.interactions() || B.n_row() != A.n_row() || B.n_col() != A.n_col())
    throw ShapeError("forward: interaction cube does not match abundance cube / pair count");
  Tensor3 y(A.n_row(), A.n_col(), ems.bands());
  auto Y = y.pixel_matrix();
  Y.noalias() = A.pixel_matrix() * ems.C().transpose();
  Y.noalias() += B.pixel_matrix() * ems.M().transpose();
  return y;
}

Tensor3 interaction_bound(const Tensor3 &A, const PairIndex &pairs) {
  Tensor3 out(A.n_row(), A.n_col(), static_cast<Index>(pairs.size()));
  for (const auto &[i, j] : pairs)
    if (i < 0 || j < 0 || i >= A.depth() || j >= A.depth())
      throw ShapeError("interaction_bound: pair index exceeds abundance depth");
  const auto a = A.pixel_matrix();
  auto o = out.pixel_matrix();
  for (Index p = 0; p < A.pixels(); ++p)
    for (std::size_t q = 0; q < pairs.size(); ++q)
      o(p, static_cast<Index>(q)) = a(p, pairs[q].first) * a(p, pairs[q].second);
  return out;
}

}  // namespace lrntf
