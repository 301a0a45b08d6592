// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lrntf/tensor.hpp"

namespace lrntf {

/// Endmember pairs (i, j), i < j, in lexicographic order. Column q of the
/// interaction matrix and slice q of the interaction cube both refer to
/// pairs[q].
using PairIndex = std::vector<std::pair<Index, Index>>;

PairIndex make_pair_index(Index endmembers);

struct Interactions {
  Mat M;  ///< bands x R(R-1)/2, column q = c_i .* c_j for pairs[q]
  PairIndex pairs;
};

/// Hadamard products of every endmember pair. Throws ConfigError for R < 2.
Interactions build_interactions(const Mat &C);

/// Endmember signatures plus the derived interaction endmembers.
class EndmemberSet {
 public:
  EndmemberSet() = default;
  /// Names default to "em_<k>" when empty. Throws ValidationError on negative
  /// reflectances and ConfigError when fewer than two endmembers are given.
  explicit EndmemberSet(Mat C, std::vector<std::string> names = {});

  const Mat &C() const noexcept { return C_; }
  const Mat &M() const noexcept { return M_; }
  const PairIndex &pairs() const noexcept { return pairs_; }
  const std::vector<std::string> &names() const noexcept { return names_; }

  Index bands() const noexcept { return C_.rows(); }
  Index count() const noexcept { return C_.cols(); }
  Index interactions() const noexcept { return M_.cols(); }

 private:
  Mat C_;
  Mat M_;
  PairIndex pairs_;
  std::vector<std::string> names_;
};

/// Abundance cube A (n_row x n_col x R) and interaction cube B
/// (n_row x n_col x R(R-1)/2).
struct AbundanceState {
  Tensor3 A;
  Tensor3 B;
};

/// Noise-free GBM synthesis: sum_i A_i o c_i + sum_q B_q o m_q.
Tensor3 forward(const AbundanceState &state, const EndmemberSet &ems);

/// Upper bound on the interaction abundances: A*(r, c, q) = A(r, c, i) * A(r, c, j)
/// for (i, j) = pairs[q].
Tensor3 interaction_bound(const Tensor3 &A, const PairIndex &pairs);

}  // namespace lrntf
