// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lrntf/error.hpp"
#include "lrntf/tensor.hpp"
#include "oracles.hpp"

using namespace lrntf;

TEST(Tensor3, LayoutIsRowColDepth) {
  Tensor3 t(2, 3, 4);
  t(1, 2, 3) = 7.0;
  EXPECT_EQ(t.data()[(1 * 3 + 2) * 4 + 3], 7.0);
  EXPECT_EQ(t.size(), 24);
  EXPECT_EQ(t.pixel_matrix()(1 * 3 + 2, 3), 7.0);
}

TEST(Slice, ConstantDepthIndexGivesOnes) {
  Tensor3 t(2, 2, 3);
  for (Index r = 0; r < 2; ++r)
    for (Index c = 0; c < 2; ++c)
      for (Index k = 0; k < 3; ++k) t(r, c, k) = static_cast<double>(k);
  EXPECT_EQ(slice(t, 1), Mat::Ones(2, 2));
}

TEST(Slice, OutOfRangeThrowsIndexError) {
  Tensor3 t(2, 2, 3);
  EXPECT_THROW(slice(t, 3), IndexError);
  EXPECT_THROW(slice(t, -1), IndexError);
}

TEST(Slice, IsACopy) {
  Tensor3 t(2, 2, 2, 1.0);
  Mat s = slice(t, 0);
  s(0, 0) = 5.0;
  EXPECT_EQ(t(0, 0, 0), 1.0);
}

TEST(Slice, ReassemblyReproducesTensor) {
  std::mt19937_64 rng(3);
  const Tensor3 t = oracle::random_tensor(rng, 4, 5, 6);
  std::vector<Mat> parts;
  for (Index k = 0; k < 6; ++k) parts.push_back(slice(t, k));
  EXPECT_EQ(stack_slices(parts), t);

  Tensor3 u(4, 5, 6);
  for (Index k = 0; k < 6; ++k) set_slice(u, k, parts[static_cast<std::size_t>(k)]);
  EXPECT_EQ(u, t);
}

TEST(Mode3, IdentityIsExact) {
  std::mt19937_64 rng(4);
  const Tensor3 t = oracle::random_tensor(rng, 3, 4, 5);
  EXPECT_EQ(mode3_product(t, Mat::Identity(5, 5)), t);
}

TEST(Mode3, HandComputedFiber) {
  Tensor3 t(1, 1, 2);
  t(0, 0, 0) = 1;
  t(0, 0, 1) = 2;
  Mat x(1, 2);
  x << 3, 4;
  const Tensor3 out = mode3_product(t, x);
  ASSERT_EQ(out.depth(), 1);
  EXPECT_EQ(out(0, 0, 0), 11.0);
}

TEST(Mode3, MatchesTripleLoop) {
  std::mt19937_64 rng(5);
  const Tensor3 t = oracle::random_tensor(rng, 3, 3, 4);
  const Mat x = oracle::random_mat(rng, 5, 4);
  const Tensor3 got = mode3_product(t, x), want = oracle::mode3_loop(t, x);
  EXPECT_LE(std::sqrt(oracle::sq_diff_sum(got, want)), 1e-12);
}

TEST(Mode3, ShapeMismatchThrows) {
  EXPECT_THROW(mode3_product(Tensor3(2, 2, 3), Mat::Ones(2, 4)), ShapeError);
}

TEST(Mode3, LinearInBothArguments) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = oracle::uniform_index(rng, 1, 8), j = oracle::uniform_index(rng, 1, 6);
    const Tensor3 t = oracle::random_tensor(rng, 3, 4, d), u = oracle::random_tensor(rng, 3, 4, d);
    const Mat X = oracle::random_mat(rng, j, d), W = oracle::random_mat(rng, j, d);
    const double a = 0.7, b = -1.3;

    const Tensor3 lhs = mode3_product(t, a * X + b * W);
    Tensor3 rhs = mode3_product(t, X);
    rhs.pixel_matrix() = a * rhs.pixel_matrix() + b * mode3_product(t, W).pixel_matrix();
    EXPECT_LE(std::sqrt(oracle::sq_diff_sum(lhs, rhs)), 1e-12 * std::sqrt(frob_norm_sq(lhs)) + 1e-15);

    Tensor3 sum(3, 4, d);
    sum.pixel_matrix() = a * t.pixel_matrix() + b * u.pixel_matrix();
    Tensor3 rhs2 = mode3_product(t, X);
    rhs2.pixel_matrix() = a * rhs2.pixel_matrix() + b * mode3_product(u, X).pixel_matrix();
    const Tensor3 lhs2 = mode3_product(sum, X);
    EXPECT_LE(std::sqrt(oracle::sq_diff_sum(lhs2, rhs2)), 1e-12 * std::sqrt(frob_norm_sq(lhs2)) + 1e-15);
  }
}

TEST(OuterAccumulate, ZeroVectorLeavesAccUnchanged) {
  Tensor3 acc(2, 2, 3, 0.5);
  const Tensor3 before = acc;
  outer_accumulate(acc, Mat::Ones(2, 2), Vec::Zero(3));
  EXPECT_EQ(acc, before);
}

TEST(OuterAccumulate, HandComputed) {
  Tensor3 acc(2, 2, 1);
  Mat a(2, 2);
  a << 1, 2, 3, 4;
  outer_accumulate(acc, a, Vec::Constant(1, 10.0));
  Mat want(2, 2);
  want << 10, 20, 30, 40;
  EXPECT_EQ(slice(acc, 0), want);
}

TEST(OuterAccumulate, ShapeMismatchThrows) {
  Tensor3 acc(2, 2, 3);
  EXPECT_THROW(outer_accumulate(acc, Mat::Ones(3, 2), Vec::Ones(3)), ShapeError);
  EXPECT_THROW(outer_accumulate(acc, Mat::Ones(2, 2), Vec::Ones(4)), ShapeError);
}

TEST(OuterAccumulate, SumOfOuterProductsEqualsMode3) {
  std::mt19937_64 rng(7);
  const Tensor3 A = oracle::random_tensor(rng, 5, 4, 3);
  const Mat C = oracle::random_mat(rng, 9, 3);
  Tensor3 acc(5, 4, 9);
  for (Index i = 0; i < 3; ++i) outer_accumulate(acc, slice(A, i), C.col(i));
  const Tensor3 want = mode3_product(A, C);
  EXPECT_LE(std::sqrt(oracle::sq_diff_sum(acc, want)), 1e-12 * std::sqrt(frob_norm_sq(want)));
}

TEST(FrobNormSq, Basics) {
  EXPECT_EQ(frob_norm_sq(Tensor3(3, 3, 3)), 0.0);
  Tensor3 t(1, 1, 2);
  t(0, 0, 0) = 3;
  t(0, 0, 1) = 4;
  EXPECT_EQ(frob_norm_sq(t), 25.0);
}

TEST(FrobNormSq, EqualsSumOverSlices) {
  std::mt19937_64 rng(8);
  const Tensor3 t = oracle::random_tensor(rng, 6, 5, 7);
  double s = 0.0;
  for (Index k = 0; k < 7; ++k) s += slice(t, k).squaredNorm();
  EXPECT_NEAR(frob_norm_sq(t), s, 1e-12 * s);
}

TEST(ThinSvd, Diagonal) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 1;
  m(1, 1) = 3;
  const Svd f = thin_svd(m);
  EXPECT_NEAR(f.s(0), 3.0, 1e-14);
  EXPECT_NEAR(f.s(1), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(f.U(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(f.Z(1, 0)), 1.0, 1e-14);
}

TEST(ThinSvd, RankOne) {
  std::mt19937_64 rng(9);
  const Vec u = oracle::random_mat(rng, 6, 1).col(0).normalized();
  const Vec v = oracle::random_mat(rng, 4, 1).col(0).normalized();
  const Svd f = thin_svd(u * v.transpose());
  EXPECT_NEAR(f.s(0), 1.0, 1e-12);
  for (Index k = 1; k < f.s.size(); ++k) EXPECT_LE(f.s(k), 1e-12);
}

TEST(ThinSvd, NonFiniteThrows) {
  Mat m = Mat::Ones(3, 3);
  m(1, 1) = NAN;
  EXPECT_THROW(thin_svd(m), DomainError);
  m(1, 1) = INFINITY;
  EXPECT_THROW(thin_svd(m), DomainError);
}

TEST(ThinSvd, RandomMatricesSatisfyInvariants) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index r = oracle::uniform_index(rng, 1, 20), c = oracle::uniform_index(rng, 1, 20);
    Mat m = oracle::random_mat(rng, r, c);
    if (trial % 10 == 0) {  // rank-deficient
      const Index k = oracle::uniform_index(rng, 1, std::min(r, c));
      m = oracle::random_mat(rng, r, k) * oracle::random_mat(rng, k, c);
    }
    const Svd f = thin_svd(m);
    const Index p = std::min(r, c);
    ASSERT_EQ(f.s.size(), p);
    ASSERT_EQ(f.U.cols(), p);
    ASSERT_EQ(f.Z.cols(), p);
    const double scale = std::max(m.norm(), 1.0);
    EXPECT_LE((f.U * f.s.asDiagonal() * f.Z.transpose() - m).norm(), 1e-10 * scale);
    EXPECT_LE((f.U.transpose() * f.U - Mat::Identity(p, p)).norm(), 1e-10);
    EXPECT_LE((f.Z.transpose() * f.Z - Mat::Identity(p, p)).norm(), 1e-10);
    for (Index k = 0; k < p; ++k) {
      EXPECT_GE(f.s(k), 0.0);
      if (k > 0) EXPECT_LE(f.s(k), f.s(k - 1));
    }
  }
}

TEST(ThinSvd, SingularValuesAgreeWithJacobiOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat m = oracle::random_mat(rng, oracle::uniform_index(rng, 1, 12), oracle::uniform_index(rng, 1, 12));
    const Vec s = thin_svd(m).s, want = oracle::jacobi_svd(m).s;
    EXPECT_LE((s - want).norm(), 1e-12 * std::max(1.0, want.norm()));
  }
}
