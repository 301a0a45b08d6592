// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "lrntf/error.hpp"
#include "lrntf/experiment.hpp"
#include "lrntf/fcls.hpp"
#include "lrntf/gbm.hpp"
#include "lrntf/metrics.hpp"
#include "lrntf/synthgen.hpp"
#include "oracles.hpp"

using namespace lrntf;

namespace {

Mat library(Index R) { return load_spectral_library(default_library_path()).C.leftCols(R); }

void expect_on_simplex(const Vec &a) {
  EXPECT_GE(a.minCoeff(), 0.0);
  EXPECT_NEAR(a.sum(), 1.0, 1e-6);
}

}  // namespace

TEST(Fcls, PurePixelIsOneHot) {
  const Mat C = library(6);
  for (Index k = 0; k < 6; ++k) {
    const Vec a = fcls_pixel(C.col(k), C);
    for (Index j = 0; j < 6; ++j) EXPECT_NEAR(a(j), j == k ? 1.0 : 0.0, 1e-9);
  }
}

TEST(Fcls, TwoEndmemberMixtureMatchesGridSearch) {
  const Mat C = library(2);
  const Vec y = 0.3 * C.col(0) + 0.7 * C.col(1);
  const Vec a = fcls_pixel(y, C);
  EXPECT_NEAR(a(0), 0.3, 1e-6);
  EXPECT_NEAR(a(1), 0.7, 1e-6);
  const Vec grid = oracle::simplex_grid_search(y, C, 1e-3);
  EXPECT_NEAR(a(0), grid(0), 1e-3);
}

TEST(Fcls, OrthogonalSpectrumStillFeasible) {
  Mat C = Mat::Zero(4, 2);
  C(0, 0) = 1.0;
  C(1, 1) = 1.0;
  Vec y = Vec::Zero(4);
  y(2) = 0.6;
  y(3) = 0.8;
  const Vec a = fcls_pixel(y, C);
  expect_on_simplex(a);
  // every point of the simplex leaves residual sqrt(||y||^2 + ||Ca||^2) >= ||y||
  const double resid = (y - C * a).norm();
  EXPECT_GE(resid, y.norm() - 1e-12);
  EXPECT_NEAR(resid, std::sqrt(1.0 + 0.5), 1e-6);  // a = (0.5, 0.5) is optimal
}

TEST(Fcls, RandomThreeEndmemberPixelsMatchGridSearch) {
  const Mat C = library(3);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int trial = 0; trial < 25; ++trial) {
    Vec a_true = oracle::random_mat(rng, 3, 1, 0, 1).col(0);
    a_true /= a_true.sum();
    Vec y = C * a_true;
    for (Index b = 0; b < y.size(); ++b) y(b) += noise(rng);
    const Vec a = fcls_pixel(y, C);
    expect_on_simplex(a);
    const Vec grid = oracle::simplex_grid_search(y, C, 1e-3);
    EXPECT_LE((a - grid).cwiseAbs().maxCoeff(), 2e-3) << "trial " << trial;
    // objective never worse than the grid optimum
    EXPECT_LE((y - C * a).squaredNorm(), (y - C * grid).squaredNorm() + 1e-12);
  }
}

TEST(Fcls, OutputAlwaysOnSimplex) {
  const Mat C = library(6);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec y = oracle::random_mat(rng, C.rows(), 1, -0.5, 1.5).col(0);
    expect_on_simplex(fcls_pixel(y, C));
  }
}

TEST(Fcls, NonConvergenceCarriesBestIterate) {
  FclsConfig cfg;
  cfg.max_iter = 1;
  const Mat C = library(6);
  const Vec y = C * Vec::Constant(6, 1.0 / 6.0);
  try {
    fcls_pixel(y, C, cfg);
    FAIL() << "expected FclsError";
  } catch (const FclsError &e) {
    EXPECT_EQ(e.best().size(), 6);
    EXPECT_EQ(e.kind(), ErrorKind::Solver);
  }
}

TEST(Fcls, ConfigAndInputValidation) {
  FclsConfig cfg;
  cfg.tol = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  const Mat C = library(3);
  EXPECT_THROW(fcls_pixel(Vec::Zero(5), C), ShapeError);
  Vec y = C.col(0);
  y(3) = NAN;
  EXPECT_THROW(fcls_pixel(y, C), DomainError);
}

TEST(FclsCube, IdenticalPixelsGiveIdenticalAbundances) {
  const Mat C = library(4);
  Vec mix(4);
  mix << 0.1, 0.2, 0.3, 0.4;
  Tensor3 y(3, 3, C.rows());
  for (Index p = 0; p < 9; ++p) y.pixel_matrix().row(p) = (C * mix).transpose();
  const Tensor3 A = fcls_cube(y, C);
  for (Index p = 1; p < 9; ++p) EXPECT_EQ(A.pixel_matrix().row(p), A.pixel_matrix().row(0));
  EXPECT_LE((A.pixel_matrix().row(0).transpose() - mix).norm(), 1e-8);
}

TEST(FclsCube, PureBlocksRecovered) {
  SynthConfig cfg;
  cfg.s = 3;
  cfg.k = 1;
  cfg.R = 4;
  cfg.purity_cap = 1.0;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  Rng rng = make_stream(3, 0);
  const Tensor3 A = gen_abundances(cfg, rng);
  const EndmemberSet ems(library(4));
  const Tensor3 y = forward({A, Tensor3(A.n_row(), A.n_col(), ems.interactions())}, ems);
  EXPECT_LE(rmse(A, fcls_cube(y, ems.C())), 1e-9);
}

TEST(FclsCube, ErrorsNamePixel) {
  const Mat C = library(3);
  Tensor3 y(2, 3, C.rows(), 0.2);
  y(1, 2, 5) = NAN;
  try {
    fcls_cube(y, C);
    FAIL() << "expected DomainError";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
    EXPECT_NE(std::string(e.what()).find("pixel (1, 2)"), std::string::npos) << e.what();
  }
}

TEST(FclsCube, Deterministic) {
  std::mt19937_64 rng(13);
  const Mat C = library(5);
  const Tensor3 y = oracle::random_tensor(rng, 4, 4, C.rows(), 0, 1);
  EXPECT_EQ(fcls_cube(y, C), fcls_cube(y, C));
}
