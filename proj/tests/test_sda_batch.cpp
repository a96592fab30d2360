// Copyright 2026 The isda Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "isda/sda_batch.hpp"
#include "oracles.hpp"

namespace isda {
namespace {

using testing::Gen;
using testing::random_dataset;
using testing::rel;

template <typename F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << error_code_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

LabeledDataset points(std::initializer_list<double> coords, std::vector<int> classes,
                      std::vector<int> subclasses = {}) {
  const Index n = static_cast<Index>(classes.size());
  const Index d = static_cast<Index>(coords.size()) / n;
  Matrix x(d, n);
  auto it = coords.begin();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < d; ++i) x(i, j) = *it++;
  }
  if (subclasses.empty()) subclasses.assign(classes.size(), 0);
  return LabeledDataset(std::move(x), std::move(classes), std::move(subclasses));
}

TEST(Dataset, RejectsEmptyCell) {
  expect_code(ErrorCode::kEmptySubclass, [] { points({0, 1, 2}, {0, 0, 2}); });
  expect_code(ErrorCode::kEmptySubclass, [] { points({0, 1, 2}, {0, 0, 1}, {0, 2, 0}); });
}

TEST(Dataset, RejectsLabelCountMismatch) {
  expect_code(ErrorCode::kDimensionMismatch,
              [] { LabeledDataset(Matrix::Zero(2, 3), {0, 1}, {0, 0}); });
}

TEST(Laplacian, TwoSinglePointsByHand) {
  const Matrix l = build_between_laplacian(points({0, 1}, {0, 1}));
  Matrix expected(2, 2);
  expected << 1, -1, -1, 1;
  EXPECT_LT((l - 0.25 * expected).norm(), 1e-15);
}

TEST(Laplacian, ThreeClassesOneSampleEachMatchesScatter) {
  const LabeledDataset ds = points({0, 0, 1, 0, 0, 2}, {0, 1, 2});
  const Matrix l = build_between_laplacian(ds);
  const Matrix xc = testing::centered(ds.x());
  EXPECT_LT(rel(xc * l * xc.transpose(), testing::sda_scatter_oracle(ds.x(), ds.memberships())),
            1e-12);
}

TEST(Laplacian, RandomSymmetricZeroRowSumsPsdAndScatter) {
  Gen gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    const LabeledDataset ds = random_dataset(gen, gen.uniform_int(1, 6), gen.uniform_int(2, 4),
                                             gen.uniform_int(1, 3), 1, 6);
    const Matrix l = build_between_laplacian(ds);
    EXPECT_LT((l - l.transpose()).norm(), 1e-15);
    EXPECT_LT(l.rowwise().sum().cwiseAbs().maxCoeff(), 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(l);
    EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-12);
    const Matrix xc = testing::centered(ds.x());
    EXPECT_LT(rel(xc * l * xc.transpose(), testing::sda_scatter_oracle(ds.x(), ds.memberships())),
              1e-8);
  }
}

TEST(ScatterOracle, SingleClassIsZero) {
  const LabeledDataset ds = points({0, 1, 5, 7}, {0, 0, 0, 0}, {0, 1, 0, 1});
  EXPECT_EQ(testing::sda_scatter_oracle(ds.x(), ds.memberships()), Matrix::Zero(1, 1));
}

TEST(ScatterOracle, OpposedMeansAlongFirstAxis) {
  const LabeledDataset ds = points({1, 0, -1, 0}, {0, 1});
  const Matrix sb = testing::sda_scatter_oracle(ds.x(), ds.memberships());
  // p = 1/2 each, mean difference 2 e1
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  EXPECT_LT((sb - expected).norm(), 1e-15);
}

TEST(Targets, TwoSinglePointsByHand) {
  const TargetMatrix t = build_targets(points({0, 1}, {0, 1}));
  ASSERT_EQ(t.t.rows(), 1);
  EXPECT_NEAR(t.t(0, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(t.t(0, 1), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Targets, BlocksConstantWithinClass) {
  const TargetMatrix t = build_targets(points({0, 1, 2, 3, 10, 11, 12, 13}, {0, 0, 0, 0, 1, 1, 1, 1}));
  for (Index j = 1; j < 4; ++j) {
    EXPECT_DOUBLE_EQ(t.t(0, j), t.t(0, 0));
    EXPECT_DOUBLE_EQ(t.t(0, 4 + j), t.t(0, 4));
  }
}

TEST(Targets, SingleCellIsDegenerate) {
  expect_code(ErrorCode::kDegenerateSpectrum, [] { build_targets(points({0, 1}, {0, 0})); });
}

TEST(Targets, RandomOrthonormalPiecewiseConstantAndDenseEigenspace) {
  Gen gen(22);
  for (int trial = 0; trial < 40; ++trial) {
    const int classes = gen.uniform_int(2, 4);
    const int z = gen.uniform_int(1, 3);
    const LabeledDataset ds = random_dataset(gen, 2, classes, z, 1, 5);
    const TargetMatrix t = build_targets(ds);
    const Index k = static_cast<Index>(classes) * z - 1;
    ASSERT_EQ(t.t.rows(), k);
    ASSERT_EQ(t.t.cols(), ds.size());
    EXPECT_LT((t.t * t.t.transpose() - Matrix::Identity(k, k)).norm(), 1e-10);
    const std::vector<Membership> members = ds.memberships();
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        if (members[i] == members[j]) {
          EXPECT_LT((t.t.col(static_cast<Index>(i)) - t.t.col(static_cast<Index>(j))).norm(),
                    1e-14);
        }
      }
    }
    // Same eigenspace as the dense N x N problem (the top k eigenvalues are
    // separated from the zero eigenvalues, so the projector is unique).
    const Matrix dense = testing::dense_targets_oracle(build_between_laplacian(ds), k);
    EXPECT_LT((testing::row_projector(t.t) - testing::row_projector(dense)).norm(), 1e-9);
    // Sign convention: first significant entry of each row is positive.
    for (Index r = 0; r < k; ++r) {
      Index first = 0;
      while (std::abs(t.t(r, first)) <= 1e-12) ++first;
      EXPECT_GT(t.t(r, first), 0.0);
    }
  }
}

TEST(FastSda, SeparatesTwoGaussianClasses) {
  Gen gen(23);
  const Index n = 100;
  Matrix x(2, 2 * n);
  std::vector<int> labels(2 * n);
  for (Index j = 0; j < 2 * n; ++j) {
    const double shift = j < n ? -4.0 : 4.0;
    x(0, j) = shift + gen.normal();
    x(1, j) = gen.normal();
    labels[static_cast<std::size_t>(j)] = j < n ? 0 : 1;
  }
  const LabeledDataset ds(x, labels, std::vector<int>(labels.size(), 0));
  const LinearProjectionModel model = fit_fast_sda(ds, 1e-3);
  const Matrix p = project_linear(model, x);
  const Eigen::ArrayXd a = p.row(0).head(n).transpose().array();
  const Eigen::ArrayXd b = p.row(0).tail(n).transpose().array();
  const double sa = std::sqrt((a - a.mean()).square().mean());
  const double sb = std::sqrt((b - b.mean()).square().mean());
  const double pooled = std::sqrt(0.5 * (sa * sa + sb * sb));
  EXPECT_GT(std::abs(a.mean() - b.mean()), 3.0 * pooled);
}

TEST(FastSda, MatchesLuOracleAndIsOrthonormal) {
  Gen gen(24);
  for (int trial = 0; trial < 20; ++trial) {
    const LabeledDataset ds = random_dataset(gen, gen.uniform_int(5, 15), gen.uniform_int(2, 3),
                                             gen.uniform_int(1, 2), 4, 12);
    const double delta = std::pow(10.0, gen.uniform_int(-3, 3));
    const LinearFit fit = fit_fast_sda_full(ds, delta);
    const Matrix& w = fit.model.w;
    EXPECT_LT((w.transpose() * w - Matrix::Identity(w.cols(), w.cols())).norm(), 1e-10);
    EXPECT_LT(rel(w, testing::fast_sda_oracle(ds.x(), fit.targets.t, delta)), 1e-8);
    EXPECT_LT((fit.model.mean - ds.x().rowwise().mean()).norm(), 1e-12);
  }
}

TEST(FastSda, DuplicatedSamplesGiveSameSubspace) {
  Gen gen(25);
  const LabeledDataset ds = random_dataset(gen, 3, 3, 1, 5, 9);
  Matrix x2(ds.dim(), 2 * ds.size());
  x2 << ds.x(), ds.x();
  std::vector<int> c2 = ds.class_labels();
  c2.insert(c2.end(), ds.class_labels().begin(), ds.class_labels().end());
  const LabeledDataset doubled(x2, c2, std::vector<int>(c2.size(), 0));
  const Matrix w1 = fit_fast_sda(ds, 0.0).w;
  const Matrix w2 = fit_fast_sda(doubled, 0.0).w;
  EXPECT_LT((w1 - w2).norm(), 1e-8);
}

TEST(FastSda, PermutationInvariant) {
  Gen gen(26);
  for (int trial = 0; trial < 10; ++trial) {
    const LabeledDataset ds = random_dataset(gen, 6, 3, 2, 3, 8);
    std::vector<Index> perm(static_cast<std::size_t>(ds.size()));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), gen.engine());
    Matrix xp(ds.dim(), ds.size());
    std::vector<int> cp;
    std::vector<int> sp;
    for (std::size_t j = 0; j < perm.size(); ++j) {
      xp.col(static_cast<Index>(j)) = ds.x().col(perm[j]);
      cp.push_back(ds.class_labels()[static_cast<std::size_t>(perm[j])]);
      sp.push_back(ds.subclass_labels()[static_cast<std::size_t>(perm[j])]);
    }
    // The subspace is the invariant; individual columns may rotate within it
    // when the target spectrum has repeated eigenvalues.
    const Matrix w1 = fit_fast_sda(ds, 0.1).w;
    const Matrix w2 = fit_fast_sda(LabeledDataset(xp, cp, sp), 0.1).w;
    EXPECT_LT((testing::column_projector(w1) - testing::column_projector(w2)).norm(), 1e-8);
  }
}

TEST(FastSda, ProtocolDeltaSweepRuns) {
  Gen gen(27);
  const LabeledDataset ds = random_dataset(gen, 8, 3, 2, 6, 10);
  for (double delta : {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0}) {
    EXPECT_NO_THROW(fit_fast_sda(ds, delta)) << delta;
  }
}

TEST(Projection, MeanProjectsToZero) {
  Gen gen(28);
  const LabeledDataset ds = random_dataset(gen, 4, 2, 2, 4, 6);
  const LinearProjectionModel model = fit_fast_sda(ds, 1.0);
  EXPECT_LT(project_linear(model, model.mean).norm(), 1e-14);
  expect_code(ErrorCode::kDimensionMismatch, [&] { project_linear(model, Matrix::Zero(3, 1)); });
}

TEST(Projection, IdempotentInSubspace) {
  Gen gen(29);
  const LabeledDataset ds = random_dataset(gen, 5, 2, 2, 4, 6);
  const LinearProjectionModel model = fit_fast_sda(ds, 1.0);
  const Matrix xc = ds.x().colwise() - model.mean;
  const Matrix in_subspace = model.w * (model.w.transpose() * xc);
  EXPECT_LT((model.w * (model.w.transpose() * in_subspace) - in_subspace).norm(), 1e-12);
}

TEST(Sigma, TwoPoints) {
  Matrix x(1, 2);
  x << 0, 2;
  EXPECT_DOUBLE_EQ(mean_distance_sigma(x), 2.0);
}

TEST(Sigma, ThreeCollinearPoints) {
  Matrix x(1, 3);
  x << 0, 1, 2;
  EXPECT_NEAR(mean_distance_sigma(x), 4.0 / 3.0, 1e-15);
}

TEST(Sigma, Errors) {
  expect_code(ErrorCode::kZeroSigma, [] { mean_distance_sigma(Matrix::Ones(3, 4)); });
  expect_code(ErrorCode::kTooFewSamples, [] { mean_distance_sigma(Matrix::Ones(3, 1)); });
}

TEST(Rbf, KnownValues) {
  Matrix x(2, 1);
  x << 0, 0;
  Matrix y(2, 2);
  y << 0, 3, 0, 4;  // distance 0 and 5
  const Matrix k = rbf_kernel(x, y, 5.0);
  EXPECT_DOUBLE_EQ(k(0, 0), 1.0);
  EXPECT_NEAR(k(0, 1), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(rbf_kernel(x, y, 1e8)(0, 1), 1.0, 1e-14);
}

TEST(Rbf, MatchesLoopOracleAndGramDiagonal) {
  Gen gen(30);
  const Matrix x = gen.gaussian(4, 12);
  const Matrix y = gen.gaussian(4, 7);
  EXPECT_LT(rel(rbf_kernel(x, y, 1.7), testing::rbf_oracle(x, y, 1.7)), 1e-12);
  const Matrix g = rbf_gram(x, 1.7);
  EXPECT_LT(rel(g, testing::rbf_oracle(x, x, 1.7)), 1e-12);
  for (Index i = 0; i < g.rows(); ++i) EXPECT_EQ(g(i, i), 1.0);
  EXPECT_EQ(g, g.transpose());
  expect_code(ErrorCode::kInvalidArgument, [&] { rbf_kernel(x, y, 0.0); });
  expect_code(ErrorCode::kDimensionMismatch, [&] { rbf_kernel(x, gen.gaussian(3, 2), 1.0); });
}

TEST(Rbf, CounterTracksEntries) {
  Gen gen(31);
  const Matrix x = gen.gaussian(3, 5);
  const std::uint64_t before = kernel_evaluation_counter();
  rbf_kernel(x, gen.gaussian(3, 4), 1.0);
  rbf_gram(x, 1.0);
  EXPECT_EQ(kernel_evaluation_counter() - before, 5u * 4u + 5u * 5u);
}

TEST(FastKsda, IdentityKernelGivesTargetsTransposed) {
  // Points far apart relative to sigma make K exactly the identity.
  const LabeledDataset ds = points({0, 100, 200, 300}, {0, 0, 1, 1}, {0, 1, 0, 1});
  const KernelFit fit = fit_fast_ksda_full(ds, 1.0, 0.0, CenteringMode::kNonCentered);
  EXPECT_LT((fit.model.a - fit.targets.t.transpose()).norm(), 1e-14);
}

TEST(FastKsda, CholeskyMatchesExplicitInverse) {
  Gen gen(32);
  for (int trial = 0; trial < 10; ++trial) {
    const LabeledDataset ds = random_dataset(gen, 3, 2, 2, 3, 8);
    const double sigma = mean_distance_sigma(ds.x());
    const double delta = std::pow(10.0, gen.uniform_int(-2, 1));
    const KernelFit fit = fit_fast_ksda_full(ds, sigma, delta, CenteringMode::kNonCentered);
    const Matrix k = testing::rbf_oracle(ds.x(), ds.x(), sigma);
    EXPECT_LT(rel(fit.model.a, testing::kernel_coefficients_oracle(k, fit.targets.t, delta)),
              1e-8);
    const Vector norms = (fit.model.a.transpose() * k * fit.model.a).diagonal();
    EXPECT_LT((norms - Vector::Ones(norms.size())).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(fit.kernel_evaluations, static_cast<std::uint64_t>(ds.size() * ds.size()));
  }
}

TEST(FastKsda, CenteringIsNoOpAtZeroMean) {
  Gen gen(33);
  LabeledDataset ds = random_dataset(gen, 3, 2, 1, 5, 8);
  const LabeledDataset zero_mean(testing::centered(ds.x()), ds.class_labels(),
                                 ds.subclass_labels());
  const double sigma = mean_distance_sigma(zero_mean.x());
  const KernelExpansionModel a = fit_fast_ksda(zero_mean, sigma, 0.1, CenteringMode::kCentered);
  const KernelExpansionModel b = fit_fast_ksda(zero_mean, sigma, 0.1, CenteringMode::kNonCentered);
  EXPECT_LT((a.a - b.a).norm(), 1e-8);
}

TEST(FastKsda, SupportProjectionIsKernelTimesCoefficients) {
  Gen gen(34);
  const LabeledDataset ds = random_dataset(gen, 3, 3, 1, 4, 6);
  const double sigma = mean_distance_sigma(ds.x());
  const KernelExpansionModel model = fit_fast_ksda(ds, sigma, 0.5, CenteringMode::kCentered);
  const Matrix k = testing::rbf_oracle(model.support, model.support, sigma);
  EXPECT_LT(rel(project_kernel(model, ds.x()), (k * model.a).transpose()), 1e-10);
}

TEST(FastKsda, ZeroRegularizerOnDuplicateFails) {
  const LabeledDataset ds = points({0, 0, 1}, {0, 0, 1});
  expect_code(ErrorCode::kNotPositiveDefinite,
              [&] { fit_fast_ksda(ds, 1.0, 0.0, CenteringMode::kNonCentered); });
}

}  // namespace
}  // namespace isda
