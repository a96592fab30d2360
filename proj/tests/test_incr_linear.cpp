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

#include "isda/incr_linear.hpp"
#include "oracles.hpp"

namespace isda {
namespace {

using testing::Gen;
using testing::head;
using testing::random_dataset;
using testing::rel;
using testing::tail_memberships;

template <typename F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << error_code_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

Matrix regularized_inverse_of(const Matrix& xhat, double delta) {
  return testing::gram_inverse_oracle(xhat, delta);
}

TEST(Recenter, ZeroShiftIsNoOp) {
  Gen gen(41);
  const Matrix x = gen.gaussian(3, 6);
  const Matrix a = regularized_gram_inverse(testing::centered(x), 0.5);
  EXPECT_LT(rel(recenter_inverse(a, Vector::Zero(3), 6), a), 1e-15);
}

TEST(Recenter, TwoSampleToyAgainstDirectInverse) {
  Matrix xt(2, 2);
  xt << 1, -1, 0, 0;
  const double delta = 0.5;
  const Matrix a = regularized_gram_inverse(testing::centered(xt), delta);
  // the new data moves the global mean to (1, 0)
  Vector mu(2);
  mu << 1, 0;
  const Vector mu_delta = xt.rowwise().mean() - mu;
  const Matrix b = recenter_inverse(a, mu_delta, 2);
  EXPECT_LT(rel(b, regularized_inverse_of(xt.colwise() - mu, delta)), 1e-12);
}

TEST(Recenter, SingleRetainedSample) {
  Matrix xt(2, 1);
  xt << 3, -2;
  const Matrix a = regularized_gram_inverse(testing::centered(xt), 1.0);  // = I
  Vector mu(2);
  mu << 0.5, 0.25;
  const Matrix b = recenter_inverse(a, xt.col(0) - mu, 1);
  EXPECT_LT(rel(b, regularized_inverse_of(xt.colwise() - mu, 1.0)), 1e-12);
}

TEST(Absorb, EmptyBatchIsNoOp) {
  const Matrix b = 0.3 * Matrix::Identity(4, 4);
  EXPECT_EQ(absorb_batch_inverse(b, Matrix(4, 0)), b);
}

TEST(Absorb, SingleSampleMatchesRankOne) {
  Gen gen(42);
  const Matrix b = regularized_gram_inverse(gen.gaussian(5, 9), 0.2);
  const Matrix x = gen.gaussian(5, 1);
  EXPECT_LT(rel(absorb_batch_inverse(b, x), rank_one_inverse_update(b, x.col(0), 1.0)), 1e-12);
}

TEST(Absorb, RecenterThenAbsorbMatchesFromScratch) {
  Gen gen(43);
  const Index d = 10;
  const Matrix xt = gen.gaussian(d, 40);
  const Matrix xn = gen.gaussian(d, 5).array() + 2.0;
  const double delta = 0.1;
  const Matrix a = regularized_gram_inverse(testing::centered(xt), delta);
  Matrix all(d, 45);
  all << xt, xn;
  const Vector mu = all.rowwise().mean();
  const Matrix b = recenter_inverse(a, xt.rowwise().mean() - mu, 40);
  const Matrix c = absorb_batch_inverse(b, xn.colwise() - mu);
  EXPECT_LT(rel(c, regularized_gram_inverse(all.colwise() - mu, delta)), 1e-8);
}

TEST(RecenterHat, ZeroShiftIsNoOp) {
  Gen gen(44);
  const Matrix x = testing::centered(gen.gaussian(3, 5));
  const Matrix a = regularized_gram_inverse(x, 0.5);
  const Matrix hat = a * x;
  EXPECT_LT(rel(recenter_hat_matrix(a, hat, Vector::Zero(3), 5), hat), 1e-15);
}

TEST(RecenterHat, OnesTermByHand) {
  // a = I, A = 0, mu_delta = e1, N_t = 1: every column is e1 (1 - 1/2).
  Vector e1 = Vector::Zero(2);
  e1(0) = 1.0;
  const Matrix b = recenter_hat_matrix(Matrix::Identity(2, 2), Matrix::Zero(2, 1), e1, 1);
  EXPECT_LT((b.col(0) - 0.5 * e1).norm(), 1e-15);
}

TEST(RecenterHat, ThreeSampleToyAgainstStoredData) {
  Matrix xt(2, 3);
  xt << 1, 2, 4, 0, -1, 3;
  const double delta = 0.7;
  const Vector mu_t = xt.rowwise().mean();
  const Matrix a = regularized_gram_inverse(xt.colwise() - mu_t, delta);
  Vector mu(2);
  mu << 2.0, 1.5;
  const Matrix b_hat = recenter_hat_matrix(a, a * (xt.colwise() - mu_t), mu_t - mu, 3);
  const Matrix b = recenter_inverse(a, mu_t - mu, 3);
  EXPECT_LT(rel(b_hat, b * (xt.colwise() - mu)), 1e-12);
}

TEST(RecenterHat, RandomConsistencyWithRecenteredInverse) {
  Gen gen(45);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = gen.uniform_int(1, 12);
    const Index n = gen.uniform_int(1, 30);
    const Matrix xt = gen.gaussian(d, n);
    const double delta = std::pow(10.0, gen.uniform(-2, 2));
    const Vector mu_t = xt.rowwise().mean();
    const Matrix a = regularized_gram_inverse(xt.colwise() - mu_t, delta);
    const Vector mu = mu_t + gen.gaussian(d, 1);
    const Matrix b_hat = recenter_hat_matrix(a, a * (xt.colwise() - mu_t), mu_t - mu, n);
    const Matrix b = recenter_inverse(a, mu_t - mu, n);
    EXPECT_LT(rel(b_hat, b * (xt.colwise() - mu)), 1e-8);
    EXPECT_LT(rel(b_hat, regularized_inverse_of(xt.colwise() - mu, delta) * (xt.colwise() - mu)),
              1e-8);
  }
}

TEST(ExtendHat, EmptyBatchIsNoOp) {
  const Matrix b = Matrix::Ones(2, 3);
  EXPECT_EQ(extend_hat_matrix(b, Matrix::Identity(2, 2), Matrix(2, 0)), b);
}

TEST(ExtendHat, NewColumnIsUpdatedInverseTimesSample) {
  Gen gen(46);
  const Matrix c = regularized_gram_inverse(gen.gaussian(2, 4), 1.0);
  const Matrix xn = gen.gaussian(2, 1);
  const Matrix out = extend_hat_matrix(gen.gaussian(2, 3), c, xn);
  EXPECT_LT((out.col(3) - c * xn.col(0)).norm(), 1e-15);
}

TEST(ExtendHat, FullChainMatchesFromScratch) {
  Gen gen(47);
  const Index d = 8;
  const Matrix xt = gen.gaussian(d, 30);
  const Matrix xn = gen.gaussian(d, 4).array() + 1.0;
  const double delta = 0.3;
  const Vector mu_t = xt.rowwise().mean();
  const Matrix a = regularized_gram_inverse(xt.colwise() - mu_t, delta);
  const Matrix hat = a * (xt.colwise() - mu_t);
  Matrix all(d, 34);
  all << xt, xn;
  const Vector mu = all.rowwise().mean();
  const Matrix b = recenter_inverse(a, mu_t - mu, 30);
  const Matrix c = absorb_batch_inverse(b, xn.colwise() - mu);
  const Matrix out = extend_hat_matrix(recenter_hat_matrix(a, hat, mu_t - mu, 30), c,
                                       xn.colwise() - mu);
  const Matrix xhat = all.colwise() - mu;
  EXPECT_LT(rel(out, regularized_inverse_of(xhat, delta) * xhat), 1e-8);
}

TEST(ApproxTargets, EmptyBatchUnchanged) {
  const TargetMatrix t = build_targets(std::vector<Membership>{{0, 0}, {1, 0}});
  const TargetMatrix out = update_targets_approx(t, {});
  EXPECT_EQ(out.t, t.t);
  EXPECT_EQ(out.membership, t.membership);
}

TEST(ApproxTargets, TwoClassCopyThenRenormalize) {
  const TargetMatrix t = build_targets(std::vector<Membership>{{0, 0}, {1, 0}});
  const std::vector<Membership> extra{{0, 0}};
  const TargetMatrix out = update_targets_approx(t, extra);
  ASSERT_EQ(out.t.cols(), 3);
  // copy of column 0 appended: [1/sqrt2, -1/sqrt2, 1/sqrt2] rescaled to unit norm
  const double s = 1.0 / std::sqrt(3.0);
  EXPECT_NEAR(out.t(0, 0), s, 1e-15);
  EXPECT_NEAR(out.t(0, 1), -s, 1e-15);
  EXPECT_NEAR(out.t(0, 2), s, 1e-15);
  EXPECT_NEAR(out.t.row(0).norm(), 1.0, 1e-15);
  EXPECT_EQ(out.membership.back(), (Membership{0, 0}));
}

TEST(ApproxTargets, UnknownCellRejected) {
  const TargetMatrix t = build_targets(std::vector<Membership>{{0, 0}, {1, 0}});
  const std::vector<Membership> extra{{0, 1}};
  expect_code(ErrorCode::kUnknownSubclass, [&] { update_targets_approx(t, extra); });
}

TEST(ApproxTargets, RandomOrthonormalAndCellStructure) {
  Gen gen(48);
  for (int trial = 0; trial < 30; ++trial) {
    const int classes = gen.uniform_int(2, 4);
    const int z = gen.uniform_int(1, 3);
    const LabeledDataset ds = random_dataset(gen, 2, classes, z, 1, 5);
    const TargetMatrix t = build_targets(ds);
    std::vector<Membership> extra;
    const int m = gen.uniform_int(1, 10);
    for (int i = 0; i < m; ++i) {
      extra.push_back(Membership{gen.uniform_int(0, classes - 1), gen.uniform_int(0, z - 1)});
    }
    const TargetMatrix out = update_targets_approx(t, extra);
    const Index k = out.t.rows();
    EXPECT_LT((out.t * out.t.transpose() - Matrix::Identity(k, k)).norm(), 1e-10);
    for (std::size_t i = 0; i < out.membership.size(); ++i) {
      for (std::size_t j = i + 1; j < out.membership.size(); ++j) {
        if (out.membership[i] == out.membership[j]) {
          EXPECT_LT((out.t.col(static_cast<Index>(i)) - out.t.col(static_cast<Index>(j))).norm(),
                    1e-12);
        }
      }
    }
  }
}

class IncrFitExactness : public ::testing::TestWithParam<StateMode> {};

TEST_P(IncrFitExactness, EqualsFromScratchFit) {
  Gen gen(49);
  for (int trial = 0; trial < 15; ++trial) {
    const LabeledDataset ds = random_dataset(gen, gen.uniform_int(3, 20), gen.uniform_int(2, 4),
                                             gen.uniform_int(1, 3), 4, 12);
    const Index n_t = ds.size() - gen.uniform_int(1, static_cast<int>(ds.size() / 2));
    const double delta = std::pow(10.0, gen.uniform_int(-2, 2));
    const LinearIncrementalState state = make_linear_state(head(ds, n_t), delta, GetParam());
    const LinearUpdate up = incr_fit(state, ds.x().rightCols(ds.size() - n_t),
                                     tail_memberships(ds, n_t), TargetMode::kExact);
    const LinearFit scratch = fit_fast_sda_full(ds, delta);
    EXPECT_LT(rel(up.model.w, scratch.model.w), 1e-8);
    EXPECT_LT((up.model.mean - scratch.model.mean).norm(), 1e-12);
    EXPECT_LT(rel(up.state.gram_inverse, scratch.gram_inverse), 1e-8);
    EXPECT_EQ(up.state.stats.count, ds.size());
    const Matrix& w = up.model.w;
    EXPECT_LT((w.transpose() * w - Matrix::Identity(w.cols(), w.cols())).norm(), 1e-10);
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, IncrFitExactness,
                         ::testing::Values(StateMode::kWithData, StateMode::kNoBatch));

TEST(IncrFit, EmptyBatchLeavesModelUnchanged) {
  Gen gen(50);
  const LabeledDataset ds = random_dataset(gen, 5, 2, 2, 4, 8);
  for (StateMode mode : {StateMode::kWithData, StateMode::kNoBatch}) {
    const LinearIncrementalState state = make_linear_state(ds, 0.5, mode);
    const LinearUpdate up = incr_fit(state, Matrix(5, 0), {}, TargetMode::kExact);
    EXPECT_LT((up.model.w - state.model.w).norm(), 1e-12);
    EXPECT_LT((up.model.mean - state.model.mean).norm(), 1e-12);
  }
}

TEST(IncrFit, NoBatchMatchesWithData) {
  Gen gen(51);
  for (TargetMode target : {TargetMode::kExact, TargetMode::kApprox}) {
    const LabeledDataset ds = random_dataset(gen, 7, 3, 2, 6, 10);
    const Index n_t = ds.size() * 2 / 3;
    std::vector<Membership> extra = tail_memberships(ds, n_t);
    const Matrix xn = ds.x().rightCols(ds.size() - n_t);
    const LinearUpdate with_data =
        incr_fit(make_linear_state(head(ds, n_t), 0.2, StateMode::kWithData), xn, extra, target);
    const LinearUpdate no_batch =
        incr_fit(make_linear_state(head(ds, n_t), 0.2, StateMode::kNoBatch), xn, extra, target);
    EXPECT_LT(rel(no_batch.model.w, with_data.model.w), 1e-8);
  }
}

TEST(IncrFit, ChainedBatchesEqualOneBatch) {
  Gen gen(52);
  for (StateMode mode : {StateMode::kWithData, StateMode::kNoBatch}) {
    const LabeledDataset ds = random_dataset(gen, 6, 3, 2, 6, 10);
    const Index n_t = ds.size() / 2;
    const Index split = n_t + (ds.size() - n_t) / 2;
    const std::vector<Membership> all = ds.memberships();
    const LinearIncrementalState state = make_linear_state(head(ds, n_t), 0.3, mode);
    const LinearUpdate once = incr_fit(state, ds.x().rightCols(ds.size() - n_t),
                                       tail_memberships(ds, n_t), TargetMode::kExact);
    const LinearUpdate first =
        incr_fit(state, ds.x().middleCols(n_t, split - n_t),
                 std::vector<Membership>(all.begin() + n_t, all.begin() + split),
                 TargetMode::kExact);
    const LinearUpdate second = incr_fit(first.state, ds.x().rightCols(ds.size() - split),
                                         tail_memberships(ds, split), TargetMode::kExact);
    EXPECT_LT(rel(second.model.w, once.model.w), 1e-7);
    // retained inverse still inverts the regularized Gram of all data
    const Matrix xhat = ds.x().colwise() - ds.x().rowwise().mean();
    Matrix g = xhat * xhat.transpose();
    g.diagonal().array() += 0.3;
    EXPECT_LT((second.state.gram_inverse * g - Matrix::Identity(6, 6)).norm(), 1e-7);
  }
}

TEST(IncrFit, ApproxKeepsSubspaceWhenBatchReplicatesData) {
  // Re-adding an exact copy of the initial batch keeps cell proportions and
  // the scatter structure, so approximate and exact targets coincide.
  Gen gen(53);
  const LabeledDataset ds = random_dataset(gen, 5, 3, 1, 5, 8);
  const LinearIncrementalState state = make_linear_state(ds, 0.0, StateMode::kWithData);
  const std::vector<Membership> members = ds.memberships();
  const LinearUpdate exact = incr_fit(state, ds.x(), members, TargetMode::kExact);
  const LinearUpdate approx = incr_fit(state, ds.x(), members, TargetMode::kApprox);
  const Eigen::JacobiSVD<Matrix> svd(exact.model.w.transpose() * approx.model.w);
  const double max_angle = std::acos(std::min(1.0, svd.singularValues().minCoeff()));
  EXPECT_LT(max_angle, 1e-6);
}

TEST(IncrFit, ApproxRejectsUnseenSubclass) {
  Gen gen(54);
  const LabeledDataset ds = random_dataset(gen, 3, 2, 1, 4, 6);
  const LinearIncrementalState state = make_linear_state(ds, 1.0, StateMode::kNoBatch);
  const std::vector<Membership> extra{{0, 1}};
  expect_code(ErrorCode::kUnknownSubclass,
              [&] { incr_fit(state, Matrix::Zero(3, 1), extra, TargetMode::kApprox); });
}

TEST(IncrFit, ShapeChecks) {
  Gen gen(55);
  const LabeledDataset ds = random_dataset(gen, 3, 2, 1, 4, 6);
  const LinearIncrementalState state = make_linear_state(ds, 1.0, StateMode::kWithData);
  const std::vector<Membership> one{{0, 0}};
  expect_code(ErrorCode::kDimensionMismatch,
              [&] { incr_fit(state, Matrix::Zero(4, 1), one, TargetMode::kExact); });
  expect_code(ErrorCode::kDimensionMismatch,
              [&] { incr_fit(state, Matrix::Zero(3, 2), one, TargetMode::kExact); });
  Matrix bad = Matrix::Zero(3, 1);
  bad(0, 0) = NAN;
  expect_code(ErrorCode::kNonFinite, [&] { incr_fit(state, bad, one, TargetMode::kExact); });
}

TEST(IncrFit, MeanMergesExactly) {
  Gen gen(56);
  const LabeledDataset ds = random_dataset(gen, 4, 2, 1, 6, 9);
  const Index n_t = 7;
  const LinearUpdate up =
      incr_fit(make_linear_state(head(ds, n_t), 1.0, StateMode::kNoBatch),
               ds.x().rightCols(ds.size() - n_t), tail_memberships(ds, n_t), TargetMode::kExact);
  EXPECT_LT((up.state.stats.mean - ds.x().rowwise().mean()).norm(), 1e-12);
}

}  // namespace
}  // namespace isda
