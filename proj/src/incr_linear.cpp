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

#include "isda/incr_linear.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace isda {

namespace {

double recentering_gain(const Vector& a_mu, const Vector& mu_delta, Index count) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "retained sample count must be >= 1");
  const double pivot = 1.0 / static_cast<double>(count) + mu_delta.dot(a_mu);
  if (!std::isfinite(pivot) || std::abs(pivot) < kPivotTolerance) {
    throw Error(ErrorCode::kDegeneratePivot, "re-centering pivot is zero");
  }
  return 1.0 / pivot;
}

}  // namespace

LinearIncrementalState make_linear_state(const LabeledDataset& ds, double delta,
                                         StateMode mode) {
  LinearFit fit = fit_fast_sda_full(ds, delta);
  LinearIncrementalState state;
  state.mode = mode;
  state.delta = delta;
  state.stats = BatchStats{ds.size(), fit.model.mean};
  if (mode == StateMode::kNoBatch) {
    state.hat = fit.gram_inverse * (ds.x().colwise() - fit.model.mean);
  } else {
    state.data = ds.x();
  }
  state.gram_inverse = std::move(fit.gram_inverse);
  state.targets = std::move(fit.targets);
  state.model = std::move(fit.model);
  return state;
}

Matrix recenter_inverse(const Matrix& gram_inverse, const Vector& mu_delta, Index count) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "retained sample count must be >= 1");
  return rank_one_inverse_update(gram_inverse, mu_delta, static_cast<double>(count));
}

Matrix absorb_batch_inverse(const Matrix& recentered_inverse, const Matrix& xhat_new) {
  return rank_k_inverse_update(recentered_inverse, xhat_new);
}

Matrix recenter_hat_matrix(const Matrix& gram_inverse, const Matrix& hat, const Vector& mu_delta,
                           Index count) {
  const Index d = gram_inverse.rows();
  if (gram_inverse.cols() != d || hat.rows() != d || mu_delta.size() != d ||
      hat.cols() != count) {
    throw Error(ErrorCode::kDimensionMismatch, "re-centering operands disagree in shape");
  }
  const Vector a_mu = gram_inverse * mu_delta;
  const double s = recentering_gain(a_mu, mu_delta, count);
  Matrix out = hat;
  out.noalias() -= (s * a_mu) * (mu_delta.transpose() * hat);
  out.colwise() += (1.0 - s * mu_delta.dot(a_mu)) * a_mu;
  return out;
}

Matrix extend_hat_matrix(const Matrix& recentered_hat, const Matrix& updated_inverse,
                         const Matrix& xhat_new) {
  const Index d = updated_inverse.rows();
  if (recentered_hat.rows() != d || xhat_new.rows() != d || updated_inverse.cols() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "hat-matrix operands disagree in shape");
  }
  const Index n = recentered_hat.cols();
  const Index m = xhat_new.cols();
  Matrix out(d, n + m);
  if (m == 0) {
    out = recentered_hat;
    return out;
  }
  const Matrix c_x = updated_inverse * xhat_new;
  out.leftCols(n) = recentered_hat;
  out.leftCols(n).noalias() -= c_x * (xhat_new.transpose() * recentered_hat);
  out.rightCols(m) = c_x;
  return out;
}

TargetMatrix update_targets_approx(const TargetMatrix& targets,
                                   std::span<const Membership> new_memberships) {
  if (new_memberships.empty()) return targets;
  std::map<Membership, Index> column_of;
  for (std::size_t j = 0; j < targets.membership.size(); ++j) {
    column_of.try_emplace(targets.membership[j], static_cast<Index>(j));
  }
  const Index n = targets.t.cols();
  const auto m = static_cast<Index>(new_memberships.size());
  TargetMatrix out;
  out.t.resize(targets.t.rows(), n + m);
  out.t.leftCols(n) = targets.t;
  out.membership = targets.membership;
  for (Index j = 0; j < m; ++j) {
    const Membership& cell = new_memberships[static_cast<std::size_t>(j)];
    const auto it = column_of.find(cell);
    if (it == column_of.end()) {
      throw Error(ErrorCode::kUnknownSubclass,
                  "cell (" + std::to_string(cell.class_label) + ", " +
                      std::to_string(cell.subclass_label) + ") is not in the initial batch");
    }
    out.t.col(n + j) = targets.t.col(it->second);
    out.membership.push_back(cell);
  }
  // Symmetric (Loewdin) orthonormalization keeps the rows as close as
  // possible to the replicated ones and preserves the per-cell structure.
  const Matrix gram = out.t * out.t.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorCode::kRankDeficient, "replicated target rows are linearly dependent");
  }
  const Matrix inv_sqrt = eig.eigenvectors() *
                          eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                          eig.eigenvectors().transpose();
  out.t = (inv_sqrt * out.t).eval();
  return out;
}

LinearUpdate incr_fit(LinearIncrementalState state, const Matrix& x_new,
                      std::span<const Membership> new_memberships, TargetMode target_mode) {
  const Index d = state.dim();
  const Index m = x_new.cols();
  if (x_new.rows() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "batch has dimension " +
                                                   std::to_string(x_new.rows()) + ", model " +
                                                   std::to_string(d));
  }
  if (static_cast<Index>(new_memberships.size()) != m) {
    throw Error(ErrorCode::kDimensionMismatch, "one membership per new sample is required");
  }
  require_finite(x_new, "incremental batch");
  if (m == 0) {
    LinearProjectionModel model = state.model;
    return LinearUpdate{std::move(model), std::move(state)};
  }

  const Index n = state.stats.count;
  const double total = static_cast<double>(n + m);
  const Vector mean = (static_cast<double>(n) * state.stats.mean + x_new.rowwise().sum()) / total;
  const Vector mu_delta = state.stats.mean - mean;
  const Matrix xhat_new = x_new.colwise() - mean;

  const Matrix recentered = recenter_inverse(state.gram_inverse, mu_delta, n);
  Matrix updated = absorb_batch_inverse(recentered, xhat_new);

  TargetMatrix targets;
  if (target_mode == TargetMode::kExact) {
    std::vector<Membership> all = state.targets.membership;
    all.insert(all.end(), new_memberships.begin(), new_memberships.end());
    targets = build_targets(all);
  } else {
    targets = update_targets_approx(state.targets, new_memberships);
  }

  Matrix raw_w;
  if (state.mode == StateMode::kWithData) {
    Matrix data(d, n + m);
    data.leftCols(n) = state.data;
    data.rightCols(m) = x_new;
    raw_w = regress_targets(updated, data, mean, targets.t);
    state.data = std::move(data);
  } else {
    const Matrix recentered_hat = recenter_hat_matrix(state.gram_inverse, state.hat, mu_delta, n);
    state.hat = extend_hat_matrix(recentered_hat, updated, xhat_new);
    raw_w = state.hat * targets.t.transpose();
  }

  state.model = LinearProjectionModel{finalize_projection(raw_w), mean, state.delta};
  state.gram_inverse = std::move(updated);
  state.stats = BatchStats{n + m, mean};
  state.targets = std::move(targets);
  LinearProjectionModel model = state.model;
  return LinearUpdate{std::move(model), std::move(state)};
}

}  // namespace isda
