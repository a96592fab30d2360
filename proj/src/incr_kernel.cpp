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

#include "isda/incr_kernel.hpp"

#include <string>
#include <vector>

namespace isda {

KernelIncrementalState make_kernel_state(const LabeledDataset& ds, std::optional<double> sigma,
                                         double delta, CenteringMode mode) {
  const double width = sigma ? *sigma : mean_distance_sigma(ds.x());
  KernelFit fit = fit_fast_ksda_full(ds, width, delta, mode);
  KernelIncrementalState state;
  state.factor = std::move(fit.factor);
  state.targets = std::move(fit.targets);
  state.model = std::move(fit.model);
  state.kernel_evaluations = fit.kernel_evaluations;
  return state;
}

UpperTriangular extend_cholesky(const UpperTriangular& factor, const Matrix& k_cross,
                                const Matrix& k_new, double delta) {
  const Index n = factor.dim();
  const Index m = k_new.rows();
  if (k_new.cols() != m || k_cross.rows() != n || k_cross.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cross block must be " + std::to_string(n) + "x" + std::to_string(m));
  }
  if (m == 0) return factor;
  require_symmetric(k_new, "new kernel block");

  const Matrix r_cross = tri_solve(factor, k_cross, TriSolveMode::kUpperTransposed);
  Matrix schur = k_new;
  schur.diagonal().array() += delta;
  schur.triangularView<Eigen::Lower>() -= r_cross.transpose() * r_cross;
  schur.triangularView<Eigen::StrictlyUpper>() = schur.transpose();
  const UpperTriangular r_new = cholesky_upper(schur);

  Matrix r(n + m, n + m);
  r.topLeftCorner(n, n) = factor.matrix();
  r.topRightCorner(n, m) = r_cross;
  r.bottomLeftCorner(m, n).setZero();
  r.bottomRightCorner(m, m) = r_new.matrix();
  return UpperTriangular::from_factor(std::move(r));
}

KernelUpdate incr_fit_kernel(KernelIncrementalState state, const Matrix& x_new,
                             std::span<const Membership> new_memberships,
                             TargetMode target_mode) {
  KernelExpansionModel& model = state.model;
  const Index m = x_new.cols();
  if (x_new.rows() != model.support.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "batch has dimension " +
                                                   std::to_string(x_new.rows()) + ", model " +
                                                   std::to_string(model.support.rows()));
  }
  if (static_cast<Index>(new_memberships.size()) != m) {
    throw Error(ErrorCode::kDimensionMismatch, "one membership per new sample is required");
  }
  require_finite(x_new, "incremental batch");
  if (m == 0) {
    KernelExpansionModel out = model;
    return KernelUpdate{std::move(out), std::move(state), 0};
  }

  const Matrix centered = model.centering == CenteringMode::kCentered
                              ? Matrix(x_new.colwise() - model.reference_mean)
                              : x_new;
  const Index n = model.support.cols();
  const std::uint64_t before = kernel_evaluation_counter();
  const Matrix k_cross = rbf_kernel(model.support, centered, model.sigma);
  const Matrix k_new = rbf_gram(centered, model.sigma);
  const std::uint64_t evaluations = kernel_evaluation_counter() - before;

  UpperTriangular factor = extend_cholesky(state.factor, k_cross, k_new, model.delta);

  TargetMatrix targets;
  if (target_mode == TargetMode::kExact) {
    std::vector<Membership> all = state.targets.membership;
    all.insert(all.end(), new_memberships.begin(), new_memberships.end());
    targets = build_targets(all);
  } else {
    targets = update_targets_approx(state.targets, new_memberships);
  }

  Matrix a = kernel_regression(factor, targets.t);
  normalize_kernel_columns(a, factor, model.delta);

  Matrix support(model.support.rows(), n + m);
  support.leftCols(n) = model.support;
  support.rightCols(m) = centered;
  model.support = std::move(support);
  model.a = std::move(a);
  state.factor = std::move(factor);
  state.targets = std::move(targets);
  state.kernel_evaluations += evaluations;
  KernelExpansionModel out = model;
  return KernelUpdate{std::move(out), std::move(state), evaluations};
}

}  // namespace isda
