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

// Incremental kernel fastSDA through block extension of chol(K + delta I).
//
// New samples are centered at the initial batch mean (or not at all), never
// at the running mean: re-centering in feature space would change every
// kernel entry and invalidate the retained factor.

#ifndef ISDA_INCR_KERNEL_HPP_
#define ISDA_INCR_KERNEL_HPP_

#include <cstdint>
#include <optional>
#include <span>

#include "isda/incr_linear.hpp"
#include "isda/sda_batch.hpp"

namespace isda {

struct KernelIncrementalState {
  UpperTriangular factor;       // R with R^T R = K_t + delta I
  TargetMatrix targets;
  KernelExpansionModel model;   // owns support, sigma, delta, centering
  // Cumulative kernel entries evaluated for this state, including the
  // initial Gram matrix.
  std::uint64_t kernel_evaluations = 0;
};

// sigma defaults to the mean pairwise distance of the raw initial batch.
KernelIncrementalState make_kernel_state(const LabeledDataset& ds, std::optional<double> sigma,
                                         double delta, CenteringMode mode);

// [[R_t, R_t^{-T} K_cross], [0, chol(K_new - R_cross^T R_cross + delta I)]]
UpperTriangular extend_cholesky(const UpperTriangular& factor, const Matrix& k_cross,
                                const Matrix& k_new, double delta);

struct KernelUpdate {
  KernelExpansionModel model;
  KernelIncrementalState state;
  std::uint64_t kernel_evaluations = 0;  // entries evaluated by this increment
};

KernelUpdate incr_fit_kernel(KernelIncrementalState state, const Matrix& x_new,
                             std::span<const Membership> new_memberships,
                             TargetMode target_mode);

}  // namespace isda

#endif  // ISDA_INCR_KERNEL_HPP_
