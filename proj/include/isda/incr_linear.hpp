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

// Incremental linear fastSDA.
//
// Notation used throughout: X_t is the data seen so far (N_t samples, mean
// mu_t), X_{t+1} the incoming batch, mu the mean of both. "~" marks data
// centered at its own mean, "^" data centered at mu, and mu_delta = mu_t - mu.
// The retained inverse is P = (X~_t X~_t^T + delta I)^{-1}; in no-batch mode
// the hat matrix H = P X~_t is retained instead of the raw data.

#ifndef ISDA_INCR_LINEAR_HPP_
#define ISDA_INCR_LINEAR_HPP_

#include <cstdint>
#include <span>

#include "isda/sda_batch.hpp"

namespace isda {

enum class StateMode : std::uint8_t {
  kWithData = 0,
  kNoBatch = 1,
};

enum class TargetMode : std::uint8_t {
  kExact = 0,   // rebuild T' from all memberships
  kApprox = 1,  // replicate existing cell columns, then re-orthonormalize rows
};

struct BatchStats {
  Index count = 0;
  Vector mean;
};

// Single-writer: `incr_fit` consumes a state and returns its successor.
struct LinearIncrementalState {
  StateMode mode = StateMode::kWithData;
  Matrix gram_inverse;  // P, d x d
  Matrix hat;           // H, d x N_t (no-batch mode only)
  Matrix data;          // raw X_t (with-data mode only)
  BatchStats stats;
  double delta = 0.0;
  TargetMatrix targets;  // also carries the membership of every retained column
  LinearProjectionModel model;

  Index dim() const { return gram_inverse.rows(); }
};

LinearIncrementalState make_linear_state(const LabeledDataset& ds, double delta,
                                         StateMode mode);

// (X^_t X^_t^T + delta I)^{-1} from P: a rank-one update with weight N_t.
Matrix recenter_inverse(const Matrix& gram_inverse, const Vector& mu_delta, Index count);

// (X^ X^^T + delta I)^{-1} from the re-centered inverse and the centered batch.
Matrix absorb_batch_inverse(const Matrix& recentered_inverse, const Matrix& xhat_new);

// B = b X^_t evaluated from (a, A) alone:
//   B = A - a mu_delta s mu_delta^T A + a mu_delta 1^T - a mu_delta s mu_delta^T a mu_delta 1^T,
// with s = (1/N_t + mu_delta^T a mu_delta)^{-1}.
Matrix recenter_hat_matrix(const Matrix& gram_inverse, const Matrix& hat, const Vector& mu_delta,
                           Index count);

// C = [B - c X^_{t+1} X^_{t+1}^T B, c X^_{t+1}]
Matrix extend_hat_matrix(const Matrix& recentered_hat, const Matrix& updated_inverse,
                         const Matrix& xhat_new);

// Appends one column per new sample, copied from an existing column of the
// same cell, then applies (T' T'^T)^{-1/2} so the rows are orthonormal again.
// Throws UnknownSubclass for cells absent from `targets`.
TargetMatrix update_targets_approx(const TargetMatrix& targets,
                                   std::span<const Membership> new_memberships);

struct LinearUpdate {
  LinearProjectionModel model;
  LinearIncrementalState state;
};

LinearUpdate incr_fit(LinearIncrementalState state, const Matrix& x_new,
                      std::span<const Membership> new_memberships, TargetMode target_mode);

}  // namespace isda

#endif  // ISDA_INCR_LINEAR_HPP_
