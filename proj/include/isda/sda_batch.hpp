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

// Batch fast subclass discriminant analysis, linear and RBF-kernel.
//
// The solvers follow the spectral-regression recipe: build the between-class
// Laplacian over the (class, subclass) cells, take its leading eigenvectors as
// regression targets T, ridge-regress T onto the centered data (or the kernel
// matrix), then orthonormalize (linear) or K-normalize (kernel) the result.

#ifndef ISDA_SDA_BATCH_HPP_
#define ISDA_SDA_BATCH_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "isda/matrixcore.hpp"

namespace isda {

struct Membership {
  int class_label = 0;
  int subclass_label = 0;

  friend auto operator<=>(const Membership&, const Membership&) = default;
};

// Distinct (class, subclass) cells of a membership list, sorted, with sizes.
struct CellLayout {
  std::vector<Membership> cells;
  std::vector<Index> counts;
  std::vector<Index> cell_of_sample;  // index into `cells` per sample
  int class_count = 0;

  Index size() const { return static_cast<Index>(cells.size()); }
};

// Throws EmptySubclass unless every class in [0, C) and every subclass in
// [0, z_c) of each class has at least one member.
CellLayout make_cell_layout(std::span<const Membership> memberships);

// Columns are samples (uncentered). Validated on construction.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(Matrix x, std::vector<int> class_labels, std::vector<int> subclass_labels);

  const Matrix& x() const { return x_; }
  const std::vector<int>& class_labels() const { return class_labels_; }
  const std::vector<int>& subclass_labels() const { return subclass_labels_; }
  Index size() const { return x_.cols(); }
  Index dim() const { return x_.rows(); }
  std::vector<Membership> memberships() const;

 private:
  Matrix x_;
  std::vector<int> class_labels_;
  std::vector<int> subclass_labels_;
};

struct TargetMatrix {
  Matrix t;  // (Cz-1) x N, rows orthonormal
  std::vector<Membership> membership;
};

// N x N Laplacian L_b = sum over cross-class cell pairs (a, b) of
// p_a p_b (e_a/n_a - e_b/n_b)(e_a/n_a - e_b/n_b)^T, with p the empirical
// subclass prior, e_a the cell indicator and n_a the cell size. Off-diagonal
// cross-class entries are -p_a p_b / (n_a n_b); X L_b X^T is the
// between-subclass scatter.
Matrix build_between_laplacian(std::span<const Membership> memberships);
Matrix build_between_laplacian(const LabeledDataset& ds);

// Rows are the top Cz-1 eigenvectors of L_b. Computed through the Cz x Cz
// cell-level problem, which has the same nonzero spectrum.
TargetMatrix build_targets(std::span<const Membership> memberships);
TargetMatrix build_targets(const LabeledDataset& ds);

struct LinearProjectionModel {
  Matrix w;     // d x (Cz-1), orthonormal columns
  Vector mean;  // centering reference
  double delta = 0.0;
};

struct LinearFit {
  LinearProjectionModel model;
  Matrix gram_inverse;  // (X~ X~^T + delta I)^{-1}, X~ centered at model.mean
  TargetMatrix targets;
};

// P (X T^T - mean (T 1)^T) = P X^ T^T, the regression step on centered data.
Matrix regress_targets(const Matrix& gram_inverse, const Matrix& x, const Vector& mean,
                       const Matrix& t);

// Keeps the leading min(d, Cz-1) columns (rank of the between-subclass
// scatter is at most d) and orthonormalizes them.
Matrix finalize_projection(const Matrix& raw_w);

LinearFit fit_fast_sda_full(const LabeledDataset& ds, double delta);
LinearProjectionModel fit_fast_sda(const LabeledDataset& ds, double delta);

// Mean Euclidean distance over all unordered sample pairs.
double mean_distance_sigma(const Matrix& x);

// exp(-||x_i - y_j||^2 / (2 sigma^2)), N x M.
Matrix rbf_kernel(const Matrix& x, const Matrix& y, double sigma);
// Symmetric N x N kernel with an exactly unit diagonal.
Matrix rbf_gram(const Matrix& x, double sigma);

// Kernel entries produced by rbf_kernel and rbf_gram on the calling thread
// since it started; differences measure the work of a call sequence.
std::uint64_t kernel_evaluation_counter();

enum class CenteringMode : std::uint8_t {
  kCentered = 0,     // subtract the initial-batch mean before every kernel call
  kNonCentered = 1,
};

struct KernelExpansionModel {
  Matrix a;        // N x (Cz-1)
  Matrix support;  // d x N, already centered when mode == kCentered
  double sigma = 1.0;
  double delta = 0.0;
  CenteringMode centering = CenteringMode::kNonCentered;
  Vector reference_mean;  // empty in non-centered mode
};

struct KernelFit {
  KernelExpansionModel model;
  UpperTriangular factor;  // chol(K + delta I)
  TargetMatrix targets;
  std::uint64_t kernel_evaluations = 0;
};

// A = R^{-1} R^{-T} T^T, i.e. (K + delta I)^{-1} T^T for R = chol(K + delta I).
Matrix kernel_regression(const UpperTriangular& factor, const Matrix& t);

// Scales each column a by 1 / sqrt(a^T K a), with K = R^T R - delta I, so no
// kernel entries are re-evaluated.
void normalize_kernel_columns(Matrix& a, const UpperTriangular& factor, double delta);

// `reference_mean` overrides the centering reference (default: mean of ds).
KernelFit fit_fast_ksda_full(const LabeledDataset& ds, double sigma, double delta,
                             CenteringMode mode,
                             const std::optional<Vector>& reference_mean = std::nullopt);
KernelExpansionModel fit_fast_ksda(const LabeledDataset& ds, double sigma, double delta,
                                   CenteringMode mode);

// W^T (X - mean 1^T)
Matrix project_linear(const LinearProjectionModel& model, const Matrix& x);
// A^T k(support, X - reference)
Matrix project_kernel(const KernelExpansionModel& model, const Matrix& x);

Vector column_mean(const Matrix& x);

}  // namespace isda

#endif  // ISDA_SDA_BATCH_HPP_
