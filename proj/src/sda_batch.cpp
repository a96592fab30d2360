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

#include "isda/sda_batch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace isda {

namespace {

// Eigenvalues of L_b at or below this are treated as zero.
constexpr double kSpectrumFloor = 1e-10;

thread_local std::uint64_t kernel_entries = 0;

void require_delta(double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kInvalidArgument, "regularizer must be finite and >= 0");
  }
}

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "kernel width must be finite and > 0");
  }
}

// Cell-level matrix M with L_b = E M E^T, E the N x K cell indicator.
Matrix cell_laplacian(const CellLayout& layout) {
  const Index k = layout.size();
  Index n = 0;
  for (Index c : layout.counts) n += c;
  Matrix m = Matrix::Zero(k, k);
  for (Index a = 0; a < k; ++a) {
    const double pa = static_cast<double>(layout.counts[a]) / static_cast<double>(n);
    const double na = static_cast<double>(layout.counts[a]);
    for (Index b = 0; b < k; ++b) {
      if (layout.cells[a].class_label == layout.cells[b].class_label) continue;
      const double pb = static_cast<double>(layout.counts[b]) / static_cast<double>(n);
      const double nb = static_cast<double>(layout.counts[b]);
      m(a, a) += pa * pb / (na * na);
      m(a, b) = -pa * pb / (na * nb);
    }
  }
  return m;
}

}  // namespace

CellLayout make_cell_layout(std::span<const Membership> memberships) {
  if (memberships.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no samples");
  }
  std::map<Membership, Index> counts;
  int max_class = -1;
  for (const Membership& m : memberships) {
    if (m.class_label < 0 || m.subclass_label < 0) {
      throw Error(ErrorCode::kInvalidArgument, "labels must be non-negative");
    }
    ++counts[m];
    max_class = std::max(max_class, m.class_label);
  }
  std::vector<int> subclasses(static_cast<std::size_t>(max_class) + 1, 0);
  for (const auto& [cell, count] : counts) {
    int& z = subclasses[static_cast<std::size_t>(cell.class_label)];
    z = std::max(z, cell.subclass_label + 1);
  }
  CellLayout layout;
  layout.class_count = max_class + 1;
  std::map<Membership, Index> index_of;
  for (int c = 0; c <= max_class; ++c) {
    if (subclasses[static_cast<std::size_t>(c)] == 0) {
      throw Error(ErrorCode::kEmptySubclass, "class " + std::to_string(c) + " has no samples");
    }
    for (int s = 0; s < subclasses[static_cast<std::size_t>(c)]; ++s) {
      const auto it = counts.find(Membership{c, s});
      if (it == counts.end()) {
        throw Error(ErrorCode::kEmptySubclass, "cell (" + std::to_string(c) + ", " +
                                                   std::to_string(s) + ") is empty");
      }
      index_of[it->first] = layout.size();
      layout.cells.push_back(it->first);
      layout.counts.push_back(it->second);
    }
  }
  layout.cell_of_sample.reserve(memberships.size());
  for (const Membership& m : memberships) layout.cell_of_sample.push_back(index_of.at(m));
  return layout;
}

LabeledDataset::LabeledDataset(Matrix x, std::vector<int> class_labels,
                               std::vector<int> subclass_labels)
    : x_(std::move(x)),
      class_labels_(std::move(class_labels)),
      subclass_labels_(std::move(subclass_labels)) {
  const auto n = static_cast<std::size_t>(x_.cols());
  if (class_labels_.size() != n || subclass_labels_.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "label count does not match sample count " + std::to_string(n));
  }
  require_finite(x_, "dataset");
  const auto members = memberships();
  make_cell_layout(members);
}

std::vector<Membership> LabeledDataset::memberships() const {
  std::vector<Membership> out(class_labels_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = Membership{class_labels_[i], subclass_labels_[i]};
  }
  return out;
}

Matrix build_between_laplacian(std::span<const Membership> memberships) {
  const CellLayout layout = make_cell_layout(memberships);
  const Matrix m = cell_laplacian(layout);
  const auto n = static_cast<Index>(memberships.size());
  Matrix l(n, n);
  for (Index j = 0; j < n; ++j) {
    const Index b = layout.cell_of_sample[static_cast<std::size_t>(j)];
    for (Index i = 0; i < n; ++i) {
      l(i, j) = m(layout.cell_of_sample[static_cast<std::size_t>(i)], b);
    }
  }
  return l;
}

Matrix build_between_laplacian(const LabeledDataset& ds) {
  return build_between_laplacian(ds.memberships());
}

TargetMatrix build_targets(std::span<const Membership> memberships) {
  const CellLayout layout = make_cell_layout(memberships);
  const Index k = layout.size();
  if (k < 2) {
    throw Error(ErrorCode::kDegenerateSpectrum, "need at least two (class, subclass) cells");
  }
  // With D = diag(n_a), L_b v = lambda v and v = E D^{-1/2} y reduce to
  // (D^{1/2} M D^{1/2}) y = lambda y, and ||v|| = ||y||.
  const Vector sqrt_counts = Eigen::Map<const Eigen::Matrix<Index, Eigen::Dynamic, 1>>(
                                 layout.counts.data(), k)
                                 .cast<double>()
                                 .cwiseSqrt();
  Matrix reduced = sqrt_counts.asDiagonal() * cell_laplacian(layout) * sqrt_counts.asDiagonal();
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  const EigenPairs eig = sym_eig_desc(reduced, k - 1);
  if (eig.values(k - 2) <= kSpectrumFloor) {
    throw Error(ErrorCode::kDegenerateSpectrum,
                "between-class Laplacian has fewer than Cz-1 nonzero eigenvalues");
  }
  const auto n = static_cast<Index>(memberships.size());
  Matrix columns(n, k - 1);
  for (Index i = 0; i < n; ++i) {
    const Index a = layout.cell_of_sample[static_cast<std::size_t>(i)];
    columns.row(i) = eig.vectors.row(a) / sqrt_counts(a);
  }
  canonicalize_column_signs(columns);
  return TargetMatrix{columns.transpose(),
                      std::vector<Membership>(memberships.begin(), memberships.end())};
}

TargetMatrix build_targets(const LabeledDataset& ds) { return build_targets(ds.memberships()); }

Vector column_mean(const Matrix& x) {
  if (x.cols() == 0) return Vector::Zero(x.rows());
  return x.rowwise().mean();
}

Matrix regress_targets(const Matrix& gram_inverse, const Matrix& x, const Vector& mean,
                       const Matrix& t) {
  if (t.cols() != x.cols() || mean.size() != x.rows() || gram_inverse.rows() != x.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "regression operands disagree in shape");
  }
  Matrix xt = x * t.transpose();
  xt.noalias() -= mean * t.rowwise().sum().transpose();
  return gram_inverse * xt;
}

Matrix finalize_projection(const Matrix& raw_w) {
  return orthonormalize_columns(raw_w.leftCols(std::min(raw_w.rows(), raw_w.cols())));
}

LinearFit fit_fast_sda_full(const LabeledDataset& ds, double delta) {
  require_delta(delta);
  LinearFit fit;
  fit.model.mean = column_mean(ds.x());
  fit.model.delta = delta;
  const Matrix centered = ds.x().colwise() - fit.model.mean;
  fit.gram_inverse = regularized_gram_inverse(centered, delta);
  fit.targets = build_targets(ds);
  fit.model.w = finalize_projection(
      regress_targets(fit.gram_inverse, ds.x(), fit.model.mean, fit.targets.t));
  return fit;
}

LinearProjectionModel fit_fast_sda(const LabeledDataset& ds, double delta) {
  return fit_fast_sda_full(ds, delta).model;
}

double mean_distance_sigma(const Matrix& x) {
  const Index n = x.cols();
  if (n < 2) throw Error(ErrorCode::kTooFewSamples, "need at least two samples");
  require_finite(x, "sigma input");
  double total = 0.0;
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) total += (x.col(i) - x.col(j)).norm();
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double sigma = total / pairs;
  if (!(sigma > 0.0)) throw Error(ErrorCode::kZeroSigma, "all samples are identical");
  return sigma;
}

Matrix rbf_kernel(const Matrix& x, const Matrix& y, double sigma) {
  require_sigma(sigma);
  if (x.rows() != y.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "kernel operands have different dimension");
  }
  const double scale = -1.0 / (2.0 * sigma * sigma);
  kernel_entries += static_cast<std::uint64_t>(x.cols()) * static_cast<std::uint64_t>(y.cols());
  Matrix k = -2.0 * (x.transpose() * y);
  k.colwise() += x.colwise().squaredNorm().transpose();
  k.rowwise() += y.colwise().squaredNorm();
  return (k.array().max(0.0) * scale).exp().matrix();
}

Matrix rbf_gram(const Matrix& x, double sigma) {
  require_sigma(sigma);
  const Index n = x.cols();
  const double scale = -1.0 / (2.0 * sigma * sigma);
  kernel_entries += static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
  Matrix g = Matrix::Zero(n, n);
  g.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  const Vector norms = g.diagonal();
  for (Index j = 0; j < n; ++j) {
    g(j, j) = 1.0;
    for (Index i = j + 1; i < n; ++i) {
      const double sq = std::max(norms(i) + norms(j) - 2.0 * g(i, j), 0.0);
      g(i, j) = std::exp(sq * scale);
      g(j, i) = g(i, j);
    }
  }
  return g;
}

std::uint64_t kernel_evaluation_counter() { return kernel_entries; }

Matrix kernel_regression(const UpperTriangular& factor, const Matrix& t) {
  return tri_solve(factor, tri_solve(factor, t.transpose(), TriSolveMode::kUpperTransposed),
                   TriSolveMode::kUpper);
}

void normalize_kernel_columns(Matrix& a, const UpperTriangular& factor, double delta) {
  if (a.rows() != factor.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "coefficients do not match the factor");
  }
  const Matrix ra = factor.matrix().triangularView<Eigen::Upper>() * a;
  for (Index j = 0; j < a.cols(); ++j) {
    const double energy = ra.col(j).squaredNorm() - delta * a.col(j).squaredNorm();
    if (!(energy > 0.0)) {
      throw Error(ErrorCode::kNotPositiveDefinite,
                  "coefficient column " + std::to_string(j) + " has no kernel energy");
    }
    a.col(j) /= std::sqrt(energy);
  }
}

KernelFit fit_fast_ksda_full(const LabeledDataset& ds, double sigma, double delta,
                             CenteringMode mode, const std::optional<Vector>& reference_mean) {
  require_sigma(sigma);
  require_delta(delta);
  KernelFit fit;
  KernelExpansionModel& model = fit.model;
  model.sigma = sigma;
  model.delta = delta;
  model.centering = mode;
  if (mode == CenteringMode::kCentered) {
    model.reference_mean = reference_mean ? *reference_mean : column_mean(ds.x());
    if (model.reference_mean.size() != ds.dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "reference mean has the wrong dimension");
    }
    model.support = ds.x().colwise() - model.reference_mean;
  } else {
    model.support = ds.x();
  }
  const std::uint64_t before = kernel_evaluation_counter();
  Matrix k = rbf_gram(model.support, sigma);
  fit.kernel_evaluations = kernel_evaluation_counter() - before;
  k.diagonal().array() += delta;
  fit.factor = cholesky_upper(k);
  fit.targets = build_targets(ds);
  model.a = kernel_regression(fit.factor, fit.targets.t);
  normalize_kernel_columns(model.a, fit.factor, delta);
  return fit;
}

KernelExpansionModel fit_fast_ksda(const LabeledDataset& ds, double sigma, double delta,
                                   CenteringMode mode) {
  return fit_fast_ksda_full(ds, sigma, delta, mode).model;
}

Matrix project_linear(const LinearProjectionModel& model, const Matrix& x) {
  if (x.rows() != model.w.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model expects dimension " + std::to_string(model.w.rows()) + ", got " +
                    std::to_string(x.rows()));
  }
  return model.w.transpose() * (x.colwise() - model.mean);
}

Matrix project_kernel(const KernelExpansionModel& model, const Matrix& x) {
  if (x.rows() != model.support.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model expects dimension " + std::to_string(model.support.rows()) + ", got " +
                    std::to_string(x.rows()));
  }
  const Matrix kx = model.centering == CenteringMode::kCentered
                        ? rbf_kernel(model.support, x.colwise() - model.reference_mean,
                                     model.sigma)
                        : rbf_kernel(model.support, x, model.sigma);
  return model.a.transpose() * kx;
}

}  // namespace isda
