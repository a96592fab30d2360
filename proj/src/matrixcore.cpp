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

#include "isda/matrixcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace isda {

namespace {

// Pivots of an SPD factorization are compared against the largest diagonal
// entry of the input, so the test is invariant to scaling.
constexpr double kRelativePivotTolerance = 1e-14;

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Lower Cholesky factor of an SPD matrix, or throws `failure`.
Eigen::LLT<Matrix, Eigen::Lower> factor_spd(const Matrix& m, ErrorCode failure,
                                             const char* what) {
  Eigen::LLT<Matrix, Eigen::Lower> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(failure, std::string(what) + ": non-positive pivot");
  }
  const double scale = std::max(m.diagonal().cwiseAbs().maxCoeff(), 0.0);
  const Vector pivots = llt.matrixLLT().diagonal().array().square();
  if (scale == 0.0 || pivots.minCoeff() <= kRelativePivotTolerance * scale) {
    throw Error(failure, std::string(what) + ": pivot below tolerance");
  }
  return llt;
}

void symmetrize_from_lower(Matrix& m) {
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
}

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kSingular: return "Singular";
    case ErrorCode::kDegeneratePivot: return "DegeneratePivot";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kEmptySubclass: return "EmptySubclass";
    case ErrorCode::kDegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kZeroSigma: return "ZeroSigma";
    case ErrorCode::kUnknownSubclass: return "UnknownSubclass";
    case ErrorCode::kUnknownClass: return "UnknownClass";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kRaggedRows: return "RaggedRows";
    case ErrorCode::kMissingClassColumn: return "MissingClassColumn";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kArchiveFormat: return "ArchiveFormat";
    case ErrorCode::kMissingSupport: return "MissingSupport";
  }
  return "Unknown";
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonFinite, std::string(what) + " contains NaN or Inf");
  }
}

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " must be square, got " + shape(m));
  }
  const double norm = m.norm();
  if ((m - m.transpose()).norm() > kSymmetryTolerance * std::max(norm, 1e-300)) {
    throw Error(ErrorCode::kNotSymmetric, std::string(what) + " is not symmetric");
  }
}

UpperTriangular UpperTriangular::from_factor(Matrix r) {
  if (r.rows() != r.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "triangular factor must be square");
  }
  require_finite(r, "triangular factor");
  r.triangularView<Eigen::StrictlyLower>().setZero();
  if (r.size() > 0 && r.diagonal().minCoeff() <= 0.0) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "triangular factor has a non-positive diagonal entry");
  }
  return UpperTriangular(std::move(r));
}

Matrix UpperTriangular::gram() const {
  Matrix g = Matrix::Zero(dim(), dim());
  g.selfadjointView<Eigen::Lower>().rankUpdate(r_.transpose());
  symmetrize_from_lower(g);
  return g;
}

UpperTriangular cholesky_upper(const Matrix& m) {
  require_symmetric(m, "cholesky input");
  require_finite(m, "cholesky input");
  if (m.size() == 0) return UpperTriangular::from_factor(Matrix(0, 0));
  const auto llt = factor_spd(m, ErrorCode::kNotPositiveDefinite, "cholesky");
  return UpperTriangular::from_factor(llt.matrixU());
}

Matrix tri_solve(const UpperTriangular& r, const Matrix& b, TriSolveMode mode) {
  if (b.rows() != r.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "tri_solve: factor is " + shape(r.matrix()) + ", rhs is " + shape(b));
  }
  Matrix y = b;
  if (mode == TriSolveMode::kUpper) {
    r.matrix().triangularView<Eigen::Upper>().solveInPlace(y);
  } else {
    r.matrix().transpose().triangularView<Eigen::Lower>().solveInPlace(y);
  }
  return y;
}

Matrix regularized_gram_inverse(const Matrix& x, double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kInvalidArgument, "regularizer must be finite and >= 0");
  }
  require_finite(x, "gram input");
  const Index d = x.rows();
  Matrix gram = Matrix::Zero(d, d);
  gram.diagonal().setConstant(delta);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
  symmetrize_from_lower(gram);
  const auto llt = factor_spd(gram, ErrorCode::kSingular, "regularized gram");
  Matrix inverse = llt.solve(Matrix::Identity(d, d));
  symmetrize_from_lower(inverse);
  return inverse;
}

Matrix rank_one_inverse_update(const Matrix& p, const Vector& v, double w) {
  if (p.rows() != p.cols() || v.size() != p.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "rank-one update: P is " + shape(p) +
                                                   ", v has " + std::to_string(v.size()));
  }
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw Error(ErrorCode::kInvalidArgument, "rank-one update weight must be positive");
  }
  const Vector pv = p * v;
  const double pivot = 1.0 / w + v.dot(pv);
  if (!std::isfinite(pivot) || std::abs(pivot) < kPivotTolerance) {
    throw Error(ErrorCode::kDegeneratePivot, "rank-one update pivot is zero");
  }
  Matrix out = p;
  out.selfadjointView<Eigen::Lower>().rankUpdate(pv, -1.0 / pivot);
  symmetrize_from_lower(out);
  return out;
}

Matrix rank_k_inverse_update(const Matrix& p, const Matrix& u) {
  if (p.rows() != p.cols() || u.rows() != p.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "rank-k update: P is " + shape(p) + ", U is " + shape(u));
  }
  const Index m = u.cols();
  if (m == 0) return p;

  const Matrix pu = p * u;
  Matrix middle = Matrix::Identity(m, m);
  middle.triangularView<Eigen::Lower>() += u.transpose() * pu;
  symmetrize_from_lower(middle);
  if (!middle.allFinite()) {
    throw Error(ErrorCode::kDegeneratePivot, "rank-k update middle system is not finite");
  }

  // SPD middle system (the usual case, P positive definite): subtract Z Z^T
  // with Z = P U L^{-T}, which keeps the result exactly symmetric.
  Eigen::LLT<Matrix, Eigen::Lower> llt(middle);
  if (llt.info() == Eigen::Success &&
      llt.matrixLLT().diagonal().array().square().minCoeff() >= kPivotTolerance) {
    Matrix z = pu.transpose();
    llt.matrixL().solveInPlace(z);
    Matrix out = p;
    out.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), -1.0);
    symmetrize_from_lower(out);
    return out;
  }

  Eigen::LDLT<Matrix, Eigen::Lower> ldlt(middle);
  if (ldlt.info() != Eigen::Success ||
      ldlt.vectorD().cwiseAbs().minCoeff() < kPivotTolerance) {
    throw Error(ErrorCode::kDegeneratePivot, "rank-k update middle system is singular");
  }
  Matrix out = p;
  out.noalias() -= pu * ldlt.solve(pu.transpose());
  symmetrize_from_lower(out);
  return out;
}

Matrix orthonormalize_columns(const Matrix& w) {
  if (w.cols() > w.rows()) {
    throw Error(ErrorCode::kRankDeficient, "more columns than rows: " + shape(w));
  }
  require_finite(w, "orthonormalize input");
  Matrix q = w;
  for (Index j = 0; j < q.cols(); ++j) {
    const double original = q.col(j).norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) {
        q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
      }
    }
    const double residual = q.col(j).norm();
    if (original == 0.0 || residual <= 1e-10 * original) {
      throw Error(ErrorCode::kRankDeficient,
                  "column " + std::to_string(j) + " depends on its predecessors");
    }
    q.col(j) /= residual;
  }
  return q;
}

void canonicalize_sign(Eigen::Ref<Vector> v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

void canonicalize_column_signs(Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) canonicalize_sign(m.col(j));
}

EigenPairs sym_eig_desc(const Matrix& m, Index k) {
  require_symmetric(m, "eigen input");
  require_finite(m, "eigen input");
  if (k < 1 || k > m.rows()) {
    throw Error(ErrorCode::kInvalidArgument,
                "requested " + std::to_string(k) + " eigenpairs of a " + shape(m) + " matrix");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kConvergenceFailure, "symmetric eigensolver did not converge");
  }
  EigenPairs out;
  out.values = solver.eigenvalues().reverse().head(k);
  out.vectors = solver.eigenvectors().rowwise().reverse().leftCols(k);
  canonicalize_column_signs(out.vectors);
  return out;
}

double relative_frobenius(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace isda
