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

// Dense kernels shared by the batch and incremental solvers. All functions
// are pure: they never retain references to their arguments.

#ifndef ISDA_MATRIXCORE_HPP_
#define ISDA_MATRIXCORE_HPP_

#include <Eigen/Dense>

#include "isda/error.hpp"

namespace isda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Absolute threshold on scalar pivots (Woodbury denominators, LDLT diagonals).
inline constexpr double kPivotTolerance = 1e-14;
// Relative symmetry tolerance for inputs that must be symmetric.
inline constexpr double kSymmetryTolerance = 1e-10;

// Upper-triangular factor with a strictly positive diagonal. The only way to
// obtain one is through a factorization or `from_factor`, both of which
// validate the invariant.
class UpperTriangular {
 public:
  UpperTriangular() = default;

  // Throws NotPositiveDefinite if any diagonal entry is <= 0 and
  // DimensionMismatch if `r` is not square. Entries below the diagonal are
  // zeroed.
  static UpperTriangular from_factor(Matrix r);

  const Matrix& matrix() const { return r_; }
  Index dim() const { return r_.rows(); }

  // R^T R
  Matrix gram() const;

 private:
  explicit UpperTriangular(Matrix r) : r_(std::move(r)) {}
  Matrix r_;
};

enum class TriSolveMode {
  kUpper,            // R * Y = B
  kUpperTransposed,  // R^T * Y = B
};

void require_finite(const Matrix& m, const char* what);
void require_symmetric(const Matrix& m, const char* what);

// R with R^T R = M. Throws NotPositiveDefinite when a pivot is not positive
// (relative to the largest diagonal entry of M).
UpperTriangular cholesky_upper(const Matrix& m);

Matrix tri_solve(const UpperTriangular& r, const Matrix& b, TriSolveMode mode);

// (X X^T + delta I)^{-1}. Throws Singular when the regularized Gram matrix
// cannot be factored.
Matrix regularized_gram_inverse(const Matrix& x, double delta);

// (P^{-1} + w v v^T)^{-1} = P - P v (1/w + v^T P v)^{-1} v^T P
Matrix rank_one_inverse_update(const Matrix& p, const Vector& v, double w);

// (P^{-1} + U U^T)^{-1} = P - P U (I + U^T P U)^{-1} U^T P
Matrix rank_k_inverse_update(const Matrix& p, const Matrix& u);

// Gram-Schmidt (with one re-orthogonalization pass) so that W'^T W' = I and
// span(W') = span(W). Throws RankDeficient on a dependent column.
Matrix orthonormalize_columns(const Matrix& w);

struct EigenPairs {
  Vector values;   // descending
  Matrix vectors;  // unit columns, sign-canonicalized
};

// Top-k eigenpairs of a symmetric matrix.
EigenPairs sym_eig_desc(const Matrix& m, Index k);

// Flip the sign of each column so its first entry with |x| > 1e-12 is positive.
void canonicalize_column_signs(Matrix& m);
void canonicalize_sign(Eigen::Ref<Vector> v);

// ||a - b||_F / max(||b||_F, tiny)
double relative_frobenius(const Matrix& a, const Matrix& b);

}  // namespace isda

#endif  // ISDA_MATRIXCORE_HPP_
