#pragma once

// Companion-matrix and pseudoinverse DMD, spectral triples.

#include <vector>

#include "koopman/snapshot.hpp"

namespace koopman {

/// Moore-Penrose pseudoinverse through the SVD. Singular values below
/// max(rows, cols) * eps * sigma_max are treated as zero.
CMatrix moore_penrose_pseudoinverse(const CMatrix& m);

/// Numerical rank under the same cutoff as moore_penrose_pseudoinverse.
Eigen::Index numerical_rank(const CMatrix& m);

struct CompanionModel {
  /// Free last column c = (c_1, ..., c_m).
  CVector c;
  /// m x m companion matrix: ones on the subdiagonal, c in the last column.
  CMatrix C;
  /// ||X' - X C||_F
  double residual = 0.0;
  bool used_exact_inverse = false;
  Warnings warnings;
};

/// Builds the companion matrix with X' = X C. Only the last column is unknown;
/// it is the exact solve X c = x'_m when X is square and well conditioned and
/// the least-squares solution c = X^+ x'_m otherwise.
CompanionModel companion_dmd(const SnapshotPair& p);

/// A = X' X^+, the Frobenius-norm minimizer of ||X' - A X||.
CMatrix pseudoinverse_dmd(const SnapshotPair& p);

struct SpectralTriple {
  std::vector<Complex> eigenvalues;
  /// Row j holds phi_j at the samples (columns of X), unit mean-square norm,
  /// phase fixed so the largest-magnitude sample is real positive.
  CMatrix eigenfunction_samples;
  /// Column j is the Koopman mode s_j (one entry per observable).
  CMatrix modes;
  /// max_k ||f(x_k) - sum_j phi_j(x_k) s_j|| / max_k ||f(x_k)||
  double reconstruction_residual = 0.0;
  /// Condition number of the eigenvector matrix.
  double eigenvector_condition = 0.0;
};

/// Eigenvalues of A, eigenfunction samples phi_j(x_k) = w_j^T f(x_k) with w_j
/// the eigenvectors of A^T, and least-squares modes reconstructing f.
/// Throws DefectiveError when cond(eigenvectors) >= max_condition.
SpectralTriple spectral_triple(const CMatrix& A, const SnapshotPair& p, double max_condition = 1e8);

struct ContinuousEigenvalues {
  std::vector<Complex> values;
  Warnings warnings;
};

/// log(lambda) / dt on the principal branch. Warns when |arg lambda| is
/// within `alias_margin` of pi. Throws SingularError for lambda == 0.
ContinuousEigenvalues continuous_time_eigenvalues(const std::vector<Complex>& discrete, double dt,
                                                  double alias_margin = 0.05);

/// Eigenvalues of a square complex matrix.
std::vector<Complex> eigenvalues(const CMatrix& A);

}  // namespace koopman
