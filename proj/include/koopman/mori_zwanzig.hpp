#pragma once

// Projection of Koopman evolution onto the span of chosen observables.

#include <vector>

#include "koopman/types.hpp"

namespace koopman {

struct MzDecomposition {
  /// Samples in the projection window (m = L - k_max).
  Eigen::Index window = 0;
  /// Finite section of the span, S o T ~ S U_n on the window.
  CMatrix section_matrix;
  /// Index k = 0 .. k_max: window samples (m x targets) of P U^k f and Q U^k f.
  std::vector<CMatrix> resolved;
  std::vector<CMatrix> orthogonal;
  /// RMS norms over the window, one row per k, one column per target.
  RMatrix resolved_norm;
  RMatrix orthogonal_norm;
  /// ||U^k f - (PU)^k f - (QU)^k f||; the memory terms of the expansion in
  /// aggregate. Row 0 is zero by definition.
  RMatrix cross_norm;
  /// max_k ||P U^k f + Q U^k f - U^k f|| (RMS).
  double decomposition_error = 0.0;
};

/// `span` (L x n) holds the spanning observables along a trajectory and
/// `targets` (L x t) the observables f being evolved. P is the orthogonal
/// projection onto the span columns over the first m = L - k_max samples.
/// Throws DegenerateError when the span is rank deficient on the window.
MzDecomposition mz_decompose(const CMatrix& span, const CMatrix& targets, std::size_t k_max);

/// f = sum_n c_n z^n on the unit circle, n = 0 .. N_max.
struct FourierObservable {
  std::vector<Complex> coefficients;
  std::size_t max_degree() const noexcept { return coefficients.empty() ? 0 : coefficients.size() - 1; }
};

struct ClosureResult {
  /// sum |c_n|^2 e^{i n omega} / sum |c_n|^2
  Complex lambda_analytic;
  /// <Uf, f> / <f, f> on the uniform grid.
  Complex lambda_empirical;
  double lambda_agreement = 0.0;
  /// ||QUf - (1 - lambda) Uf|| / ||Uf||, P the projection onto span{f}.
  double residual_markov = 0.0;
  /// |lambda| ||Uf - f|| / ||Uf||, which residual_markov equals algebraically.
  double residual_closed_form = 0.0;
  /// ||QUf|| / ||Uf||
  double orthogonal_fraction = 0.0;
  Warnings warnings;
};

/// Throws PreconditionError when omega / 2 pi is within tol of p / q for some
/// q <= max_denominator, UsageError for a zero observable or m_samples <= 2 N_max.
ClosureResult circle_rotation_closure(const FourierObservable& f, double omega, std::size_t m_samples);

/// Smallest q <= max_denominator with |x - p/q| <= tol for some p, or 0.
std::size_t rational_denominator(double x, std::size_t max_denominator = 1000, double tol = 1e-10);

}  // namespace koopman
