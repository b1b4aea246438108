#pragma once

// Koopman regression for maps T: M -> N between different spaces.

#include <vector>

#include "koopman/dictionary.hpp"

namespace koopman {

/// Pairs (m_j, n_j = T(m_j)); column j of inputs/outputs is one pair.
struct PairedSamples {
  RMatrix inputs;
  RMatrix outputs;

  std::size_t count() const noexcept { return static_cast<std::size_t>(inputs.cols()); }
  /// Throws SizeError unless both blocks have the same (non-zero) count.
  void validate() const;
};

struct StaticFit {
  /// g(n_j) ~ A f(m_j)
  CMatrix A;
  /// ||Y - A X||_F
  double residual = 0.0;
  Eigen::Index rank = 0;
  bool rank_deficient = false;
};

/// A = Y X^+ with X = [f(m_1) ... f(m_N)] and Y = [g(n_1) ... g(n_N)]. A rank
/// deficient X still yields the minimum-norm solution, flagged.
StaticFit fit_static_linear(const PairedSamples& pairs, const ObservableDictionary& dict_in,
                            const ObservableDictionary& dict_out);

/// Weighted fiber means: within each fiber (equal label) every sample is
/// replaced by sum_l w_l f_l / sum_l w_l. Weights default to uniform.
CVector conditional_expectation_projection(const CVector& f, const std::vector<int>& fiber_labels,
                                           const RVector& weights = RVector());

/// The same projection as an explicit matrix, built entry by entry:
/// P(i, j) = w_j / W(fiber) when i and j share a fiber.
RMatrix fiber_projection_matrix(const std::vector<int>& fiber_labels, const RVector& weights = RVector());

/// Pullback after pushforward on a finite sample space: E (E^T W E)^{-1} E^T W,
/// with E the sample-by-fiber incidence matrix.
RMatrix pushforward_pullback_matrix(const std::vector<int>& fiber_labels, const RVector& weights = RVector());

}  // namespace koopman
