#pragma once

// Finite-section (EDMD) estimate of the Koopman matrix in a dictionary basis
// and detection of closed sub-representations.

#include <string>
#include <vector>

#include "koopman/dictionary.hpp"

namespace koopman {

/// G = (F^dagger F)^{-1} F^dagger, so that G F = I exactly. The sampled dual
/// functions are ghat_k(x_l) = m * G(k, l), which makes the empirical duality
/// (1/m) sum_l f_j(x_l) ghat_k(x_l) = delta_jk hold at finite m.
/// Throws DegenerateError when cond(F^dagger F) >= max_condition; the error
/// lists the entries dominating the smallest right singular vector.
CMatrix dual_basis(const CMatrix& F, double max_condition = 1e12);

/// Entries u(k, j) with f_j o T = sum_k u(k, j) f_k.
struct FiniteSectionMatrix {
  CMatrix U;
  std::vector<std::string> names;
  /// Positions of the rows/columns in the original dictionary.
  std::vector<std::size_t> indices;
  std::size_t dictionary_size = 0;
  /// Number of (x_l, x_{l+1}) pairs used.
  std::size_t sample_count = 0;
  /// max |averaged form - least-squares form| over entries.
  double form_agreement = 0.0;
  Warnings warnings;
};

/// Matrix A with f o T = A f, i.e. U^T.
CMatrix eigenmatrix(const FiniteSectionMatrix& u);

/// From evaluations on consecutive samples: F rows are f(x_l), Fp rows are
/// f(x_{l+1}). Weights, when given, must be strictly positive (one per row).
/// The entries are the averages (1/m) sum_l f_j(x_{l+1}) ghat_k(x_l); the
/// least-squares solve F U = Fp is computed as a cross-check.
FiniteSectionMatrix finite_section_from_samples(const CMatrix& F, const CMatrix& Fp,
                                                const std::vector<std::string>& names,
                                                const RVector& weights = RVector());

/// Evaluates the dictionary along the trajectory and pairs x_l with x_{l+1}.
FiniteSectionMatrix finite_section_matrix(const ObservableDictionary& dict, const Trajectory& traj,
                                          const RVector& weights = RVector());

/// Principal submatrix on the original dictionary indices in `index_set` that
/// are still present in `u` (so compressions compose by intersection).
/// Throws UsageError for indices outside the dictionary or an empty result.
FiniteSectionMatrix compression(const FiniteSectionMatrix& u, const std::vector<std::size_t>& index_set);

struct LinearVerdict {
  bool is_linear = false;
  /// max over subset columns j of sum_{k outside} |u(k, j)|
  double leakage = 0.0;
  /// f_S o T = A f_S on the subset.
  CMatrix A;
  std::vector<std::string> names;
};

/// Subset and indices refer to the original dictionary.
LinearVerdict detect_linear_subrepresentation(const FiniteSectionMatrix& u, const std::vector<std::size_t>& subset,
                                              double tol = 1e-6);

struct LeakageTarget {
  std::size_t index = 0;
  std::string name;
  double magnitude = 0.0;
};

struct NonlinearVerdict {
  bool is_closed = false;
  double leakage = 0.0;
  /// n x (n + K): f_S o T = F_coeffs (f_S, f_L), library entries after the subset.
  CMatrix F_coeffs;
  std::vector<std::string> names;
  /// Entries outside subset and library that receive more than tol.
  std::vector<LeakageTarget> undeclared;
};

/// `library` lists dictionary entries declared to be functions of the subset
/// (for example f_3 = f_1 f_2).
NonlinearVerdict detect_nonlinear_representation(const FiniteSectionMatrix& u, const std::vector<std::size_t>& subset,
                                                 const std::vector<std::size_t>& library, double tol = 1e-6);

}  // namespace koopman
