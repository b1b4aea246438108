#pragma once

// Checks of representations (f, F) with f o T = F(f) on sampled data.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "koopman/dictionary.hpp"
#include "koopman/dmd.hpp"

namespace koopman {

using VectorMap = std::function<CVector(const CVector&)>;

/// f together with F. For continuous-time models F gives the time derivative
/// of f instead of its value one step later.
struct RepresentationModel {
  enum class Kind { linear, library, explicit_map };

  std::vector<std::string> observables;
  Kind kind = Kind::explicit_map;
  /// linear: f o T = A f
  CMatrix A;
  /// library: f o T = C^T theta(x), theta the library evaluated at the state;
  /// one column of C per observable.
  CMatrix C;
  ObservableDictionary library;
  /// explicit: f o T = F(f)
  VectorMap F;
  bool continuous_time = false;
  double residual = 0.0;
  std::optional<double> faithful_score;
  std::size_t iterations = 0;

  static RepresentationModel linear(std::vector<std::string> names, CMatrix A);
  static RepresentationModel from_map(std::vector<std::string> names, VectorMap F);

  /// F applied to f values. Library models evaluate the library at the real
  /// part of f, so their observables must be the state coordinates.
  CVector apply(const CVector& f) const;
};

/// Fourth-order central differences of the rows of `samples` (L x n); the two
/// boundary rows at each end are dropped, so the result has L - 4 rows aligned
/// with rows 2 .. L-3.
CMatrix central_difference4(const CMatrix& samples, double dt);

/// Discrete models: max_k ||f(x_{k+1}) - F(f(x_k))|| / max_k ||f(x_k)||.
/// Continuous models: the same with the fourth-order derivative estimate in
/// place of f(x_{k+1}); dt must then be > 0. f_samples is L x n.
double representation_residual(const RepresentationModel& model, const CMatrix& f_samples, double dt = 0.0);

struct FaithfulnessResult {
  /// min over distinct state pairs of ||f(m) - f(n)|| / ||m - n||
  double score = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  /// false when every pair has identical states
  bool found = false;
};

/// features: L x d (complex entries count as two real coordinates), states: L x s.
FaithfulnessResult faithfulness_estimate(const CMatrix& features, const RMatrix& states);

/// Checks h_inv(h(g)) = g on the samples (PreconditionError beyond 1e-8
/// relative), then returns max ||h(G(g)) - F(h(g))|| / max ||h(g)||.
/// G acts on rep1 coordinates g, F on rep2 coordinates f = h(g).
double conjugacy_check(const VectorMap& G, const VectorMap& F, const VectorMap& h, const VectorMap& h_inv,
                       const std::vector<CVector>& g_samples);

struct SindyOptions {
  /// Coefficients with |c| below the threshold are zeroed.
  double threshold = 0.05;
  /// Threshold relative to max |c| of the first least-squares solve.
  bool relative = true;
  std::size_t max_iterations = 20;
};

/// Sequentially thresholded least squares for Y = Theta C. Theta is m x p,
/// Y is m x d. Returns C (p x d) and the number of iterations used.
std::pair<CMatrix, std::size_t> sequential_thresholded_lsq(const CMatrix& Theta, const CMatrix& Y,
                                                          const SindyOptions& options);

/// Fits the coordinates of `traj`: one step ahead for maps, derivatives by
/// fourth-order central differences for flows. Throws DegenerateError when
/// every coefficient is thresholded away.
RepresentationModel sindy_fit(const Trajectory& traj, const ObservableDictionary& library,
                              const SindyOptions& options = {});

struct StabilityOptions {
  /// Faithfulness scores at or below this fail the check.
  double faithful_threshold = 1e-6;
  /// 0 counts as attained when min_k ||phi(x_k)|| <= zero_tol * max_k ||phi(x_k)||.
  double zero_tol = 1e-3;
};

struct StabilityVerdict {
  bool certified = false;
  /// "", "spectrum", "faithfulness" or "zero_in_range"
  std::string failed;
  std::string message;
};

/// Global-stability test from eigenfunctions: all Re lambda < 0, the
/// eigenfunction set faithful, and 0 in the sampled range of phi. Checked in
/// that order. eigenfunction_samples has one row per eigenfunction.
StabilityVerdict stability_certificate(std::span<const Complex> generator_eigenvalues,
                                       const CMatrix& eigenfunction_samples, double faithful_score,
                                       const StabilityOptions& options = {});

/// Uses log(lambda)/dt for dt > 0 and |lambda| < 1 as the spectral test for
/// dt == 0 (discrete time).
StabilityVerdict stability_certificate(const SpectralTriple& triple, double dt, double faithful_score,
                                       const StabilityOptions& options = {});

struct EfficiencyHeuristic {
  /// Smallest ratio sigma_min / sigma_max of local Jacobian estimates of f.
  double min_singular_ratio = 0.0;
  /// Observables exceed the local rank somewhere, a necessary condition for
  /// one of them being a function of the others.
  bool dependent = false;
};

/// Local affine fits f ~ a + J (s - s0) from the `neighbors` nearest samples of
/// every `stride`-th sample. Heuristic only.
EfficiencyHeuristic efficiency_heuristic(const CMatrix& features, const RMatrix& states, std::size_t neighbors = 12,
                                         std::size_t stride = 1, double rank_tol = 1e-6);

}  // namespace koopman
