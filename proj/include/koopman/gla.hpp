#pragma once

// Time averages, harmonic (GLA) averages at a known eigenvalue, and partitions
// of state space into joint level sets.

#include <optional>
#include <string>
#include <vector>

#include "koopman/dictionary.hpp"

namespace koopman {

/// Cell-centred nx x ny grid on [x0, x1) x [y0, y1). Point p = ix + nx * iy.
struct Grid2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
  /// Coordinates wrap around (the unit torus of the standard map).
  bool periodic = true;

  std::size_t size() const noexcept { return nx * ny; }
  /// 2 x size() matrix of grid points.
  RMatrix points() const;
  /// Nearest grid point, or nullopt outside a non-periodic grid.
  std::optional<std::size_t> nearest(double x, double y) const;
};

struct TimeAverageField {
  /// dim x P initial states.
  RMatrix grid;
  /// P x N_obs averages g*(m) = (1/n) sum_{i<n} g(T^i m); NaN where diverged.
  CMatrix values;
  /// Per point: max over observables of |avg(n) - avg(n/2)|.
  RVector cesaro;
  std::vector<bool> diverged;
  std::vector<std::string> names;
  std::size_t n_iterations = 0;
  double dt = 0.0;
};

/// Averages along each orbit starting at the grid columns. Maps iterate; flows
/// take n RK4 steps of size dt (dt > 0 required). The standard map with
/// Fourier/sin/cos observables of period 1 uses the batched kernel.
TimeAverageField time_average(const ObservableDictionary& dict, const SystemSpec& spec, const RMatrix& grid,
                              std::size_t n, double dt = 0.0);

struct GlaResult {
  /// phi_n at trajectory positions 0 .. count-1.
  CVector samples;
  /// ||phi(k+1) - lambda phi(k)|| / ||phi|| over the returned positions.
  double residual = 0.0;
  /// residual * n
  double constant = 0.0;
  std::size_t window = 0;
  Warnings warnings;
};

/// Harmonic average phi_n(x_k) = (1/n) sum_{j<n} lambda^{-j} g(x_{k+j}) for the
/// series g sampled along one trajectory. count = 0 returns every position
/// with a full window (size - n + 1).
GlaResult gla_eigenfunction(const CVector& g, Complex lambda, std::size_t n, std::size_t count = 0);

struct PartitionLabeling {
  /// One label per point, dense 0 .. cells-1; -1 for excluded (diverged) points.
  std::vector<int> cell_id;
  int cells = 0;
  /// Quantile edges per binned column (real part, then imaginary part of
  /// complex observables).
  std::vector<std::vector<double>> bin_edges;
  std::vector<std::string> columns;
};

/// Quantile bins of each time-average column; a cell is a joint bin tuple.
/// Columns whose imaginary part vanishes everywhere are binned on the real part
/// only.
PartitionLabeling ergodic_partition_approx(const TimeAverageField& field, int bins_per_obs);

/// Same for an explicit P x N real matrix of values (used for level sets of any
/// sampled functions).
PartitionLabeling quantile_partition(const RMatrix& values, int bins_per_column,
                                     const std::vector<std::string>& columns = {},
                                     const std::vector<bool>& excluded = {});

/// Fraction of (point, k) pairs, k = 1 .. n_test, whose label equals the label
/// of the grid point nearest to T^k(point). Flows step with RK4 of size dt.
double partition_invariance_score(const PartitionLabeling& labeling, const Grid2D& grid, const SystemSpec& spec,
                                  std::size_t n_test, double dt = 0.0);

struct EigenfunctionPartition {
  PartitionLabeling labeling;
  /// Raw cell index (magnitude bin * phase_bins + phase bin) of
  /// multiplier * phi, the cell the evolution rule predicts.
  std::vector<int> predicted;
  /// Raw cell index of phi after evolution.
  std::vector<int> observed;
  double mismatch_rate = 0.0;
};

/// Level sets of |phi| (quantile bins) and arg phi (equal-width bins on
/// (-pi, pi]). The rule A_alpha -> A_{alpha multiplier} is checked against
/// phi_evolved, the eigenfunction sampled at the evolved points.
EigenfunctionPartition eigenfunction_partition(const CVector& phi, const CVector& phi_evolved, Complex multiplier,
                                               int magnitude_bins, int phase_bins);

}  // namespace koopman
