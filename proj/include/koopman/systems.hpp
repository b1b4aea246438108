#pragma once

// Benchmark dynamical systems with known Koopman spectral data.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "koopman/types.hpp"

namespace koopman {

enum class SystemKind {
  torus_rotation,
  circle_rotation,
  standard_map,
  lorenz,
  limit_cycle_polar,
  pendulum,
  duffing_cycle,
  coupled_lc_lorenz,
  linear_map,
  free_particle,
};

std::string_view to_string(SystemKind kind);
SystemKind system_kind_from_string(std::string_view name);
const std::vector<SystemKind>& all_system_kinds();

/// True for discrete-time maps, false for flows.
bool is_map(SystemKind kind);

/// A system and its parameters. Construct through create(), which fills
/// defaults, rejects unknown names and checks parameter ranges.
///
/// Parameter names by kind:
///   torus_rotation     omega1, omega2
///   circle_rotation    omega
///   standard_map       epsilon (>= 0)
///   lorenz             sigma, rho, beta
///   limit_cycle_polar  omega
///   pendulum           g, l (> 0); theta measured from the upward vertical,
///                      so w' = (g/l) sin(theta)
///   duffing_cycle      c, omega
///   coupled_lc_lorenz  omega, sigma, rho, beta, coupling (> 0); the radial
///                      rate is (1 + f) with f = coupling / (1 + x^2 + y^2 + z^2)
///   linear_map         B_i_j entries of a square matrix
///   free_particle      mass (> 0)
class SystemSpec {
 public:
  static SystemSpec create(SystemKind kind, std::map<std::string, double> params = {});

  SystemKind kind() const noexcept { return kind_; }
  const std::map<std::string, double>& params() const noexcept { return params_; }
  double param(const std::string& name) const;

  /// State dimension of the system.
  std::size_t dimension() const;
  /// Matrix of a linear_map; throws UsageError for other kinds.
  RMatrix linear_matrix() const;

  bool operator==(const SystemSpec&) const = default;

 private:
  SystemSpec(SystemKind kind, std::map<std::string, double> params)
      : kind_(kind), params_(std::move(params)) {}

  SystemKind kind_;
  std::map<std::string, double> params_;
};

/// Ordered samples of one run. Column k of states() is the state at step k.
/// Immutable after construction.
class Trajectory {
 public:
  Trajectory(RMatrix states, double dt, std::optional<SystemSpec> origin = std::nullopt);

  std::size_t size() const noexcept { return static_cast<std::size_t>(states_.cols()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(states_.rows()); }
  double dt() const noexcept { return dt_; }
  double time(std::size_t k) const noexcept { return dt_ * static_cast<double>(k); }
  StateVector state(std::size_t k) const { return states_.col(static_cast<Eigen::Index>(k)); }
  const RMatrix& states() const noexcept { return states_; }
  const std::optional<SystemSpec>& origin() const noexcept { return origin_; }

 private:
  RMatrix states_;
  double dt_;
  std::optional<SystemSpec> origin_;
};

StateVector step_map(const SystemSpec& spec, const StateVector& s);
StateVector vector_field(const SystemSpec& spec, const StateVector& s);

/// Advances a state by one step in place: the map itself, or one classical RK4
/// step of size dt for flows. Holds scratch buffers, so one Stepper per thread.
class Stepper {
 public:
  Stepper(const SystemSpec& spec, double dt);
  void advance(StateVector& s);
  double dt() const noexcept { return dt_; }

 private:
  SystemSpec spec_;
  double dt_;
  bool map_;
  RMatrix b_;
  RVector k1_, k2_, k3_, k4_, tmp_;
};

/// n_steps + 1 states starting at s0. Fixed-step classical RK4 for flows,
/// exact iteration for maps (dt is recorded as 0 for maps).
Trajectory integrate(const SystemSpec& spec, const StateVector& s0, double dt, std::size_t n_steps);

/// Pendulum energy w^2/2 + (g/l) cos(theta) for s = (theta, w); conserved by
/// the pendulum vector field.
double hamiltonian(const StateVector& s, double g, double l);

struct KnownSpectrum {
  std::vector<Complex> eigenvalues;
  /// Generator eigenvalues (flows) rather than one-step multipliers (maps).
  bool continuous_time = false;
};

/// Principal eigenvalues known in closed form.
KnownSpectrum known_spectrum(const SystemSpec& spec);

/// Fixed-point eigenvalues (-c +- sqrt(c^2 - 8)) / 2 of the Duffing-type
/// oscillator; the first has non-negative imaginary part.
std::pair<Complex, Complex> duffing_fixed_point_eigenvalues(double c);

/// { i n omega + m . beta : |n| <= max_n, m in N^k, |m| <= max_m }, sorted by
/// (n, m) in lexicographic order.
std::vector<Complex> lattice_spectrum(double omega, const std::vector<Complex>& betas, int max_n,
                                      int max_m);

struct LatticePoint {
  int n = 0;
  int m = 0;
  Complex value;
};

/// The {0..max_n} x {0..max_m} grid i n omega + m beta of the Duffing-type
/// limit-cycling system, beta being its principal fixed-point eigenvalue.
std::vector<LatticePoint> duffing_lattice(double c, double omega, int max_n, int max_m);

}  // namespace koopman
