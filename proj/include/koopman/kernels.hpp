#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation; an AVX2 variant is selected at runtime when the CPU supports
// it. Both variants perform the same floating-point operations in the same
// order, so their results are bit-identical (the library is compiled with
// -ffp-contract=off to keep it that way).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace koopman::kernels {

using Complex = std::complex<double>;

/// Lanes of the widest variant; the scalar code mirrors this accumulator layout.
inline constexpr std::size_t kAccumulators = 4;
/// Block length for the pairwise reduction tree of the dot kernels.
inline constexpr std::size_t kBlock = 256;

struct SeparationResult {
  double ratio_sq = 0.0;  // min ||df||^2 / ||ds||^2 over distinct pairs
  std::size_t i = 0;
  std::size_t j = 0;
  bool found = false;     // false when every pair is a duplicate state
};

/// Fourier mode e^{i 2 pi (kx x + ky y)} on the unit 2-torus.
struct TorusMode {
  int kx = 0;
  int ky = 0;
};

struct OrbitSumsRequest {
  std::span<const double> x0;
  std::span<const double> y0;
  double epsilon = 0.0;
  std::size_t iterations = 0;      // n: sums run over i = 0 .. n-1
  std::size_t half_iterations = 0; // partial sums are also stored at this count
  std::span<const TorusMode> modes;
  // Outputs, laid out [point * modes.size() + mode].
  std::span<Complex> sums;
  std::span<Complex> half_sums;
  // Final iterate of each point.
  std::span<double> x_end;
  std::span<double> y_end;
};

struct KernelTable {
  std::string_view name;

  /// sum_l a[l] * b[l]
  Complex (*dotu)(const Complex* a, const Complex* b, std::size_t n);
  /// sum_l a[l] * conj(b[l])
  Complex (*dotc)(const Complex* a, const Complex* b, std::size_t n);

  /// Minimum normalized separation over pairs i < j. Features and states are
  /// stored component-major: f[c * count + i].
  SeparationResult (*min_separation)(const double* features, std::size_t feature_dim,
                                     const double* states, std::size_t state_dim,
                                     std::size_t count);

  /// Iterate the standard map from many initial points, accumulating Fourier
  /// observables along each orbit.
  void (*standard_map_orbit_sums)(const OrbitSumsRequest& request);

  /// Elementwise sin(2 pi t), cos(2 pi t).
  void (*sincos_2pi)(const double* t, double* s, double* c, std::size_t n);
};

/// Scalar reference kernels, always available.
const KernelTable& scalar();

/// AVX2 kernels, or nullptr if not compiled in or not supported by this CPU.
const KernelTable* avx2();

/// Kernels used by the library. Chosen once: AVX2 when available unless the
/// environment variable KOOPMAN_KERNELS=scalar forces the reference path.
const KernelTable& active();

/// sin(2 pi t) and cos(2 pi t) with the same polynomial the kernels use.
void sincos_2pi(double t, double& s, double& c);
double sin_2pi(double t);

}  // namespace koopman::kernels
