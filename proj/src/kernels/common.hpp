#pragma once

// Shared pieces of the kernel variants. Anything that both the scalar and the
// AVX2 path compute lives here so the operation order is written once.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "koopman/kernels.hpp"

namespace koopman::kernels::detail {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Taylor coefficients, exact to double rounding. |theta| <= pi/4 after
// reduction, so the first omitted terms are below 1e-19.
inline constexpr double kSin[] = {
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362880.0,
    -1.0 / 39916800.0,
    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0,
    1.0 / 355687428096000.0,
};
inline constexpr double kCos[] = {
    -1.0 / 2.0,
    1.0 / 24.0,
    -1.0 / 720.0,
    1.0 / 40320.0,
    -1.0 / 3628800.0,
    1.0 / 479001600.0,
    -1.0 / 87178291200.0,
    1.0 / 20922789888000.0,
    -1.0 / 6402373705728000.0,
};
inline constexpr int kSinTerms = sizeof(kSin) / sizeof(double);
inline constexpr int kCosTerms = sizeof(kCos) / sizeof(double);

inline void sincos_2pi_scalar(double t, double& s, double& c) {
  const double q = std::nearbyint(4.0 * t);
  const double r = t - 0.25 * q;
  const double theta = r * kTwoPi;
  const double theta2 = theta * theta;

  double ps = kSin[kSinTerms - 1];
  for (int k = kSinTerms - 2; k >= 0; --k) ps = ps * theta2 + kSin[k];
  const double sinv = theta + (theta * theta2) * ps;

  double pc = kCos[kCosTerms - 1];
  for (int k = kCosTerms - 2; k >= 0; --k) pc = pc * theta2 + kCos[k];
  const double cosv = 1.0 + theta2 * pc;

  const double quadrant = q - 4.0 * std::floor(q * 0.25);
  const bool swap = quadrant == 1.0 || quadrant == 3.0;
  const bool neg_s = quadrant == 2.0 || quadrant == 3.0;
  const bool neg_c = quadrant == 1.0 || quadrant == 2.0;
  double sb = swap ? cosv : sinv;
  double cb = swap ? sinv : cosv;
  s = neg_s ? -sb : sb;
  c = neg_c ? -cb : cb;
}

/// Reduce to [0, 1).
inline double wrap_unit(double v) {
  double f = v - std::floor(v);
  return f >= 1.0 ? 0.0 : f;
}

inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.imag() * b.real() + a.real() * b.imag()};
}

/// a * conj(b), written as a * (br, -bi) to match the vector path.
inline Complex mul_conj(Complex a, Complex b) {
  const double nbi = -b.imag();
  return {a.real() * b.real() - a.imag() * nbi, a.imag() * b.real() + a.real() * nbi};
}

inline Complex add(Complex a, Complex b) { return {a.real() + b.real(), a.imag() + b.imag()}; }

/// Pairwise tree over blocks of kBlock elements. block_sum(first, count)
/// returns the sum of one block.
template <class BlockSum>
Complex pairwise(std::size_t first_block, std::size_t last_block, std::size_t n,
                 const BlockSum& block_sum) {
  if (last_block - first_block == 1) {
    const std::size_t begin = first_block * kBlock;
    const std::size_t count = std::min(kBlock, n - begin);
    return block_sum(begin, count);
  }
  const std::size_t mid = first_block + (last_block - first_block) / 2;
  return add(pairwise(first_block, mid, n, block_sum), pairwise(mid, last_block, n, block_sum));
}

template <class BlockSum>
Complex reduce_blocks(std::size_t n, const BlockSum& block_sum) {
  if (n == 0) return {0.0, 0.0};
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  return pairwise(0, blocks, n, block_sum);
}

/// Lane accumulators folded in a fixed order: (a0 + a1) + (a2 + a3).
inline Complex fold(const Complex (&acc)[kAccumulators]) {
  return add(add(acc[0], acc[1]), add(acc[2], acc[3]));
}

/// One standard-map orbit with mode sums; the reference for every variant.
void standard_map_orbit_point(const OrbitSumsRequest& request, std::size_t point);

}  // namespace koopman::kernels::detail
