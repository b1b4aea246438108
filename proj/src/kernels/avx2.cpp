// AVX2 variants. Each routine mirrors its scalar reference operation by
// operation; see common.hpp.

#include <immintrin.h>

#include <limits>

#include "kernels/common.hpp"

namespace koopman::kernels::detail {
namespace {

inline __m256d load2(const Complex* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }

inline __m256d sign_mask() { return _mm256_set1_pd(-0.0); }

// (a0, a1) * (b0, b1) as interleaved complex pairs.
inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d br = _mm256_movedup_pd(b);
  const __m256d bi = _mm256_permute_pd(b, 0b1111);
  const __m256d as = _mm256_permute_pd(a, 0b0101);
  return _mm256_addsub_pd(_mm256_mul_pd(a, br), _mm256_mul_pd(as, bi));
}

// a * conj(b): negate the imaginary lanes of b first.
inline __m256d cmul_conj(__m256d a, __m256d b) {
  const __m256d imag_sign = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
  return cmul(a, _mm256_xor_pd(b, imag_sign));
}

template <bool Conj>
Complex dot_impl(const Complex* a, const Complex* b, std::size_t n) {
  return reduce_blocks(n, [&](std::size_t begin, std::size_t count) {
    __m256d acc01 = _mm256_setzero_pd();
    __m256d acc23 = _mm256_setzero_pd();
    std::size_t l = 0;
    for (; l + kAccumulators <= count; l += kAccumulators) {
      const Complex* pa = a + begin + l;
      const Complex* pb = b + begin + l;
      if constexpr (Conj) {
        acc01 = _mm256_add_pd(acc01, cmul_conj(load2(pa), load2(pb)));
        acc23 = _mm256_add_pd(acc23, cmul_conj(load2(pa + 2), load2(pb + 2)));
      } else {
        acc01 = _mm256_add_pd(acc01, cmul(load2(pa), load2(pb)));
        acc23 = _mm256_add_pd(acc23, cmul(load2(pa + 2), load2(pb + 2)));
      }
    }
    Complex acc[kAccumulators];
    _mm256_storeu_pd(reinterpret_cast<double*>(&acc[0]), acc01);
    _mm256_storeu_pd(reinterpret_cast<double*>(&acc[2]), acc23);
    for (; l < count; ++l) {
      const Complex p = Conj ? mul_conj(a[begin + l], b[begin + l]) : mul(a[begin + l], b[begin + l]);
      acc[l % kAccumulators] = add(acc[l % kAccumulators], p);
    }
    return fold(acc);
  });
}

Complex dotu(const Complex* a, const Complex* b, std::size_t n) { return dot_impl<false>(a, b, n); }
Complex dotc(const Complex* a, const Complex* b, std::size_t n) { return dot_impl<true>(a, b, n); }

SeparationResult min_separation(const double* f, std::size_t fd, const double* s, std::size_t sd,
                                std::size_t count) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  SeparationResult best;
  best.ratio_sq = inf;
  const __m256d zero = _mm256_setzero_pd();
  for (std::size_t i = 0; i < count; ++i) {
    __m256d lane_best = _mm256_set1_pd(inf);
    __m256d lane_j = _mm256_setzero_pd();
    std::size_t j = i + 1;
    for (; j + 4 <= count; j += 4) {
      __m256d df2 = zero;
      for (std::size_t c = 0; c < fd; ++c) {
        const __m256d d = _mm256_sub_pd(_mm256_set1_pd(f[c * count + i]), _mm256_loadu_pd(f + c * count + j));
        df2 = _mm256_add_pd(df2, _mm256_mul_pd(d, d));
      }
      __m256d ds2 = zero;
      for (std::size_t c = 0; c < sd; ++c) {
        const __m256d d = _mm256_sub_pd(_mm256_set1_pd(s[c * count + i]), _mm256_loadu_pd(s + c * count + j));
        ds2 = _mm256_add_pd(ds2, _mm256_mul_pd(d, d));
      }
      const __m256d distinct = _mm256_cmp_pd(ds2, zero, _CMP_NEQ_OQ);
      const __m256d ratio = _mm256_div_pd(df2, ds2);
      const __m256d better = _mm256_and_pd(distinct, _mm256_cmp_pd(ratio, lane_best, _CMP_LT_OQ));
      const double jd = static_cast<double>(j);
      const __m256d js = _mm256_set_pd(jd + 3.0, jd + 2.0, jd + 1.0, jd);
      lane_best = _mm256_blendv_pd(lane_best, ratio, better);
      lane_j = _mm256_blendv_pd(lane_j, js, better);
    }
    double cand_r[5];
    double cand_j[5];
    _mm256_storeu_pd(cand_r, lane_best);
    _mm256_storeu_pd(cand_j, lane_j);
    cand_r[4] = inf;
    cand_j[4] = 0.0;
    for (; j < count; ++j) {
      double df2 = 0.0;
      for (std::size_t c = 0; c < fd; ++c) {
        const double d = f[c * count + i] - f[c * count + j];
        df2 = df2 + d * d;
      }
      double ds2 = 0.0;
      for (std::size_t c = 0; c < sd; ++c) {
        const double d = s[c * count + i] - s[c * count + j];
        ds2 = ds2 + d * d;
      }
      if (ds2 == 0.0) continue;
      const double ratio = df2 / ds2;
      if (ratio < cand_r[4]) {
        cand_r[4] = ratio;
        cand_j[4] = static_cast<double>(j);
      }
    }
    int pick = -1;
    for (int k = 0; k < 5; ++k) {
      if (!(cand_r[k] < inf)) continue;
      if (pick < 0 || cand_r[k] < cand_r[pick] || (cand_r[k] == cand_r[pick] && cand_j[k] < cand_j[pick]))
        pick = k;
    }
    if (pick >= 0 && cand_r[pick] < best.ratio_sq) {
      best.ratio_sq = cand_r[pick];
      best.i = i;
      best.j = static_cast<std::size_t>(cand_j[pick]);
      best.found = true;
    }
  }
  if (!best.found) best.ratio_sq = 0.0;
  return best;
}

inline void sincos_vec(__m256d t, __m256d& s, __m256d& c) {
  const __m256d q = _mm256_round_pd(_mm256_mul_pd(_mm256_set1_pd(4.0), t),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d r = _mm256_sub_pd(t, _mm256_mul_pd(_mm256_set1_pd(0.25), q));
  const __m256d theta = _mm256_mul_pd(r, _mm256_set1_pd(kTwoPi));
  const __m256d theta2 = _mm256_mul_pd(theta, theta);

  __m256d ps = _mm256_set1_pd(kSin[kSinTerms - 1]);
  for (int k = kSinTerms - 2; k >= 0; --k) ps = _mm256_add_pd(_mm256_mul_pd(ps, theta2), _mm256_set1_pd(kSin[k]));
  const __m256d sinv = _mm256_add_pd(theta, _mm256_mul_pd(_mm256_mul_pd(theta, theta2), ps));

  __m256d pc = _mm256_set1_pd(kCos[kCosTerms - 1]);
  for (int k = kCosTerms - 2; k >= 0; --k) pc = _mm256_add_pd(_mm256_mul_pd(pc, theta2), _mm256_set1_pd(kCos[k]));
  const __m256d cosv = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_mul_pd(theta2, pc));

  const __m256d quadrant =
      _mm256_sub_pd(q, _mm256_mul_pd(_mm256_set1_pd(4.0), _mm256_floor_pd(_mm256_mul_pd(q, _mm256_set1_pd(0.25)))));
  const __m256d eq1 = _mm256_cmp_pd(quadrant, _mm256_set1_pd(1.0), _CMP_EQ_OQ);
  const __m256d eq2 = _mm256_cmp_pd(quadrant, _mm256_set1_pd(2.0), _CMP_EQ_OQ);
  const __m256d eq3 = _mm256_cmp_pd(quadrant, _mm256_set1_pd(3.0), _CMP_EQ_OQ);
  const __m256d swap = _mm256_or_pd(eq1, eq3);
  const __m256d neg_s = _mm256_or_pd(eq2, eq3);
  const __m256d neg_c = _mm256_or_pd(eq1, eq2);
  const __m256d sb = _mm256_blendv_pd(sinv, cosv, swap);
  const __m256d cb = _mm256_blendv_pd(cosv, sinv, swap);
  s = _mm256_blendv_pd(sb, _mm256_xor_pd(sb, sign_mask()), neg_s);
  c = _mm256_blendv_pd(cb, _mm256_xor_pd(cb, sign_mask()), neg_c);
}

inline __m256d wrap_unit_vec(__m256d v) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d f = _mm256_sub_pd(v, _mm256_floor_pd(v));
  return _mm256_blendv_pd(f, _mm256_setzero_pd(), _mm256_cmp_pd(f, one, _CMP_GE_OQ));
}

void standard_map_orbit_sums(const OrbitSumsRequest& request) {
  const std::size_t count = request.x0.size();
  const std::size_t nm = request.modes.size();
  const __m256d eps = _mm256_set1_pd(request.epsilon);
  constexpr std::size_t kMaxModes = 32;
  if (nm > kMaxModes) {
    for (std::size_t p = 0; p < count; ++p) standard_map_orbit_point(request, p);
    return;
  }
  __m256d re[kMaxModes];
  __m256d im[kMaxModes];
  __m256d kx[kMaxModes];
  __m256d ky[kMaxModes];
  for (std::size_t m = 0; m < nm; ++m) {
    kx[m] = _mm256_set1_pd(static_cast<double>(request.modes[m].kx));
    ky[m] = _mm256_set1_pd(static_cast<double>(request.modes[m].ky));
  }
  auto store_sums = [&](Complex* out, std::size_t p0) {
    for (std::size_t m = 0; m < nm; ++m) {
      double r[4], i[4];
      _mm256_storeu_pd(r, re[m]);
      _mm256_storeu_pd(i, im[m]);
      for (std::size_t lane = 0; lane < 4; ++lane) out[(p0 + lane) * nm + m] = Complex{r[lane], i[lane]};
    }
  };

  std::size_t p = 0;
  for (; p + 4 <= count; p += 4) {
    __m256d x = _mm256_loadu_pd(request.x0.data() + p);
    __m256d y = _mm256_loadu_pd(request.y0.data() + p);
    for (std::size_t m = 0; m < nm; ++m) re[m] = im[m] = _mm256_setzero_pd();
    for (std::size_t it = 0; it < request.iterations; ++it) {
      if (it == request.half_iterations) store_sums(request.half_sums.data(), p);
      for (std::size_t m = 0; m < nm; ++m) {
        const __m256d t = _mm256_add_pd(_mm256_mul_pd(kx[m], x), _mm256_mul_pd(ky[m], y));
        __m256d sv, cv;
        sincos_vec(t, sv, cv);
        re[m] = _mm256_add_pd(re[m], cv);
        im[m] = _mm256_add_pd(im[m], sv);
      }
      __m256d sx, cx;
      sincos_vec(x, sx, cx);
      const __m256d yn = _mm256_add_pd(y, _mm256_mul_pd(eps, sx));
      x = wrap_unit_vec(_mm256_add_pd(x, yn));
      y = wrap_unit_vec(yn);
    }
    if (request.half_iterations >= request.iterations) store_sums(request.half_sums.data(), p);
    store_sums(request.sums.data(), p);
    _mm256_storeu_pd(request.x_end.data() + p, x);
    _mm256_storeu_pd(request.y_end.data() + p, y);
  }
  for (; p < count; ++p) standard_map_orbit_point(request, p);
}

void sincos_array(const double* t, double* s, double* c, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d sv, cv;
    sincos_vec(_mm256_loadu_pd(t + i), sv, cv);
    _mm256_storeu_pd(s + i, sv);
    _mm256_storeu_pd(c + i, cv);
  }
  for (; i < n; ++i) sincos_2pi_scalar(t[i], s[i], c[i]);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", dotu, dotc, min_separation, standard_map_orbit_sums, sincos_array};
  return table;
}

}  // namespace koopman::kernels::detail
