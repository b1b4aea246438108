#include <limits>

#include "kernels/common.hpp"

namespace koopman::kernels {
namespace detail {

void standard_map_orbit_point(const OrbitSumsRequest& request, std::size_t point) {
  const std::size_t nm = request.modes.size();
  Complex* sums = request.sums.data() + point * nm;
  Complex* half = request.half_sums.data() + point * nm;
  for (std::size_t m = 0; m < nm; ++m) sums[m] = {0.0, 0.0};

  double x = request.x0[point];
  double y = request.y0[point];
  for (std::size_t it = 0; it < request.iterations; ++it) {
    if (it == request.half_iterations) {
      for (std::size_t m = 0; m < nm; ++m) half[m] = sums[m];
    }
    for (std::size_t m = 0; m < nm; ++m) {
      const double t = static_cast<double>(request.modes[m].kx) * x +
                       static_cast<double>(request.modes[m].ky) * y;
      double s, c;
      sincos_2pi_scalar(t, s, c);
      sums[m] = add(sums[m], Complex{c, s});
    }
    double sx, cx;
    sincos_2pi_scalar(x, sx, cx);
    const double kick = request.epsilon * sx;
    const double yn = y + kick;
    x = wrap_unit(x + yn);
    y = wrap_unit(yn);
  }
  if (request.half_iterations >= request.iterations) {
    for (std::size_t m = 0; m < nm; ++m) half[m] = sums[m];
  }
  request.x_end[point] = x;
  request.y_end[point] = y;
}

}  // namespace detail

namespace {

using detail::add;
using detail::fold;

template <bool Conj>
Complex dot_impl(const Complex* a, const Complex* b, std::size_t n) {
  return detail::reduce_blocks(n, [&](std::size_t begin, std::size_t count) {
    Complex acc[kAccumulators] = {};
    for (std::size_t l = 0; l < count; ++l) {
      const Complex p = Conj ? detail::mul_conj(a[begin + l], b[begin + l])
                             : detail::mul(a[begin + l], b[begin + l]);
      acc[l % kAccumulators] = add(acc[l % kAccumulators], p);
    }
    return fold(acc);
  });
}

Complex dotu(const Complex* a, const Complex* b, std::size_t n) { return dot_impl<false>(a, b, n); }
Complex dotc(const Complex* a, const Complex* b, std::size_t n) { return dot_impl<true>(a, b, n); }

SeparationResult min_separation(const double* f, std::size_t fd, const double* s, std::size_t sd,
                                std::size_t count) {
  SeparationResult best;
  best.ratio_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
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
      if (ratio < best.ratio_sq) {
        best.ratio_sq = ratio;
        best.i = i;
        best.j = j;
        best.found = true;
      }
    }
  }
  if (!best.found) best.ratio_sq = 0.0;
  return best;
}

void standard_map_orbit_sums(const OrbitSumsRequest& request) {
  for (std::size_t p = 0; p < request.x0.size(); ++p) detail::standard_map_orbit_point(request, p);
}

void sincos_array(const double* t, double* s, double* c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) detail::sincos_2pi_scalar(t[i], s[i], c[i]);
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar", dotu, dotc, min_separation, standard_map_orbit_sums,
                                 sincos_array};
  return table;
}

void sincos_2pi(double t, double& s, double& c) { detail::sincos_2pi_scalar(t, s, c); }

double sin_2pi(double t) {
  double s, c;
  detail::sincos_2pi_scalar(t, s, c);
  return s;
}

}  // namespace koopman::kernels
