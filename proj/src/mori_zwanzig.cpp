#include "koopman/mori_zwanzig.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "koopman/finite_section.hpp"
#include "koopman/kernels.hpp"

namespace koopman {

MzDecomposition mz_decompose(const CMatrix& span, const CMatrix& targets, std::size_t k_max) {
  if (k_max < 1) throw UsageError("mz_decompose: k_max must be >= 1");
  if (span.rows() != targets.rows()) throw SizeError("mz_decompose: span and targets have different lengths");
  if (span.cols() < 1 || targets.cols() < 1) throw UsageError("mz_decompose: empty span or targets");
  const auto K = static_cast<Eigen::Index>(k_max);
  const Eigen::Index m = span.rows() - K;
  if (m < span.cols()) throw SizeError("mz_decompose: trajectory too short for the span and k_max");

  MzDecomposition d;
  d.window = m;
  const CMatrix S = span.topRows(m);
  const CMatrix G = dual_basis(S);
  d.section_matrix = G * span.middleRows(1, m);

  const Eigen::Index t = targets.cols();
  const double rms = 1.0 / std::sqrt(static_cast<double>(m));
  d.resolved_norm = RMatrix::Zero(K + 1, t);
  d.orthogonal_norm = RMatrix::Zero(K + 1, t);
  d.cross_norm = RMatrix::Zero(K + 1, t);
  for (Eigen::Index k = 0; k <= K; ++k) {
    const CMatrix total = targets.middleRows(k, m);
    CMatrix res = S * (G * total);
    CMatrix orth = total - res;
    d.decomposition_error = std::max(d.decomposition_error, (res + orth - total).norm() * rms);
    d.resolved_norm.row(k) = res.colwise().norm() * rms;
    d.orthogonal_norm.row(k) = orth.colwise().norm() * rms;
    d.resolved.push_back(std::move(res));
    d.orthogonal.push_back(std::move(orth));
  }

  // Pure paths (PU)^k f and (QU)^k f. The Q path is tracked symbolically as
  // f o T^k - sum_r (S o T^r) a_r, which data shifts can evaluate.
  for (Eigen::Index c = 0; c < t; ++c) {
    const CVector c1 = G * targets.col(c).segment(1, m);
    CVector p_coef = c1;  // (PU)^k f = S p_coef
    std::vector<CVector> q_coefs;
    for (Eigen::Index k = 1; k <= K; ++k) {
      // U g_{k-1} on the window.
      CVector u = targets.col(c).segment(k, m);
      for (std::size_t r = 0; r < q_coefs.size(); ++r)
        u -= span.middleRows(static_cast<Eigen::Index>(r) + 1, m) * q_coefs[r];
      const CVector a_new = G * u;
      q_coefs.insert(q_coefs.begin(), a_new);
      const CVector q_path = u - S * a_new;

      if (k > 1) p_coef = d.section_matrix * p_coef;
      const CVector p_path = S * p_coef;
      const CVector total = targets.col(c).segment(k, m);
      d.cross_norm(k, c) = (total - p_path - q_path).norm() * rms;
    }
  }
  return d;
}

std::size_t rational_denominator(double x, std::size_t max_denominator, double tol) {
  for (std::size_t q = 1; q <= max_denominator; ++q) {
    const double qx = static_cast<double>(q) * x;
    if (std::abs(qx - std::round(qx)) <= static_cast<double>(q) * tol) return q;
  }
  return 0;
}

ClosureResult circle_rotation_closure(const FourierObservable& f, double omega, std::size_t m_samples) {
  const auto& c = f.coefficients;
  double norm2 = 0.0;
  for (const auto& v : c) norm2 += std::norm(v);
  if (c.empty() || norm2 == 0.0) throw UsageError("circle_rotation_closure: zero observable");
  const std::size_t N = f.max_degree();
  if (m_samples <= 2 * N) throw UsageError("circle_rotation_closure: grid too coarse for the observable");

  const double turns = omega / (2.0 * std::numbers::pi);
  if (const std::size_t q = rational_denominator(turns - std::floor(turns))) {
    std::ostringstream os;
    os << "circle_rotation_closure: omega / 2pi is rational to 1e-10 (denominator " << q << ")";
    throw PreconditionError(os.str());
  }

  ClosureResult r;
  if (m_samples < 4 * (N > 0 ? N : 1)) r.warnings.push_back("circle_rotation_closure: fewer than 4 N_max grid points");
  if (std::abs(norm2 - 1.0) > 1e-12) r.warnings.push_back("circle_rotation_closure: observable rescaled to unit norm");
  const double scale = 1.0 / std::sqrt(norm2);

  Complex num(0.0, 0.0);
  for (std::size_t n = 0; n <= N; ++n) num += std::norm(c[n] * scale) * std::polar(1.0, static_cast<double>(n) * omega);
  r.lambda_analytic = num;

  // Samples of f and Uf = f(theta + omega) on theta_l = 2 pi l / m.
  const auto m = static_cast<Eigen::Index>(m_samples);
  CVector fv = CVector::Zero(m), uf = CVector::Zero(m);
  std::vector<Complex> shift(N + 1);
  for (std::size_t n = 0; n <= N; ++n) shift[n] = c[n] * scale * std::polar(1.0, static_cast<double>(n) * omega);
  for (Eigen::Index l = 0; l < m; ++l) {
    for (std::size_t n = 0; n <= N; ++n) {
      const auto phase = static_cast<double>((n * static_cast<std::size_t>(l)) % m_samples);
      const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * phase / static_cast<double>(m_samples));
      fv[l] += c[n] * scale * z;
      uf[l] += shift[n] * z;
    }
  }
  const auto& kern = kernels::active();
  const Complex ff = kern.dotc(fv.data(), fv.data(), m_samples);
  r.lambda_empirical = kern.dotc(uf.data(), fv.data(), m_samples) / ff;
  r.lambda_agreement = std::abs(r.lambda_analytic - r.lambda_empirical);

  const Complex lambda = r.lambda_empirical;
  const CVector quf = uf - lambda * fv;
  const double uf_norm = uf.norm();
  r.residual_markov = (quf - (1.0 - lambda) * uf).norm() / uf_norm;
  r.residual_closed_form = std::abs(lambda) * (uf - fv).norm() / uf_norm;
  r.orthogonal_fraction = quf.norm() / uf_norm;
  return r;
}

}  // namespace koopman
