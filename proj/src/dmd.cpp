#include "koopman/dmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace koopman {
namespace {

double cutoff(const CMatrix& m, double sigma_max) {
  return static_cast<double>(std::max(m.rows(), m.cols())) * std::numeric_limits<double>::epsilon() * sigma_max;
}

}  // namespace

CMatrix moore_penrose_pseudoinverse(const CMatrix& m) {
  if (m.size() == 0) return CMatrix(m.cols(), m.rows());
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& sv = svd.singularValues();
  const double tol = cutoff(m, sv.size() > 0 ? sv[0] : 0.0);
  RVector inv = RVector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol && sv[i] > 0.0) inv[i] = 1.0 / sv[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

Eigen::Index numerical_rank(const CMatrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const RVector& sv = svd.singularValues();
  const double tol = cutoff(m, sv[0]);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol && sv[i] > 0.0) ++r;
  return r;
}

CompanionModel companion_dmd(const SnapshotPair& p) {
  const CMatrix& X = p.X();
  const CMatrix& Xp = p.Xp();
  const Eigen::Index m = p.samples();
  CompanionModel model;

  const CVector last = Xp.col(m - 1);
  bool solved = false;
  if (X.rows() == m) {
    Eigen::FullPivLU<CMatrix> lu(X);
    // rcond estimate of the LU factorization; near-singular falls through to
    // least squares.
    if (lu.isInvertible() && lu.rcond() > 1e-12) {
      model.c = lu.solve(last);
      model.used_exact_inverse = true;
      solved = true;
    }
  }
  if (!solved) model.c = moore_penrose_pseudoinverse(X) * last;

  model.C = CMatrix::Zero(m, m);
  for (Eigen::Index i = 1; i < m; ++i) model.C(i, i - 1) = 1.0;
  model.C.col(m - 1) = model.c;
  model.residual = (Xp - X * model.C).norm();

  const Eigen::Index rank = numerical_rank(X);
  if (rank < m - 1) {
    std::ostringstream os;
    os << "companion_dmd: ill-posed, rank(X) = " << rank << " < m - 1 = " << (m - 1) << "; residual "
       << model.residual;
    model.warnings.push_back(os.str());
  }
  return model;
}

CMatrix pseudoinverse_dmd(const SnapshotPair& p) { return p.Xp() * moore_penrose_pseudoinverse(p.X()); }

std::vector<Complex> eigenvalues(const CMatrix& A) {
  if (A.rows() != A.cols()) throw UsageError("eigenvalues: matrix must be square");
  Eigen::ComplexEigenSolver<CMatrix> es(A, false);
  const CVector& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

SpectralTriple spectral_triple(const CMatrix& A, const SnapshotPair& p, double max_condition) {
  if (A.rows() != A.cols()) throw UsageError("spectral_triple: A must be square");
  if (A.rows() != p.observables()) throw SizeError("spectral_triple: A does not match the number of observables");

  Eigen::ComplexEigenSolver<CMatrix> es(A, true);
  const CMatrix V = es.eigenvectors();
  const RVector sv = Eigen::JacobiSVD<CMatrix>(V).singularValues();
  const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
  if (!(cond < max_condition)) {
    std::ostringstream os;
    os << "spectral_triple: eigenvector matrix condition " << cond << " exceeds " << max_condition
       << "; A is (nearly) defective and would need generalized eigenfunctions";
    throw DefectiveError(os.str());
  }

  SpectralTriple t;
  t.eigenvector_condition = cond;
  const CVector& ev = es.eigenvalues();
  t.eigenvalues.assign(ev.data(), ev.data() + ev.size());

  // Rows of V^{-1} are the eigenvectors w_j of A^T (left eigenvectors of A).
  const CMatrix W = V.partialPivLu().inverse();
  CMatrix phi = W * p.X();
  const double m = static_cast<double>(p.samples());
  for (Eigen::Index j = 0; j < phi.rows(); ++j) {
    const double rms = std::sqrt(phi.row(j).squaredNorm() / m);
    if (rms == 0.0) continue;
    Eigen::Index kmax = 0;
    phi.row(j).cwiseAbs().maxCoeff(&kmax);
    const Complex phase = phi(j, kmax) / std::abs(phi(j, kmax));
    phi.row(j) /= rms * phase;
  }

  // Modes: least-squares coefficients with f(x_k) ~ sum_j s_j phi_j(x_k).
  t.modes = p.X() * moore_penrose_pseudoinverse(phi);
  t.eigenfunction_samples = std::move(phi);

  const CMatrix rec = t.modes * t.eigenfunction_samples;
  double num = 0.0, den = 0.0;
  for (Eigen::Index k = 0; k < p.samples(); ++k) {
    num = std::max(num, (p.X().col(k) - rec.col(k)).norm());
    den = std::max(den, p.X().col(k).norm());
  }
  t.reconstruction_residual = den > 0.0 ? num / den : num;
  return t;
}

ContinuousEigenvalues continuous_time_eigenvalues(const std::vector<Complex>& discrete, double dt,
                                                  double alias_margin) {
  if (!(dt > 0.0)) throw UsageError("continuous_time_eigenvalues: dt must be > 0");
  ContinuousEigenvalues out;
  out.values.reserve(discrete.size());
  for (const Complex& lambda : discrete) {
    if (lambda == Complex(0.0, 0.0)) throw SingularError("continuous_time_eigenvalues: eigenvalue 0 has no logarithm");
    const Complex lg = std::log(lambda);
    if (std::abs(std::abs(lg.imag()) - std::numbers::pi) < alias_margin) {
      std::ostringstream os;
      os << "continuous_time_eigenvalues: arg(" << lambda.real() << (lambda.imag() < 0 ? "" : "+") << lambda.imag()
         << "i) is near pi; the frequency may be aliased";
      out.warnings.push_back(os.str());
    }
    out.values.push_back(lg / dt);
  }
  return out;
}

}  // namespace koopman
