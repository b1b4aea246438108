#include "koopman/finite_section.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "koopman/kernels.hpp"

namespace koopman {

CMatrix dual_basis(const CMatrix& F, double max_condition) {
  if (F.rows() == 0 || F.cols() == 0) throw SizeError("dual_basis: empty evaluation matrix");
  if (F.rows() < F.cols()) {
    std::ostringstream os;
    os << "dual_basis: " << F.rows() << " samples cannot determine " << F.cols() << " observables";
    std::vector<std::size_t> all(static_cast<std::size_t>(F.cols()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    throw DegenerateError(os.str(), all);
  }
  Eigen::JacobiSVD<CMatrix> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& sv = svd.singularValues();
  const double smax = sv[0];
  const double smin = sv[sv.size() - 1];
  const double cond = smin > 0.0 ? (smax / smin) * (smax / smin) : std::numeric_limits<double>::infinity();
  if (!(cond < max_condition)) {
    const CVector v = svd.matrixV().col(sv.size() - 1);
    const double vmax = v.cwiseAbs().maxCoeff();
    std::vector<std::size_t> suspects;
    std::ostringstream os;
    os << "dual_basis: dictionary is degenerate on the data (cond(F^H F) = " << cond << "); near-dependent entries:";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v[i]) >= 0.1 * vmax) {
        suspects.push_back(static_cast<std::size_t>(i));
        os << ' ' << i;
      }
    }
    throw DegenerateError(os.str(), suspects);
  }
  return svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
}

CMatrix eigenmatrix(const FiniteSectionMatrix& u) { return u.U.transpose(); }

FiniteSectionMatrix finite_section_from_samples(const CMatrix& F, const CMatrix& Fp,
                                                const std::vector<std::string>& names, const RVector& weights) {
  if (F.rows() != Fp.rows() || F.cols() != Fp.cols()) throw SizeError("finite_section: F and Fp differ in shape");
  if (static_cast<Eigen::Index>(names.size()) != F.cols()) throw SizeError("finite_section: one name per column");
  const Eigen::Index m = F.rows();
  const Eigen::Index n = F.cols();

  CMatrix Fw = F;
  CMatrix Fpw = Fp;
  RVector sqrt_w;
  if (weights.size() > 0) {
    if (weights.size() != m) throw SizeError("finite_section: one weight per sample");
    for (Eigen::Index l = 0; l < m; ++l)
      if (!(weights[l] > 0.0) || !std::isfinite(weights[l])) throw UsageError("finite_section: weights must be strictly positive");
    sqrt_w = weights.cwiseSqrt();
    Fw = sqrt_w.asDiagonal() * F;
    Fpw = sqrt_w.asDiagonal() * Fp;
  }

  // Averaged form: u(k, j) = sum_l G(k, l) f_j(x_{l+1}).
  CMatrix G = dual_basis(Fw);
  if (sqrt_w.size() > 0) G = G * sqrt_w.asDiagonal();
  const CMatrix Gt = G.transpose();
  const auto& kern = kernels::active();
  FiniteSectionMatrix out;
  out.U.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      out.U(k, j) = kern.dotu(Gt.col(k).data(), Fp.col(j).data(), static_cast<std::size_t>(m));

  // Least-squares form.
  const CMatrix U_ls = Fw.colPivHouseholderQr().solve(Fpw);
  out.form_agreement = (out.U - U_ls).cwiseAbs().maxCoeff();

  out.names = names;
  out.indices.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out.indices[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
  out.dictionary_size = static_cast<std::size_t>(n);
  out.sample_count = static_cast<std::size_t>(m);
  if (m < n) out.warnings.push_back("finite_section: fewer sample pairs than observables");
  return out;
}

FiniteSectionMatrix finite_section_matrix(const ObservableDictionary& dict, const Trajectory& traj,
                                          const RVector& weights) {
  if (traj.size() < 2) throw SizeError("finite_section_matrix: trajectory needs at least 2 samples");
  auto ev = evaluate_dictionary(dict, traj);
  const Eigen::Index m = ev.F.rows() - 1;
  FiniteSectionMatrix out = finite_section_from_samples(ev.F.topRows(m), ev.F.bottomRows(m), dict.names(), weights);
  out.warnings.insert(out.warnings.begin(), ev.warnings.begin(), ev.warnings.end());
  return out;
}

namespace {

std::vector<Eigen::Index> positions_of(const FiniteSectionMatrix& u, const std::vector<std::size_t>& index_set,
                                       const char* op) {
  std::vector<Eigen::Index> pos;
  for (std::size_t idx : index_set) {
    if (idx >= u.dictionary_size) {
      std::ostringstream os;
      os << op << ": index " << idx << " is outside the dictionary of size " << u.dictionary_size;
      throw UsageError(os.str());
    }
  }
  for (std::size_t p = 0; p < u.indices.size(); ++p)
    if (std::find(index_set.begin(), index_set.end(), u.indices[p]) != index_set.end())
      pos.push_back(static_cast<Eigen::Index>(p));
  return pos;
}

std::vector<Eigen::Index> strict_positions(const FiniteSectionMatrix& u, const std::vector<std::size_t>& index_set,
                                           const char* op) {
  auto pos = positions_of(u, index_set, op);
  std::vector<std::size_t> uniq = index_set;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (pos.size() != uniq.size()) throw UsageError(std::string(op) + ": index not present in the matrix");
  if (pos.empty()) throw UsageError(std::string(op) + ": empty index set");
  return pos;
}

}  // namespace

FiniteSectionMatrix compression(const FiniteSectionMatrix& u, const std::vector<std::size_t>& index_set) {
  const auto pos = positions_of(u, index_set, "compression");
  if (pos.empty()) throw UsageError("compression: empty index set");
  FiniteSectionMatrix out;
  const auto n = static_cast<Eigen::Index>(pos.size());
  out.U.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) out.U(a, b) = u.U(pos[a], pos[b]);
  for (auto p : pos) {
    out.names.push_back(u.names[static_cast<std::size_t>(p)]);
    out.indices.push_back(u.indices[static_cast<std::size_t>(p)]);
  }
  out.dictionary_size = u.dictionary_size;
  out.sample_count = u.sample_count;
  out.form_agreement = u.form_agreement;
  out.warnings = u.warnings;
  return out;
}

LinearVerdict detect_linear_subrepresentation(const FiniteSectionMatrix& u, const std::vector<std::size_t>& subset,
                                              double tol) {
  const auto pos = strict_positions(u, subset, "detect_linear_subrepresentation");
  const Eigen::Index n = u.U.rows();
  std::vector<bool> inside(static_cast<std::size_t>(n), false);
  for (auto p : pos) inside[static_cast<std::size_t>(p)] = true;

  LinearVerdict v;
  for (auto j : pos) {
    double mass = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (!inside[static_cast<std::size_t>(k)]) mass += std::abs(u.U(k, j));
    v.leakage = std::max(v.leakage, mass);
  }
  v.is_linear = v.leakage <= tol;
  const auto s = static_cast<Eigen::Index>(pos.size());
  v.A.resize(s, s);
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = 0; b < s; ++b) v.A(a, b) = u.U(pos[b], pos[a]);
    v.names.push_back(u.names[static_cast<std::size_t>(pos[a])]);
  }
  return v;
}

NonlinearVerdict detect_nonlinear_representation(const FiniteSectionMatrix& u, const std::vector<std::size_t>& subset,
                                                 const std::vector<std::size_t>& library, double tol) {
  const auto spos = strict_positions(u, subset, "detect_nonlinear_representation");
  std::vector<Eigen::Index> lpos;
  if (!library.empty()) lpos = strict_positions(u, library, "detect_nonlinear_representation");
  for (auto p : lpos)
    if (std::find(spos.begin(), spos.end(), p) != spos.end())
      throw UsageError("detect_nonlinear_representation: library overlaps the subset");

  const Eigen::Index n = u.U.rows();
  std::vector<bool> declared(static_cast<std::size_t>(n), false);
  for (auto p : spos) declared[static_cast<std::size_t>(p)] = true;
  for (auto p : lpos) declared[static_cast<std::size_t>(p)] = true;

  NonlinearVerdict v;
  for (auto j : spos) {
    double mass = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (!declared[static_cast<std::size_t>(k)]) mass += std::abs(u.U(k, j));
    v.leakage = std::max(v.leakage, mass);
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (declared[static_cast<std::size_t>(k)]) continue;
    double mag = 0.0;
    for (auto j : spos) mag = std::max(mag, std::abs(u.U(k, j)));
    if (mag > tol) v.undeclared.push_back({u.indices[static_cast<std::size_t>(k)], u.names[static_cast<std::size_t>(k)], mag});
  }
  v.is_closed = v.leakage <= tol;

  std::vector<Eigen::Index> cols = spos;
  cols.insert(cols.end(), lpos.begin(), lpos.end());
  const auto s = static_cast<Eigen::Index>(spos.size());
  v.F_coeffs.resize(s, static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index a = 0; a < s; ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) v.F_coeffs(a, static_cast<Eigen::Index>(b)) = u.U(cols[b], spos[a]);
  for (auto p : cols) v.names.push_back(u.names[static_cast<std::size_t>(p)]);
  return v;
}

}  // namespace koopman
