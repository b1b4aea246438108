#include "koopman/representation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "koopman/kernels.hpp"

namespace koopman {

RepresentationModel RepresentationModel::linear(std::vector<std::string> names, CMatrix A) {
  if (A.rows() != A.cols() || A.rows() != static_cast<Eigen::Index>(names.size()))
    throw SizeError("linear representation: A must be square with one row per observable");
  RepresentationModel m;
  m.observables = std::move(names);
  m.kind = Kind::linear;
  m.A = std::move(A);
  return m;
}

RepresentationModel RepresentationModel::from_map(std::vector<std::string> names, VectorMap F) {
  RepresentationModel m;
  m.observables = std::move(names);
  m.kind = Kind::explicit_map;
  m.F = std::move(F);
  return m;
}

CVector RepresentationModel::apply(const CVector& f) const {
  switch (kind) {
    case Kind::linear:
      return A * f;
    case Kind::library: {
      const CVector theta = library.evaluate(f.real());
      return C.transpose() * theta;
    }
    case Kind::explicit_map:
      if (!F) throw UsageError("representation: explicit model without a map");
      return F(f);
  }
  return f;
}

CMatrix central_difference4(const CMatrix& samples, double dt) {
  if (!(dt > 0.0)) throw UsageError("central_difference4: dt must be > 0");
  const Eigen::Index L = samples.rows();
  if (L < 5) throw SizeError("central_difference4: need at least 5 samples");
  const Eigen::Index m = L - 4;
  return (samples.middleRows(0, m) - 8.0 * samples.middleRows(1, m) + 8.0 * samples.middleRows(3, m) -
          samples.middleRows(4, m)) /
         (12.0 * dt);
}

double representation_residual(const RepresentationModel& model, const CMatrix& f_samples, double dt) {
  const Eigen::Index L = f_samples.rows();
  if (L < 2) throw SizeError("representation_residual: need at least 2 samples");
  double scale = 0.0;
  for (Eigen::Index k = 0; k < L; ++k) scale = std::max(scale, f_samples.row(k).norm());
  if (scale == 0.0) scale = 1.0;

  double worst = 0.0;
  if (model.continuous_time) {
    const CMatrix deriv = central_difference4(f_samples, dt);
    for (Eigen::Index k = 0; k < deriv.rows(); ++k) {
      const CVector pred = model.apply(f_samples.row(k + 2).transpose());
      worst = std::max(worst, (deriv.row(k).transpose() - pred).norm());
    }
  } else {
    for (Eigen::Index k = 0; k + 1 < L; ++k) {
      const CVector pred = model.apply(f_samples.row(k).transpose());
      worst = std::max(worst, (f_samples.row(k + 1).transpose() - pred).norm());
    }
  }
  return worst / scale;
}

namespace {

// Component-major real copy; complex columns contribute real and imaginary parts.
std::vector<double> component_major(const CMatrix& m, std::size_t& dim) {
  std::vector<Eigen::Index> imag_cols;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    if (m.col(c).imag().cwiseAbs().maxCoeff() != 0.0) imag_cols.push_back(c);
  const auto L = static_cast<std::size_t>(m.rows());
  dim = static_cast<std::size_t>(m.cols()) + imag_cols.size();
  std::vector<double> out(dim * L);
  std::size_t d = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c, ++d)
    for (std::size_t i = 0; i < L; ++i) out[d * L + i] = m(static_cast<Eigen::Index>(i), c).real();
  for (auto c : imag_cols) {
    for (std::size_t i = 0; i < L; ++i) out[d * L + i] = m(static_cast<Eigen::Index>(i), c).imag();
    ++d;
  }
  return out;
}

}  // namespace

FaithfulnessResult faithfulness_estimate(const CMatrix& features, const RMatrix& states) {
  if (features.rows() != states.rows()) throw SizeError("faithfulness_estimate: feature and state counts differ");
  if (features.rows() < 2) throw SizeError("faithfulness_estimate: need at least 2 samples");
  std::size_t fd = 0;
  const auto f = component_major(features, fd);
  const auto sd = static_cast<std::size_t>(states.cols());
  std::vector<double> st(sd * static_cast<std::size_t>(states.rows()));
  for (std::size_t c = 0; c < sd; ++c)
    for (Eigen::Index i = 0; i < states.rows(); ++i)
      st[c * static_cast<std::size_t>(states.rows()) + static_cast<std::size_t>(i)] = states(i, static_cast<Eigen::Index>(c));
  const auto r = kernels::active().min_separation(f.data(), fd, st.data(), sd, static_cast<std::size_t>(features.rows()));
  FaithfulnessResult out;
  out.found = r.found;
  out.i = r.i;
  out.j = r.j;
  out.score = r.found ? std::sqrt(r.ratio_sq) : 0.0;
  return out;
}

double conjugacy_check(const VectorMap& G, const VectorMap& F, const VectorMap& h, const VectorMap& h_inv,
                       const std::vector<CVector>& g_samples) {
  if (g_samples.empty()) throw SizeError("conjugacy_check: no samples");
  double g_scale = 0.0, roundtrip = 0.0;
  for (const auto& g : g_samples) {
    g_scale = std::max(g_scale, g.norm());
    roundtrip = std::max(roundtrip, (h_inv(h(g)) - g).norm());
  }
  if (g_scale == 0.0) g_scale = 1.0;
  if (roundtrip / g_scale > 1e-8) {
    std::ostringstream os;
    os << "conjugacy_check: h is not invertible on the samples (h_inv(h(g)) residual " << roundtrip / g_scale << ")";
    throw PreconditionError(os.str());
  }
  double scale = 0.0, worst = 0.0;
  for (const auto& g : g_samples) {
    const CVector hg = h(g);
    scale = std::max(scale, hg.norm());
    worst = std::max(worst, (h(G(g)) - F(hg)).norm());
  }
  return scale > 0.0 ? worst / scale : worst;
}

std::pair<CMatrix, std::size_t> sequential_thresholded_lsq(const CMatrix& Theta, const CMatrix& Y,
                                                          const SindyOptions& options) {
  if (Theta.rows() != Y.rows()) throw SizeError("sindy: library and target sample counts differ");
  if (Theta.rows() < Theta.cols()) throw SizeError("sindy: fewer samples than library functions");
  if (options.threshold < 0.0) throw UsageError("sindy: threshold must be >= 0");
  const Eigen::Index p = Theta.cols();
  CMatrix C = Theta.colPivHouseholderQr().solve(Y);
  const double cut = options.relative ? options.threshold * C.cwiseAbs().maxCoeff() : options.threshold;

  std::vector<std::vector<bool>> support(static_cast<std::size_t>(Y.cols()), std::vector<bool>(static_cast<std::size_t>(p), true));
  std::size_t iterations = 0;
  while (iterations < options.max_iterations) {
    bool changed = false;
    for (Eigen::Index d = 0; d < Y.cols(); ++d)
      for (Eigen::Index i = 0; i < p; ++i) {
        const bool keep = std::abs(C(i, d)) >= cut;
        if (support[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)] && !keep) {
          support[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)] = false;
          changed = true;
        }
      }
    if (!changed) break;
    ++iterations;
    for (Eigen::Index d = 0; d < Y.cols(); ++d) {
      const auto& sup = support[static_cast<std::size_t>(d)];
      std::vector<Eigen::Index> cols;
      for (Eigen::Index i = 0; i < p; ++i)
        if (sup[static_cast<std::size_t>(i)]) cols.push_back(i);
      C.col(d).setZero();
      if (cols.empty()) continue;
      CMatrix sub(Theta.rows(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t a = 0; a < cols.size(); ++a) sub.col(static_cast<Eigen::Index>(a)) = Theta.col(cols[a]);
      const CVector c = sub.colPivHouseholderQr().solve(Y.col(d));
      for (std::size_t a = 0; a < cols.size(); ++a) C(cols[a], d) = c[static_cast<Eigen::Index>(a)];
    }
  }
  // Entries dropped from the support are exactly zero.
  for (Eigen::Index d = 0; d < Y.cols(); ++d)
    for (Eigen::Index i = 0; i < p; ++i)
      if (!support[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)]) C(i, d) = 0.0;
  return {C, iterations};
}

RepresentationModel sindy_fit(const Trajectory& traj, const ObservableDictionary& library, const SindyOptions& options) {
  const RMatrix& X = traj.states();
  const Eigen::Index L = X.cols();
  const bool flow = traj.dt() > 0.0;
  CMatrix Theta, Y;
  CMatrix coords = X.transpose().cast<Complex>();
  if (flow) {
    if (L < 5) throw SizeError("sindy_fit: need at least 5 samples for derivatives");
    Y = central_difference4(coords, traj.dt());
    Theta = evaluate_dictionary(library, RMatrix(X.middleCols(2, L - 4))).F;
  } else {
    if (L < 2) throw SizeError("sindy_fit: need at least 2 samples");
    Y = coords.bottomRows(L - 1);
    Theta = evaluate_dictionary(library, RMatrix(X.leftCols(L - 1))).F;
  }
  auto [C, iterations] = sequential_thresholded_lsq(Theta, Y, options);
  if (C.cwiseAbs().maxCoeff() == 0.0) {
    std::vector<std::size_t> all(library.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    throw DegenerateError("sindy_fit: every coefficient fell below the threshold", all);
  }

  RepresentationModel m;
  for (Eigen::Index i = 0; i < X.rows(); ++i) m.observables.push_back("coord_" + std::to_string(i));
  m.kind = RepresentationModel::Kind::library;
  m.C = std::move(C);
  m.library = library;
  m.continuous_time = flow;
  m.iterations = iterations;
  m.residual = representation_residual(m, coords, traj.dt());
  return m;
}

StabilityVerdict stability_certificate(std::span<const Complex> generator_eigenvalues,
                                       const CMatrix& eigenfunction_samples, double faithful_score,
                                       const StabilityOptions& options) {
  StabilityVerdict v;
  if (generator_eigenvalues.empty()) {
    v.failed = "spectrum";
    v.message = "not certified: spectrum (no eigenvalues)";
    return v;
  }
  for (const auto& l : generator_eigenvalues) {
    if (!(l.real() < 0.0)) {
      std::ostringstream os;
      os << "not certified: spectrum (eigenvalue " << l.real() << (l.imag() < 0 ? "" : "+") << l.imag()
         << "i is not in the open left half-plane)";
      v.failed = "spectrum";
      v.message = os.str();
      return v;
    }
  }
  if (!(faithful_score > options.faithful_threshold)) {
    std::ostringstream os;
    os << "not certified: faithfulness (score " << faithful_score << " <= " << options.faithful_threshold << ")";
    v.failed = "faithfulness";
    v.message = os.str();
    return v;
  }
  if (eigenfunction_samples.cols() < 1) {
    v.failed = "zero_in_range";
    v.message = "not certified: zero_in_range (no samples)";
    return v;
  }
  const RVector norms = eigenfunction_samples.colwise().norm().transpose();
  if (!(norms.minCoeff() <= options.zero_tol * norms.maxCoeff())) {
    std::ostringstream os;
    os << "not certified: zero_in_range (min |phi| / max |phi| = " << norms.minCoeff() / norms.maxCoeff() << ")";
    v.failed = "zero_in_range";
    v.message = os.str();
    return v;
  }
  v.certified = true;
  v.message = "certified";
  return v;
}

StabilityVerdict stability_certificate(const SpectralTriple& triple, double dt, double faithful_score,
                                       const StabilityOptions& options) {
  std::vector<Complex> gen;
  if (dt > 0.0) {
    gen = continuous_time_eigenvalues(triple.eigenvalues, dt).values;
  } else {
    // Discrete time: |lambda| < 1 plays the role of Re < 0.
    for (const auto& l : triple.eigenvalues) gen.push_back(Complex(std::abs(l) - 1.0, std::arg(l)));
  }
  return stability_certificate(gen, triple.eigenfunction_samples, faithful_score, options);
}

EfficiencyHeuristic efficiency_heuristic(const CMatrix& features, const RMatrix& states, std::size_t neighbors,
                                         std::size_t stride, double rank_tol) {
  if (features.rows() != states.rows()) throw SizeError("efficiency_heuristic: feature and state counts differ");
  const Eigen::Index L = states.rows();
  const Eigen::Index s = states.cols();
  const Eigen::Index d = features.cols();
  if (stride < 1) throw UsageError("efficiency_heuristic: stride must be >= 1");
  if (static_cast<Eigen::Index>(neighbors) < s + 1 || static_cast<Eigen::Index>(neighbors) > L - 1)
    throw SizeError("efficiency_heuristic: need state dimension + 1 <= neighbors < samples");

  EfficiencyHeuristic out;
  out.min_singular_ratio = 1.0;
  if (d > s) out.dependent = true;
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(L));
  for (Eigen::Index a = 0; a < L; a += static_cast<Eigen::Index>(stride)) {
    for (Eigen::Index b = 0; b < L; ++b) dist[static_cast<std::size_t>(b)] = {(states.row(b) - states.row(a)).squaredNorm(), b};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(neighbors) + 1, dist.end());
    CMatrix design(static_cast<Eigen::Index>(neighbors), s + 1);
    CMatrix rhs(static_cast<Eigen::Index>(neighbors), d);
    for (std::size_t q = 0; q < neighbors; ++q) {
      const Eigen::Index b = dist[q + 1].second;
      design(static_cast<Eigen::Index>(q), 0) = 1.0;
      design.row(static_cast<Eigen::Index>(q)).tail(s) = (states.row(b) - states.row(a)).cast<Complex>();
      rhs.row(static_cast<Eigen::Index>(q)) = features.row(b) - features.row(a);
    }
    const CMatrix coef = design.colPivHouseholderQr().solve(rhs);
    const CMatrix J = coef.bottomRows(s).transpose();  // d x s
    const RVector sv = Eigen::JacobiSVD<CMatrix>(J).singularValues();
    const double ratio = sv[0] > 0.0 ? sv[sv.size() - 1] / sv[0] : 0.0;
    out.min_singular_ratio = std::min(out.min_singular_ratio, ratio);
  }
  if (d <= s && out.min_singular_ratio < rank_tol) out.dependent = true;
  return out;
}

}  // namespace koopman
