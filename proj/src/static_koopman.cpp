#include "koopman/static_koopman.hpp"

#include <cmath>
#include <map>

#include "koopman/dmd.hpp"

namespace koopman {

void PairedSamples::validate() const {
  if (inputs.cols() < 1) throw SizeError("paired samples: no pairs");
  if (inputs.cols() != outputs.cols()) throw SizeError("paired samples: input and output counts differ");
  if (!inputs.allFinite() || !outputs.allFinite()) throw UsageError("paired samples: non-finite entries");
}

StaticFit fit_static_linear(const PairedSamples& pairs, const ObservableDictionary& dict_in,
                            const ObservableDictionary& dict_out) {
  pairs.validate();
  const CMatrix X = evaluate_dictionary(dict_in, pairs.inputs).F.transpose();
  const CMatrix Y = evaluate_dictionary(dict_out, pairs.outputs).F.transpose();
  StaticFit fit;
  fit.A = Y * moore_penrose_pseudoinverse(X);
  fit.residual = (Y - fit.A * X).norm();
  fit.rank = numerical_rank(X);
  fit.rank_deficient = fit.rank < X.rows();
  return fit;
}

namespace {

RVector weights_or_uniform(const RVector& weights, std::size_t n) {
  if (weights.size() == 0) return RVector::Ones(static_cast<Eigen::Index>(n));
  if (weights.size() != static_cast<Eigen::Index>(n)) throw SizeError("projection: one weight per sample");
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) throw UsageError("projection: weights must be strictly positive");
  return weights;
}

// Dense fiber index per sample, in first-appearance order.
std::vector<std::size_t> fiber_index(const std::vector<int>& labels, std::size_t& fibers) {
  std::map<int, std::size_t> ids;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.emplace(labels[i], ids.size());
    out[i] = it->second;
  }
  fibers = ids.size();
  return out;
}

}  // namespace

CVector conditional_expectation_projection(const CVector& f, const std::vector<int>& fiber_labels,
                                           const RVector& weights) {
  if (static_cast<Eigen::Index>(fiber_labels.size()) != f.size()) throw SizeError("projection: one label per sample");
  const RVector w = weights_or_uniform(weights, fiber_labels.size());
  std::size_t K = 0;
  const auto idx = fiber_index(fiber_labels, K);
  // Means are taken relative to the first sample of each fiber, so a fiber
  // that is already constant comes back bit for bit (exact idempotence).
  std::vector<Complex> anchor(K);
  std::vector<bool> seen(K, false);
  std::vector<Complex> num(K, Complex(0.0, 0.0));
  std::vector<double> den(K, 0.0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Complex v = f[static_cast<Eigen::Index>(i)];
    if (!seen[idx[i]]) {
      seen[idx[i]] = true;
      anchor[idx[i]] = v;
    }
    num[idx[i]] += w[static_cast<Eigen::Index>(i)] * (v - anchor[idx[i]]);
    den[idx[i]] += w[static_cast<Eigen::Index>(i)];
  }
  CVector out(f.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = anchor[idx[i]] + num[idx[i]] / den[idx[i]];
  return out;
}

RMatrix fiber_projection_matrix(const std::vector<int>& fiber_labels, const RVector& weights) {
  const std::size_t n = fiber_labels.size();
  const RVector w = weights_or_uniform(weights, n);
  std::map<int, double> total;
  for (std::size_t j = 0; j < n; ++j) total[fiber_labels[j]] += w[static_cast<Eigen::Index>(j)];
  RMatrix P = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (fiber_labels[i] == fiber_labels[j])
        P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w[static_cast<Eigen::Index>(j)] / total[fiber_labels[j]];
  return P;
}

RMatrix pushforward_pullback_matrix(const std::vector<int>& fiber_labels, const RVector& weights) {
  const std::size_t n = fiber_labels.size();
  const RVector w = weights_or_uniform(weights, n);
  std::size_t K = 0;
  const auto idx = fiber_index(fiber_labels, K);
  // Pullback: functions on the fibers (the image space) to functions on samples.
  RMatrix E = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
  for (std::size_t i = 0; i < n; ++i) E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(idx[i])) = 1.0;
  // Pushforward: weighted least-squares inverse of the pullback.
  const RMatrix EtW = E.transpose() * w.asDiagonal();
  const RMatrix push = (EtW * E).ldlt().solve(EtW);
  return E * push;
}

}  // namespace koopman
