#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "koopman/dmd.hpp"
#include "koopman/systems.hpp"

namespace test {

using namespace koopman;

inline double match_error(const std::vector<Complex>& expected, const std::vector<Complex>& got) {
  double worst = 0.0;
  for (const Complex& e : expected) {
    double best = INFINITY;
    for (const Complex& g : got) best = std::min(best, std::abs(g - e));
    worst = std::max(worst, best);
  }
  return worst;
}

// Rows of F are samples; column l of X is row l, column l of X' is row l + 1.
inline SnapshotPair shifted_pair(const CMatrix& F, double dt = 0.0) {
  const Eigen::Index L = F.rows();
  return SnapshotPair(F.topRows(L - 1).transpose(), F.bottomRows(L - 1).transpose(), dt);
}

inline CMatrix random_complex(Eigen::Index r, Eigen::Index c, std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  CMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = Complex(n(gen), n(gen));
  return m;
}

inline RMatrix random_real(Eigen::Index r, Eigen::Index c, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(gen);
  return m;
}

inline SystemSpec linear_map_spec(const RMatrix& B) {
  std::map<std::string, double> p;
  for (Eigen::Index i = 0; i < B.rows(); ++i)
    for (Eigen::Index j = 0; j < B.cols(); ++j) p["B_" + std::to_string(i) + "_" + std::to_string(j)] = B(i, j);
  return SystemSpec::create(SystemKind::linear_map, p);
}

inline StateVector state(std::initializer_list<double> v) {
  StateVector s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

}  // namespace test
