#pragma once

#include "koopman/types.hpp"

namespace koopman {

/// Data matrices X and X' (rows index observables, columns index time). Column
/// k of Xp is the image of column k of X under one step of the dynamics.
class SnapshotPair {
 public:
  SnapshotPair(CMatrix x, CMatrix xp, double dt = 0.0);

  const CMatrix& X() const noexcept { return x_; }
  const CMatrix& Xp() const noexcept { return xp_; }
  double dt() const noexcept { return dt_; }
  Eigen::Index observables() const noexcept { return x_.rows(); }
  Eigen::Index samples() const noexcept { return x_.cols(); }

 private:
  CMatrix x_;
  CMatrix xp_;
  double dt_;
};

}  // namespace koopman
