#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace koopman {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Point of a system's state space. Angles are kept on the real line.
using StateVector = Eigen::VectorXd;

using Warnings = std::vector<std::string>;

// Error hierarchy. Every failure raised by the library derives from Error so
// callers (the CLI in particular) can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated an operation's contract (wrong system kind, bad indices).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Not enough data for the requested construction.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Integration produced a non-finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// An observable could not be evaluated at a sample.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string observable, std::size_t step)
      : Error(what), observable_(std::move(observable)), step_(step) {}
  const std::string& observable() const noexcept { return observable_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::string observable_;
  std::size_t step_;
};

/// Dictionary evaluations are (numerically) linearly dependent on the data.
class DegenerateError : public Error {
 public:
  DegenerateError(const std::string& what, std::vector<std::size_t> suspects)
      : Error(what), suspects_(std::move(suspects)) {}
  const std::vector<std::size_t>& suspects() const noexcept { return suspects_; }

 private:
  std::vector<std::size_t> suspects_;
};

/// Eigenvector matrix too ill-conditioned to treat the matrix as diagonalizable.
class DefectiveError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class SingularError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace koopman
