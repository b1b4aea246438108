#pragma once

// Named complex-valued observables on a system's state space.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "koopman/systems.hpp"

namespace koopman {

/// Marks entries that are plain functions of exp(i 2 pi (kx x + ky y)) on the
/// unit 2-torus, which lets time averages on the standard map take the batched
/// kernel path.
struct TorusTerm {
  enum class Part { exp, sin, cos };
  Part part = Part::exp;
  int kx = 0;
  int ky = 0;
};

struct Observable {
  std::string name;
  std::function<Complex(const StateVector&)> fn;
  std::optional<TorusTerm> torus;
};

/// Ordered set of observables with unique names. Entries report a failed
/// evaluation by returning a non-finite value; evaluation then raises a
/// DomainError naming the entry and the sample.
class ObservableDictionary {
 public:
  ObservableDictionary() = default;

  void add(std::string name, std::function<Complex(const StateVector&)> fn,
           std::optional<TorusTerm> torus = std::nullopt);
  void add(Observable o);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Observable& operator[](std::size_t i) const { return entries_.at(i); }
  std::vector<std::string> names() const;
  /// Index of the named entry; throws UsageError when absent.
  std::size_t index_of(const std::string& name) const;

  /// Sub-dictionary of the given entries in the given order.
  ObservableDictionary select(const std::vector<std::size_t>& indices) const;

  /// Values of all entries at one state. `step` only labels errors.
  CVector evaluate(const StateVector& s, std::size_t step = 0) const;

  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

 private:
  std::vector<Observable> entries_;
};

// Building blocks. Coordinates are indexed from 0.

/// prod_i x_i^{p_i}; negative powers allowed (non-finite at 0).
Observable monomial_observable(std::string name, std::vector<int> powers);
/// exp(i 2 pi k.x / period)
Observable fourier_observable(std::string name, std::vector<int> k, double period = 1.0);
/// exp(i k.x) for angle coordinates in radians.
Observable angle_observable(std::string name, std::vector<int> k);
/// sin(2 pi k.x / period) or cos(2 pi k.x / period)
Observable sin_observable(std::string name, std::vector<int> k, double period = 1.0);
Observable cos_observable(std::string name, std::vector<int> k, double period = 1.0);

/// Monomials in `dim` coordinates of total degree <= max_degree, ordered by
/// degree and then lexicographically with higher powers of earlier coordinates
/// first (1, x, y, z, x^2, xy, xz, y^2, ...). Names use `coordinate_names`.
ObservableDictionary monomial_library(std::size_t dim, int max_degree,
                                      const std::vector<std::string>& coordinate_names = {});

struct DictionaryEvaluation {
  /// m x N, F(l, j) = f_j(x_l)
  CMatrix F;
  Warnings warnings;
};

/// Evaluates every entry at every column of `states`. Warns when there are
/// fewer samples than entries.
DictionaryEvaluation evaluate_dictionary(const ObservableDictionary& dict, const RMatrix& states);
DictionaryEvaluation evaluate_dictionary(const ObservableDictionary& dict, const Trajectory& traj);

}  // namespace koopman
