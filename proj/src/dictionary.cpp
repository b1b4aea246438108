#include "koopman/dictionary.hpp"

#include <cmath>
#include <sstream>

#include "koopman/kernels.hpp"

namespace koopman {
namespace {

void check_index(const std::vector<int>& k, const StateVector& s, const std::string& name) {
  if (static_cast<Eigen::Index>(k.size()) > s.size()) {
    std::ostringstream os;
    os << "observable '" << name << "' uses " << k.size() << " coordinates but the state has " << s.size();
    throw UsageError(os.str());
  }
}

double dot_k(const std::vector<int>& k, const StateVector& s) {
  double t = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) t += static_cast<double>(k[i]) * s[static_cast<Eigen::Index>(i)];
  return t;
}

std::optional<TorusTerm> torus_term(TorusTerm::Part part, const std::vector<int>& k, double period) {
  if (period != 1.0 || k.empty() || k.size() > 2) return std::nullopt;
  return TorusTerm{part, k[0], k.size() > 1 ? k[1] : 0};
}

}  // namespace

void ObservableDictionary::add(std::string name, std::function<Complex(const StateVector&)> fn,
                               std::optional<TorusTerm> torus) {
  add(Observable{std::move(name), std::move(fn), torus});
}

void ObservableDictionary::add(Observable o) {
  if (o.name.empty()) throw UsageError("observable name must not be empty");
  if (!o.fn) throw UsageError("observable '" + o.name + "' has no function");
  for (const auto& e : entries_)
    if (e.name == o.name) throw UsageError("duplicate observable name '" + o.name + "'");
  entries_.push_back(std::move(o));
}

std::vector<std::string> ObservableDictionary::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::size_t ObservableDictionary::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return i;
  throw UsageError("no observable named '" + name + "'");
}

ObservableDictionary ObservableDictionary::select(const std::vector<std::size_t>& indices) const {
  ObservableDictionary out;
  for (std::size_t i : indices) {
    if (i >= entries_.size()) throw UsageError("observable index out of range");
    out.add(entries_[i]);
  }
  return out;
}

CVector ObservableDictionary::evaluate(const StateVector& s, std::size_t step) const {
  CVector v(static_cast<Eigen::Index>(entries_.size()));
  for (std::size_t j = 0; j < entries_.size(); ++j) {
    const Complex z = entries_[j].fn(s);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      std::ostringstream os;
      os << "observable '" << entries_[j].name << "' is not finite at step " << step;
      throw DomainError(os.str(), entries_[j].name, step);
    }
    v[static_cast<Eigen::Index>(j)] = z;
  }
  return v;
}

Observable monomial_observable(std::string name, std::vector<int> powers) {
  auto fn = [powers, name](const StateVector& s) {
    check_index(powers, s, name);
    double v = 1.0;
    for (std::size_t i = 0; i < powers.size(); ++i) {
      const int p = powers[i];
      if (p == 0) continue;
      const double x = s[static_cast<Eigen::Index>(i)];
      // std::pow(0, negative) is +inf, which evaluate() reports as a domain error.
      v *= p == 1 ? x : std::pow(x, p);
    }
    return Complex(v, 0.0);
  };
  std::optional<TorusTerm> torus;
  bool constant = true;
  for (int p : powers) constant = constant && p == 0;
  if (constant) torus = TorusTerm{TorusTerm::Part::exp, 0, 0};
  return {std::move(name), std::move(fn), torus};
}

Observable fourier_observable(std::string name, std::vector<int> k, double period) {
  if (!(period > 0.0)) throw UsageError("fourier observable '" + name + "': period must be > 0");
  auto torus = torus_term(TorusTerm::Part::exp, k, period);
  auto fn = [k, period, name](const StateVector& s) {
    check_index(k, s, name);
    double sn, cs;
    kernels::sincos_2pi(period == 1.0 ? dot_k(k, s) : dot_k(k, s) / period, sn, cs);
    return Complex(cs, sn);
  };
  return {std::move(name), std::move(fn), torus};
}

Observable angle_observable(std::string name, std::vector<int> k) {
  auto fn = [k, name](const StateVector& s) {
    check_index(k, s, name);
    return std::polar(1.0, dot_k(k, s));
  };
  return {std::move(name), std::move(fn), std::nullopt};
}

Observable sin_observable(std::string name, std::vector<int> k, double period) {
  if (!(period > 0.0)) throw UsageError("sin observable '" + name + "': period must be > 0");
  auto torus = torus_term(TorusTerm::Part::sin, k, period);
  auto fn = [k, period, name](const StateVector& s) {
    check_index(k, s, name);
    double sn, cs;
    kernels::sincos_2pi(period == 1.0 ? dot_k(k, s) : dot_k(k, s) / period, sn, cs);
    return Complex(sn, 0.0);
  };
  return {std::move(name), std::move(fn), torus};
}

Observable cos_observable(std::string name, std::vector<int> k, double period) {
  if (!(period > 0.0)) throw UsageError("cos observable '" + name + "': period must be > 0");
  auto torus = torus_term(TorusTerm::Part::cos, k, period);
  auto fn = [k, period, name](const StateVector& s) {
    check_index(k, s, name);
    double sn, cs;
    kernels::sincos_2pi(period == 1.0 ? dot_k(k, s) : dot_k(k, s) / period, sn, cs);
    return Complex(cs, 0.0);
  };
  return {std::move(name), std::move(fn), torus};
}

namespace {

void monomials_of_degree(std::size_t dim, int degree, std::size_t pos, std::vector<int>& cur,
                         std::vector<std::vector<int>>& out) {
  if (pos + 1 == dim) {
    cur[pos] = degree;
    out.push_back(cur);
    return;
  }
  for (int p = degree; p >= 0; --p) {
    cur[pos] = p;
    monomials_of_degree(dim, degree - p, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

ObservableDictionary monomial_library(std::size_t dim, int max_degree, const std::vector<std::string>& coordinate_names) {
  if (dim == 0) throw UsageError("monomial_library: dimension must be >= 1");
  if (max_degree < 0) throw UsageError("monomial_library: degree must be >= 0");
  std::vector<std::string> coords = coordinate_names;
  if (coords.empty()) {
    for (std::size_t i = 0; i < dim; ++i) coords.push_back("x" + std::to_string(i));
  }
  if (coords.size() != dim) throw UsageError("monomial_library: need one name per coordinate");

  ObservableDictionary dict;
  for (int d = 0; d <= max_degree; ++d) {
    std::vector<std::vector<int>> terms;
    std::vector<int> cur(dim, 0);
    monomials_of_degree(dim, d, 0, cur, terms);
    for (const auto& powers : terms) {
      std::string name;
      for (std::size_t i = 0; i < dim; ++i) {
        if (powers[i] == 0) continue;
        name += coords[i];
        if (powers[i] > 1) name += "^" + std::to_string(powers[i]);
      }
      if (name.empty()) name = "1";
      dict.add(monomial_observable(name, powers));
    }
  }
  return dict;
}

DictionaryEvaluation evaluate_dictionary(const ObservableDictionary& dict, const RMatrix& states) {
  if (dict.empty()) throw UsageError("evaluate_dictionary: empty dictionary");
  DictionaryEvaluation out;
  const Eigen::Index m = states.cols();
  const auto n = static_cast<Eigen::Index>(dict.size());
  out.F.resize(m, n);
  for (Eigen::Index l = 0; l < m; ++l)
    out.F.row(l) = dict.evaluate(states.col(l), static_cast<std::size_t>(l)).transpose();
  if (m < n) {
    std::ostringstream os;
    os << "evaluate_dictionary: " << m << " samples for " << n << " observables; the data cannot determine them";
    out.warnings.push_back(os.str());
  }
  return out;
}

DictionaryEvaluation evaluate_dictionary(const ObservableDictionary& dict, const Trajectory& traj) {
  return evaluate_dictionary(dict, traj.states());
}

}  // namespace koopman
