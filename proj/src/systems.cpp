#include "koopman/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <regex>
#include <sstream>

#include "koopman/kernels.hpp"

namespace koopman {
namespace {

struct KindInfo {
  SystemKind kind;
  std::string_view name;
  bool map;
  std::map<std::string, double> defaults;
};

const std::vector<KindInfo>& kind_table() {
  static const std::vector<KindInfo> table = {
      {SystemKind::torus_rotation, "torus_rotation", true, {{"omega1", 1.0}, {"omega2", std::numbers::sqrt2}}},
      {SystemKind::circle_rotation, "circle_rotation", true, {{"omega", 1.0}}},
      {SystemKind::standard_map, "standard_map", true, {{"epsilon", 0.12}}},
      {SystemKind::lorenz, "lorenz", false, {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}}},
      {SystemKind::limit_cycle_polar, "limit_cycle_polar", false, {{"omega", 1.0}}},
      {SystemKind::pendulum, "pendulum", false, {{"g", 9.81}, {"l", 1.0}}},
      {SystemKind::duffing_cycle, "duffing_cycle", false, {{"c", std::sqrt(7.0)}, {"omega", 1.0}}},
      {SystemKind::coupled_lc_lorenz,
       "coupled_lc_lorenz",
       false,
       {{"omega", 1.0}, {"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}, {"coupling", 1.0}}},
      {SystemKind::linear_map, "linear_map", true, {}},
      {SystemKind::free_particle, "free_particle", false, {{"mass", 1.0}}},
  };
  return table;
}

const KindInfo& info(SystemKind kind) {
  for (const auto& k : kind_table())
    if (k.kind == kind) return k;
  throw UsageError("unknown system kind");
}

bool parse_matrix_key(const std::string& key, std::size_t& i, std::size_t& j) {
  static const std::regex re(R"(B_(\d+)_(\d+))");
  std::smatch m;
  if (!std::regex_match(key, m, re)) return false;
  i = std::stoul(m[1].str());
  j = std::stoul(m[2].str());
  return true;
}

void require_kind(const SystemSpec& spec, bool want_map, const char* op) {
  if (is_map(spec.kind()) != want_map) {
    std::ostringstream os;
    os << op << ": system '" << to_string(spec.kind()) << "' is " << (want_map ? "a flow" : "a map");
    throw UsageError(os.str());
  }
}

// Vector field written into a preallocated output.
void field_into(const SystemSpec& spec, const RVector& s, RVector& out) {
  switch (spec.kind()) {
    case SystemKind::lorenz: {
      const double sigma = spec.param("sigma"), rho = spec.param("rho"), beta = spec.param("beta");
      out[0] = sigma * (s[1] - s[0]);
      out[1] = s[0] * (rho - s[2]) - s[1];
      out[2] = s[0] * s[1] - beta * s[2];
      return;
    }
    case SystemKind::limit_cycle_polar:
      out[0] = s[0] * (1.0 - s[0] * s[0]);
      out[1] = spec.param("omega");
      return;
    case SystemKind::pendulum:
      // theta from the upward vertical, which is the convention in which
      // w^2/2 + (g/l) cos(theta) is conserved.
      out[0] = s[1];
      out[1] = (spec.param("g") / spec.param("l")) * std::sin(s[0]);
      return;
    case SystemKind::duffing_cycle:
      out[0] = s[1];
      out[1] = s[0] - s[0] * s[0] * s[0] - spec.param("c") * s[1];
      out[2] = spec.param("omega");
      return;
    case SystemKind::coupled_lc_lorenz: {
      const double sigma = spec.param("sigma"), rho = spec.param("rho"), beta = spec.param("beta");
      const double x = s[2], y = s[3], z = s[4];
      const double f = spec.param("coupling") / (1.0 + x * x + y * y + z * z);
      out[0] = (1.0 + f) * s[0] * (1.0 - s[0] * s[0]);
      out[1] = spec.param("omega");
      out[2] = sigma * (y - x);
      out[3] = x * (rho - z) - y;
      out[4] = x * y - beta * z;
      return;
    }
    case SystemKind::free_particle:
      out[0] = s[1] / spec.param("mass");
      out[1] = 0.0;
      return;
    default:
      throw UsageError("vector_field: system is a map");
  }
}

void check_dimension(const SystemSpec& spec, const StateVector& s) {
  if (static_cast<std::size_t>(s.size()) != spec.dimension()) {
    std::ostringstream os;
    os << to_string(spec.kind()) << ": state has dimension " << s.size() << ", expected " << spec.dimension();
    throw UsageError(os.str());
  }
}

}  // namespace

std::string_view to_string(SystemKind kind) { return info(kind).name; }

SystemKind system_kind_from_string(std::string_view name) {
  for (const auto& k : kind_table())
    if (k.name == name) return k.kind;
  throw UsageError("unknown system kind '" + std::string(name) + "'");
}

const std::vector<SystemKind>& all_system_kinds() {
  static const std::vector<SystemKind> kinds = [] {
    std::vector<SystemKind> v;
    for (const auto& k : kind_table()) v.push_back(k.kind);
    return v;
  }();
  return kinds;
}

bool is_map(SystemKind kind) { return info(kind).map; }

SystemSpec SystemSpec::create(SystemKind kind, std::map<std::string, double> params) {
  const KindInfo& ki = info(kind);
  std::map<std::string, double> merged = ki.defaults;
  for (const auto& [key, value] : params) {
    std::size_t i, j;
    const bool matrix_entry = kind == SystemKind::linear_map && parse_matrix_key(key, i, j);
    if (!matrix_entry && !ki.defaults.contains(key))
      throw UsageError(std::string(ki.name) + ": unknown parameter '" + key + "'");
    if (!std::isfinite(value)) throw UsageError(std::string(ki.name) + ": parameter '" + key + "' is not finite");
    merged[key] = value;
  }
  SystemSpec spec(kind, std::move(merged));
  switch (kind) {
    case SystemKind::standard_map:
      if (spec.param("epsilon") < 0.0) throw UsageError("standard_map: epsilon must be >= 0");
      break;
    case SystemKind::pendulum:
      if (spec.param("l") <= 0.0) throw UsageError("pendulum: l must be > 0");
      break;
    case SystemKind::coupled_lc_lorenz:
      if (spec.param("coupling") <= 0.0) throw UsageError("coupled_lc_lorenz: coupling must be > 0");
      break;
    case SystemKind::free_particle:
      if (spec.param("mass") <= 0.0) throw UsageError("free_particle: mass must be > 0");
      break;
    case SystemKind::linear_map:
      spec.linear_matrix();  // validates completeness
      break;
    default:
      break;
  }
  return spec;
}

double SystemSpec::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw UsageError(std::string(to_string(kind_)) + ": missing parameter '" + name + "'");
  return it->second;
}

RMatrix SystemSpec::linear_matrix() const {
  if (kind_ != SystemKind::linear_map) throw UsageError("linear_matrix: not a linear_map");
  std::size_t n = 0;
  for (const auto& [key, value] : params_) {
    std::size_t i, j;
    if (parse_matrix_key(key, i, j)) n = std::max({n, i + 1, j + 1});
  }
  if (n == 0) throw UsageError("linear_map: no B_i_j entries");
  RMatrix b = RMatrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n),
                                std::numeric_limits<double>::quiet_NaN());
  for (const auto& [key, value] : params_) {
    std::size_t i, j;
    if (parse_matrix_key(key, i, j)) b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
  }
  if (b.hasNaN()) throw UsageError("linear_map: matrix B is incomplete");
  return b;
}

std::size_t SystemSpec::dimension() const {
  switch (kind_) {
    case SystemKind::circle_rotation:
      return 1;
    case SystemKind::torus_rotation:
    case SystemKind::standard_map:
    case SystemKind::limit_cycle_polar:
    case SystemKind::pendulum:
    case SystemKind::free_particle:
      return 2;
    case SystemKind::lorenz:
    case SystemKind::duffing_cycle:
      return 3;
    case SystemKind::coupled_lc_lorenz:
      return 5;
    case SystemKind::linear_map:
      return static_cast<std::size_t>(linear_matrix().rows());
  }
  return 0;
}

Trajectory::Trajectory(RMatrix states, double dt, std::optional<SystemSpec> origin)
    : states_(std::move(states)), dt_(dt), origin_(std::move(origin)) {
  if (states_.cols() < 1) throw SizeError("trajectory must contain at least one state");
  if (dt_ < 0.0 || !std::isfinite(dt_)) throw UsageError("trajectory spacing must be finite and >= 0");
  if (!states_.allFinite()) throw UsageError("trajectory contains non-finite states");
}

StateVector step_map(const SystemSpec& spec, const StateVector& s) {
  require_kind(spec, true, "step_map");
  check_dimension(spec, s);
  switch (spec.kind()) {
    case SystemKind::circle_rotation:
      return StateVector::Constant(1, s[0] + spec.param("omega"));
    case SystemKind::torus_rotation: {
      StateVector out(2);
      out << s[0] + spec.param("omega1"), s[1] + spec.param("omega2");
      return out;
    }
    case SystemKind::standard_map: {
      const double kick = spec.param("epsilon") * kernels::sin_2pi(s[0]);
      const double yn = s[1] + kick;
      auto wrap = [](double v) {
        double f = v - std::floor(v);
        return f >= 1.0 ? 0.0 : f;
      };
      StateVector out(2);
      out << wrap(s[0] + yn), wrap(yn);
      return out;
    }
    case SystemKind::linear_map:
      return spec.linear_matrix() * s;
    default:
      throw UsageError("step_map: system is a flow");
  }
}

StateVector vector_field(const SystemSpec& spec, const StateVector& s) {
  require_kind(spec, false, "vector_field");
  check_dimension(spec, s);
  RVector out(s.size());
  field_into(spec, s, out);
  return out;
}

Stepper::Stepper(const SystemSpec& spec, double dt) : spec_(spec), dt_(dt), map_(is_map(spec.kind())) {
  const auto dim = static_cast<Eigen::Index>(spec.dimension());
  if (map_) {
    if (spec.kind() == SystemKind::linear_map) b_ = spec.linear_matrix();
    dt_ = 0.0;
  } else {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw UsageError("dt must be > 0 for flows");
    k1_.resize(dim);
    k2_.resize(dim);
    k3_.resize(dim);
    k4_.resize(dim);
    tmp_.resize(dim);
  }
}

void Stepper::advance(StateVector& s) {
  if (map_) {
    if (spec_.kind() == SystemKind::linear_map)
      s = b_ * s;
    else
      s = step_map(spec_, s);
    return;
  }
  const double half = 0.5 * dt_;
  const double sixth = dt_ / 6.0;
  field_into(spec_, s, k1_);
  tmp_.noalias() = s + half * k1_;
  field_into(spec_, tmp_, k2_);
  tmp_.noalias() = s + half * k2_;
  field_into(spec_, tmp_, k3_);
  tmp_.noalias() = s + dt_ * k3_;
  field_into(spec_, tmp_, k4_);
  s += sixth * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

Trajectory integrate(const SystemSpec& spec, const StateVector& s0, double dt, std::size_t n_steps) {
  check_dimension(spec, s0);
  if (n_steps < 1) throw UsageError("integrate: n_steps must be >= 1");
  if (!s0.allFinite()) throw UsageError("integrate: initial state is not finite");
  if (!is_map(spec.kind()) && (!(dt > 0.0) || !std::isfinite(dt)))
    throw UsageError("integrate: dt must be > 0 for flows");
  Stepper stepper(spec, dt);
  RMatrix states(s0.size(), static_cast<Eigen::Index>(n_steps + 1));
  states.col(0) = s0;
  StateVector s = s0;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    stepper.advance(s);
    if (!s.allFinite()) throw DivergenceError("integration diverged at step " + std::to_string(k), k);
    states.col(static_cast<Eigen::Index>(k)) = s;
  }
  return Trajectory(std::move(states), stepper.dt(), spec);
}

double hamiltonian(const StateVector& s, double g, double l) {
  return 0.5 * s[1] * s[1] + (g / l) * std::cos(s[0]);
}

std::pair<Complex, Complex> duffing_fixed_point_eigenvalues(double c) {
  const Complex root = std::sqrt(Complex(c * c - 8.0, 0.0));
  Complex a = (-c + root) / 2.0;
  Complex b = (-c - root) / 2.0;
  if (a.imag() < b.imag()) std::swap(a, b);
  return {a, b};
}

KnownSpectrum known_spectrum(const SystemSpec& spec) {
  const Complex i(0.0, 1.0);
  switch (spec.kind()) {
    case SystemKind::torus_rotation:
      return {{std::exp(i * spec.param("omega1")), std::exp(i * spec.param("omega2"))}, false};
    case SystemKind::circle_rotation:
      return {{std::exp(i * spec.param("omega"))}, false};
    case SystemKind::limit_cycle_polar: {
      const double w = spec.param("omega");
      return {{Complex(-2.0, 0.0), Complex(0.0, w), Complex(0.0, -w)}, true};
    }
    case SystemKind::duffing_cycle: {
      const auto [l3, l4] = duffing_fixed_point_eigenvalues(spec.param("c"));
      const double w = spec.param("omega");
      return {{l3, l4, Complex(0.0, w), Complex(0.0, -w)}, true};
    }
    case SystemKind::linear_map: {
      Eigen::EigenSolver<RMatrix> es(spec.linear_matrix(), false);
      std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
      return {ev, false};
    }
    default:
      throw UnsupportedError("known_spectrum: no closed-form spectrum for '" + std::string(to_string(spec.kind())) +
                             "'");
  }
}

std::vector<Complex> lattice_spectrum(double omega, const std::vector<Complex>& betas, int max_n, int max_m) {
  if (max_n < 0 || max_m < 0) throw UsageError("lattice_spectrum: truncation must be >= 0");
  // All multi-indices m in N^k with |m| <= max_m, in lexicographic order.
  std::vector<std::vector<int>> multis;
  std::vector<int> cur(betas.size(), 0);
  auto rec = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (pos == cur.size()) {
      multis.push_back(cur);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      cur[pos] = v;
      self(self, pos + 1, remaining - v);
    }
    cur[pos] = 0;
  };
  rec(rec, 0, max_m);

  std::vector<Complex> out;
  for (int n = -max_n; n <= max_n; ++n) {
    for (const auto& m : multis) {
      Complex v(0.0, n * omega);
      for (std::size_t k = 0; k < m.size(); ++k) v += static_cast<double>(m[k]) * betas[k];
      out.push_back(v);
    }
  }
  return out;
}

std::vector<LatticePoint> duffing_lattice(double c, double omega, int max_n, int max_m) {
  if (max_n < 0 || max_m < 0) throw UsageError("duffing_lattice: truncation must be >= 0");
  const Complex beta = duffing_fixed_point_eigenvalues(c).first;
  std::vector<LatticePoint> out;
  for (int n = 0; n <= max_n; ++n)
    for (int m = 0; m <= max_m; ++m)
      out.push_back({n, m, Complex(0.0, n * omega) + static_cast<double>(m) * beta});
  return out;
}

}  // namespace koopman
