#include "koopman/gla.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "koopman/kernels.hpp"

namespace koopman {

RMatrix Grid2D::points() const {
  RMatrix p(2, static_cast<Eigen::Index>(size()));
  const double hx = (x1 - x0) / static_cast<double>(nx);
  const double hy = (y1 - y0) / static_cast<double>(ny);
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const auto c = static_cast<Eigen::Index>(ix + nx * iy);
      p(0, c) = x0 + (static_cast<double>(ix) + 0.5) * hx;
      p(1, c) = y0 + (static_cast<double>(iy) + 0.5) * hy;
    }
  return p;
}

std::optional<std::size_t> Grid2D::nearest(double x, double y) const {
  if (!std::isfinite(x) || !std::isfinite(y)) return std::nullopt;
  auto cell = [this](double v, double lo, double hi, std::size_t count) -> std::optional<std::size_t> {
    const double h = (hi - lo) / static_cast<double>(count);
    double i = std::floor((v - lo) / h);
    const auto n = static_cast<double>(count);
    if (periodic) {
      i = i - n * std::floor(i / n);
      if (i >= n) i = 0.0;
    } else if (i < 0.0 || i >= n) {
      return std::nullopt;
    }
    return static_cast<std::size_t>(i);
  };
  const auto ix = cell(x, x0, x1, nx);
  const auto iy = cell(y, y0, y1, ny);
  if (!ix || !iy) return std::nullopt;
  return *ix + nx * *iy;
}

namespace {

bool torus_fast_path(const ObservableDictionary& dict, const SystemSpec& spec, const RMatrix& grid) {
  if (spec.kind() != SystemKind::standard_map || grid.rows() != 2) return false;
  for (const auto& o : dict)
    if (!o.torus) return false;
  return true;
}

TimeAverageField standard_map_averages(const ObservableDictionary& dict, const SystemSpec& spec,
                                       const RMatrix& grid, std::size_t n) {
  std::vector<kernels::TorusMode> modes;
  std::vector<std::size_t> mode_of;
  for (const auto& o : dict) {
    const kernels::TorusMode m{o.torus->kx, o.torus->ky};
    auto it = std::find_if(modes.begin(), modes.end(), [&](const auto& q) { return q.kx == m.kx && q.ky == m.ky; });
    mode_of.push_back(static_cast<std::size_t>(it - modes.begin()));
    if (it == modes.end()) modes.push_back(m);
  }
  const auto P = static_cast<std::size_t>(grid.cols());
  const std::size_t nm = modes.size();
  std::vector<double> x0(P), y0(P), xe(P), ye(P);
  for (std::size_t p = 0; p < P; ++p) {
    x0[p] = grid(0, static_cast<Eigen::Index>(p));
    y0[p] = grid(1, static_cast<Eigen::Index>(p));
  }
  std::vector<Complex> sums(P * nm), half(P * nm);
  const std::size_t n_half = std::max<std::size_t>(n / 2, 1);
  kernels::OrbitSumsRequest req{x0, y0, spec.param("epsilon"), n, n_half, modes, sums, half, xe, ye};
  kernels::active().standard_map_orbit_sums(req);

  TimeAverageField f;
  f.values.resize(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(dict.size()));
  f.cesaro = RVector::Zero(static_cast<Eigen::Index>(P));
  auto part = [](const TorusTerm& t, Complex v) {
    switch (t.part) {
      case TorusTerm::Part::sin: return Complex(v.imag(), 0.0);
      case TorusTerm::Part::cos: return Complex(v.real(), 0.0);
      default: return v;
    }
  };
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t j = 0; j < dict.size(); ++j) {
      const TorusTerm& t = *dict[j].torus;
      const Complex full = part(t, sums[p * nm + mode_of[j]]) / static_cast<double>(n);
      const Complex h = part(t, half[p * nm + mode_of[j]]) / static_cast<double>(n_half);
      f.values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = full;
      f.cesaro[static_cast<Eigen::Index>(p)] = std::max(f.cesaro[static_cast<Eigen::Index>(p)], std::abs(full - h));
    }
  }
  f.diverged.assign(P, false);
  return f;
}

}  // namespace

TimeAverageField time_average(const ObservableDictionary& dict, const SystemSpec& spec, const RMatrix& grid,
                              std::size_t n, double dt) {
  if (n < 1) throw UsageError("time_average: n must be >= 1");
  if (dict.empty()) throw UsageError("time_average: empty dictionary");
  if (grid.cols() < 1) throw UsageError("time_average: empty grid");
  if (static_cast<std::size_t>(grid.rows()) != spec.dimension())
    throw UsageError("time_average: grid points do not match the system dimension");

  TimeAverageField f;
  if (torus_fast_path(dict, spec, grid)) {
    f = standard_map_averages(dict, spec, grid, n);
  } else {
    const Eigen::Index P = grid.cols();
    const auto N = static_cast<Eigen::Index>(dict.size());
    const std::size_t n_half = std::max<std::size_t>(n / 2, 1);
    f.values.resize(P, N);
    f.cesaro = RVector::Zero(P);
    f.diverged.assign(static_cast<std::size_t>(P), false);
    Stepper stepper(spec, dt);
    const Complex nan(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index p = 0; p < P; ++p) {
      StateVector s = grid.col(p);
      CVector sum = CVector::Zero(N), half = CVector::Zero(N);
      bool bad = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == n_half) half = sum;
        if (!s.allFinite()) {
          bad = true;
          break;
        }
        sum += dict.evaluate(s, i);
        stepper.advance(s);
      }
      if (n_half >= n) half = sum;
      if (bad) {
        f.diverged[static_cast<std::size_t>(p)] = true;
        f.values.row(p).setConstant(nan);
        f.cesaro[p] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const CVector full = sum / static_cast<double>(n);
      f.values.row(p) = full.transpose();
      f.cesaro[p] = (full - half / static_cast<double>(n_half)).cwiseAbs().maxCoeff();
    }
  }
  f.grid = grid;
  f.names = dict.names();
  f.n_iterations = n;
  f.dt = is_map(spec.kind()) ? 0.0 : dt;
  return f;
}

GlaResult gla_eigenfunction(const CVector& g, Complex lambda, std::size_t n, std::size_t count) {
  if (n < 1) throw UsageError("gla_eigenfunction: window must be >= 1");
  if (lambda == Complex(0.0, 0.0)) throw SingularError("gla_eigenfunction: lambda must be nonzero");
  const auto L = static_cast<std::size_t>(g.size());
  if (L < n + 1) throw SizeError("gla_eigenfunction: series shorter than window + 1");
  const std::size_t available = L - n + 1;
  if (count == 0) count = available;
  if (count > available) throw SizeError("gla_eigenfunction: not enough samples for the requested positions");

  GlaResult r;
  r.window = n;
  if (std::abs(std::abs(lambda) - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "gla_eigenfunction: |lambda| = " << std::abs(lambda)
       << " is not 1; harmonic averages diverge or vanish off the unit circle";
    r.warnings.push_back(os.str());
  }

  const Complex log_inv = -std::log(lambda);
  CVector powers(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) powers[static_cast<Eigen::Index>(j)] = std::exp(static_cast<double>(j) * log_inv);

  const auto& kern = kernels::active();
  r.samples.resize(static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k)
    r.samples[static_cast<Eigen::Index>(k)] = kern.dotu(powers.data(), g.data() + k, n) / static_cast<double>(n);

  if (count >= 2) {
    const auto c = static_cast<Eigen::Index>(count);
    const CVector diff = r.samples.tail(c - 1) - lambda * r.samples.head(c - 1);
    const double norm = r.samples.head(c - 1).norm();
    r.residual = norm > 0.0 ? diff.norm() / norm : diff.norm();
  }
  r.constant = r.residual * static_cast<double>(n);
  return r;
}

namespace {

std::vector<double> quantile_edges(std::vector<double> v, int bins) {
  std::sort(v.begin(), v.end());
  std::vector<double> edges;
  const std::size_t N = v.size();
  for (int i = 1; i < bins; ++i) edges.push_back(v[static_cast<std::size_t>(i) * N / static_cast<std::size_t>(bins)]);
  return edges;
}

int bin_of(const std::vector<double>& edges, double v) {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
}

}  // namespace

PartitionLabeling quantile_partition(const RMatrix& values, int bins_per_column, const std::vector<std::string>& columns,
                                     const std::vector<bool>& excluded) {
  if (bins_per_column < 1) throw UsageError("partition: bins must be >= 1");
  const Eigen::Index P = values.rows();
  if (P < 1 || values.cols() < 1) throw UsageError("partition: no values to bin");
  if (!excluded.empty() && static_cast<Eigen::Index>(excluded.size()) != P)
    throw SizeError("partition: exclusion mask does not match the points");
  auto skip = [&](Eigen::Index p) { return !excluded.empty() && excluded[static_cast<std::size_t>(p)]; };

  PartitionLabeling out;
  out.columns = columns;
  if (out.columns.empty())
    for (Eigen::Index c = 0; c < values.cols(); ++c) out.columns.push_back("c" + std::to_string(c));

  std::vector<std::vector<int>> bins(static_cast<std::size_t>(P));
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    std::vector<double> kept;
    for (Eigen::Index p = 0; p < P; ++p)
      if (!skip(p)) kept.push_back(values(p, c));
    if (kept.empty()) break;
    out.bin_edges.push_back(quantile_edges(kept, bins_per_column));
    for (Eigen::Index p = 0; p < P; ++p)
      if (!skip(p)) bins[static_cast<std::size_t>(p)].push_back(bin_of(out.bin_edges.back(), values(p, c)));
  }

  std::map<std::vector<int>, int> ids;
  out.cell_id.assign(static_cast<std::size_t>(P), -1);
  for (Eigen::Index p = 0; p < P; ++p) {
    if (skip(p)) continue;
    auto [it, inserted] = ids.emplace(bins[static_cast<std::size_t>(p)], static_cast<int>(ids.size()));
    out.cell_id[static_cast<std::size_t>(p)] = it->second;
  }
  out.cells = static_cast<int>(ids.size());
  return out;
}

PartitionLabeling ergodic_partition_approx(const TimeAverageField& field, int bins_per_obs) {
  const Eigen::Index P = field.values.rows();
  std::vector<Eigen::Index> re_cols, im_cols;
  std::vector<std::string> names;
  RMatrix cols(P, 2 * field.values.cols());
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < field.values.cols(); ++j) {
    const std::string base = j < static_cast<Eigen::Index>(field.names.size()) ? field.names[static_cast<std::size_t>(j)]
                                                                                : "g" + std::to_string(j);
    bool has_imag = false;
    for (Eigen::Index p = 0; p < P; ++p) {
      if (!field.diverged.empty() && field.diverged[static_cast<std::size_t>(p)]) continue;
      if (field.values(p, j).imag() != 0.0) has_imag = true;
    }
    cols.col(c++) = field.values.col(j).real();
    names.push_back(has_imag ? "re(" + base + ")" : base);
    if (has_imag) {
      cols.col(c++) = field.values.col(j).imag();
      names.push_back("im(" + base + ")");
    }
  }
  return quantile_partition(cols.leftCols(c), bins_per_obs, names, field.diverged);
}

double partition_invariance_score(const PartitionLabeling& labeling, const Grid2D& grid, const SystemSpec& spec,
                                  std::size_t n_test, double dt) {
  if (labeling.cell_id.size() != grid.size()) throw SizeError("partition_invariance_score: labels do not match the grid");
  if (spec.dimension() != 2) throw UsageError("partition_invariance_score: needs a two-dimensional system");
  if (n_test < 1) throw UsageError("partition_invariance_score: n_test must be >= 1");
  const RMatrix pts = grid.points();
  Stepper stepper(spec, dt);
  std::size_t matches = 0, total = 0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const int label = labeling.cell_id[p];
    if (label < 0) continue;
    StateVector s = pts.col(static_cast<Eigen::Index>(p));
    for (std::size_t k = 1; k <= n_test; ++k) {
      stepper.advance(s);
      const auto q = grid.nearest(s[0], s[1]);
      ++total;
      if (q && labeling.cell_id[*q] == label) ++matches;
    }
  }
  return total > 0 ? static_cast<double>(matches) / static_cast<double>(total) : 1.0;
}

EigenfunctionPartition eigenfunction_partition(const CVector& phi, const CVector& phi_evolved, Complex multiplier,
                                               int magnitude_bins, int phase_bins) {
  if (phi.size() != phi_evolved.size()) throw SizeError("eigenfunction_partition: sample counts differ");
  if (phi.size() < 1) throw UsageError("eigenfunction_partition: no samples");
  if (magnitude_bins < 1 || phase_bins < 1) throw UsageError("eigenfunction_partition: bins must be >= 1");
  const Eigen::Index P = phi.size();

  std::vector<double> mags(static_cast<std::size_t>(P));
  for (Eigen::Index p = 0; p < P; ++p) mags[static_cast<std::size_t>(p)] = std::abs(phi[p]);
  const auto edges = quantile_edges(mags, magnitude_bins);
  auto phase_bin = [phase_bins](Complex z) {
    const double a = std::arg(z);
    int b = static_cast<int>(std::floor((a + std::numbers::pi) / (2.0 * std::numbers::pi) * phase_bins));
    return std::clamp(b, 0, phase_bins - 1);
  };
  auto raw = [&](Complex z) { return bin_of(edges, std::abs(z)) * phase_bins + phase_bin(z); };

  EigenfunctionPartition out;
  RMatrix joint(P, 1);
  out.predicted.resize(static_cast<std::size_t>(P));
  out.observed.resize(static_cast<std::size_t>(P));
  std::size_t mismatches = 0;
  for (Eigen::Index p = 0; p < P; ++p) {
    joint(p, 0) = raw(phi[p]);
    out.predicted[static_cast<std::size_t>(p)] = raw(multiplier * phi[p]);
    out.observed[static_cast<std::size_t>(p)] = raw(phi_evolved[p]);
    if (out.predicted[static_cast<std::size_t>(p)] != out.observed[static_cast<std::size_t>(p)]) ++mismatches;
  }
  out.mismatch_rate = static_cast<double>(mismatches) / static_cast<double>(P);

  // Dense relabeling of the raw (magnitude, phase) cells in first-appearance order.
  std::map<int, int> ids;
  out.labeling.cell_id.resize(static_cast<std::size_t>(P));
  for (Eigen::Index p = 0; p < P; ++p) {
    auto [it, inserted] = ids.emplace(static_cast<int>(joint(p, 0)), static_cast<int>(ids.size()));
    out.labeling.cell_id[static_cast<std::size_t>(p)] = it->second;
  }
  out.labeling.cells = static_cast<int>(ids.size());
  out.labeling.bin_edges.push_back(edges);
  std::vector<double> phase_edges;
  for (int i = 1; i < phase_bins; ++i) phase_edges.push_back(-std::numbers::pi + 2.0 * std::numbers::pi * i / phase_bins);
  out.labeling.bin_edges.push_back(phase_edges);
  out.labeling.columns = {"abs(phi)", "arg(phi)"};
  return out;
}

}  // namespace koopman
