#include "koopman/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "koopman/embedding.hpp"

namespace koopman {
namespace {

namespace fs = std::filesystem;

// ---- schema helpers -------------------------------------------------------

void allow_keys(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || key == k;
    if (!ok) throw SchemaError(path.empty() ? key : path + "." + key, "unknown field");
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double get_number(const Json& obj, const std::string& path, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw SchemaError(join(path, key), "missing");
  }
  if (!obj[key].is_number()) throw SchemaError(join(path, key), "expected a number");
  return obj[key].get<double>();
}

std::size_t get_count(const Json& obj, const std::string& path, const char* key, std::optional<std::size_t> fallback = std::nullopt,
                      std::size_t minimum = 0) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw SchemaError(join(path, key), "missing");
  }
  const Json& v = obj[key];
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(minimum))
    throw SchemaError(join(path, key), "expected an integer >= " + std::to_string(minimum));
  return static_cast<std::size_t>(v.get<long long>());
}

bool get_bool(const Json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw SchemaError(join(path, key), "expected true or false");
  return obj[key].get<bool>();
}

std::string get_string(const Json& obj, const std::string& path, const char* key, std::optional<std::string> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw SchemaError(join(path, key), "missing");
  }
  if (!obj[key].is_string()) throw SchemaError(join(path, key), "expected a string");
  return obj[key].get<std::string>();
}

Complex get_complex(const Json& obj, const std::string& path, const char* key) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) throw SchemaError(p, "missing");
  const Json& v = obj[key];
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_object() && v.contains("re") && v["re"].is_number() && (!v.contains("im") || v["im"].is_number()))
    return {v["re"].get<double>(), v.value("im", 0.0)};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<double>(), v[1].get<double>()};
  throw SchemaError(p, "expected a number, [re, im] or {re, im}");
}

std::vector<std::string> get_names(const Json& obj, const std::string& path, const char* key) {
  std::vector<std::string> out;
  if (!obj.contains(key)) return out;
  const Json& v = obj[key];
  if (!v.is_array()) throw SchemaError(join(path, key), "expected a list of names");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) throw SchemaError(join(path, key) + "[" + std::to_string(i) + "]", "expected a name");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

std::vector<std::size_t> indices_of(const ObservableDictionary& dict, const std::vector<std::string>& names,
                                    const std::string& path) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    try {
      out.push_back(dict.index_of(names[i]));
    } catch (const UsageError&) {
      throw SchemaError(path + "[" + std::to_string(i) + "]", "no dictionary entry named '" + names[i] + "'");
    }
  }
  return out;
}

// ---- shared pieces ---------------------------------------------------------

struct Context {
  const ExperimentConfig& cfg;
  fs::path out;
  RunResult result;
  Warnings warnings;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  bool csv() const { return std::find(cfg.formats.begin(), cfg.formats.end(), "csv") != cfg.formats.end(); }
  bool json() const { return std::find(cfg.formats.begin(), cfg.formats.end(), "json") != cfg.formats.end(); }

  void lap(const std::string& phase) {
    const auto now = std::chrono::steady_clock::now();
    result.timing[phase] = std::chrono::duration<double>(now - t0).count();
    t0 = now;
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (out / name).string());
    result.artifacts.push_back(name);
    return f;
  }

  void write_json(const std::string& name, const Json& j) {
    auto f = open(name);
    f << j.dump(2) << '\n';
  }

  void add(const Warnings& w) { warnings.insert(warnings.end(), w.begin(), w.end()); }
  void line(const std::string& s) { result.report += s + "\n"; }
};

ObservableDictionary require_dictionary(const ExperimentConfig& cfg) {
  if (cfg.dictionary.is_null()) throw SchemaError("dictionary", "required by method '" + cfg.method + "'");
  return dictionary_from_json(cfg.dictionary, "dictionary");
}

Trajectory make_trajectory(const ExperimentConfig& cfg) {
  const Sampling& s = cfg.sampling;
  if (!s.initial) throw SchemaError("sampling.initial", "required by method '" + cfg.method + "'");
  if (s.n < 1) throw SchemaError("sampling.n", "must be >= 1");
  if (!is_map(cfg.system.kind()) && !(s.dt > 0.0)) throw SchemaError("sampling.dt", "must be > 0 for flows");
  Trajectory t = integrate(cfg.system, *s.initial, s.dt, s.n);
  if (s.transient == 0) return t;
  if (s.transient >= t.size()) throw SchemaError("sampling.transient", "discards the whole trajectory");
  const auto keep = static_cast<Eigen::Index>(t.size() - s.transient);
  return Trajectory(t.states().rightCols(keep), t.dt(), cfg.system);
}

std::vector<Complex> sorted(std::vector<Complex> v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return v;
}

void record_eigenvalues(Context& ctx, const std::vector<Complex>& discrete, double dt) {
  const auto ev = sorted(discrete);
  ctx.result.summary["eigenvalues"] = complex_list_to_json(ev);
  if (dt > 0.0) {
    try {
      auto ct = continuous_time_eigenvalues(ev, dt);
      ctx.add(ct.warnings);
      ctx.result.summary["continuous_eigenvalues"] = complex_list_to_json(ct.values);
    } catch (const SingularError& e) {
      ctx.warnings.push_back(e.what());
    }
  }
  std::ostringstream os;
  os << std::setprecision(12);
  os << "eigenvalues:";
  for (const auto& z : ev) os << "  " << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
  ctx.line(os.str());
}

SnapshotPair dictionary_pair(const CMatrix& F, double dt) {
  const Eigen::Index L = F.rows();
  if (L < 2) throw SizeError("need at least two samples");
  return SnapshotPair(F.topRows(L - 1).transpose(), F.bottomRows(L - 1).transpose(), dt);
}

Json limited_triple(const SpectralTriple& t, std::size_t max_samples) {
  SpectralTriple copy = t;
  const auto keep = std::min<Eigen::Index>(copy.eigenfunction_samples.cols(), static_cast<Eigen::Index>(max_samples));
  copy.eigenfunction_samples = CMatrix(copy.eigenfunction_samples.leftCols(keep));
  Json j = spectral_triple_to_json(copy);
  j["eigenfunction_samples_total"] = t.eigenfunction_samples.cols();
  return j;
}

// ---- methods ----------------------------------------------------------------

void run_pinv_dmd(Context& ctx) {
  const auto& cfg = ctx.cfg;
  allow_keys(cfg.options, "options", {"max_exported_samples"});
  const auto max_samples = get_count(cfg.options, "options", "max_exported_samples", 1000);
  const auto dict = require_dictionary(cfg);
  const Trajectory traj = make_trajectory(cfg);
  ctx.lap("trajectory");
  auto ev = evaluate_dictionary(dict, traj);
  ctx.add(ev.warnings);
  const SnapshotPair p = dictionary_pair(ev.F, traj.dt());
  const CMatrix A = pseudoinverse_dmd(p);
  const double fit = (p.Xp() - A * p.X()).norm() / std::max(p.Xp().norm(), 1e-300);
  ctx.result.summary["residuals"]["fit"] = fit;
  record_eigenvalues(ctx, eigenvalues(A), traj.dt());
  try {
    const SpectralTriple t = spectral_triple(A, p);
    ctx.result.summary["residuals"]["reconstruction"] = t.reconstruction_residual;
    if (ctx.json()) ctx.write_json("spectral_triple.json", limited_triple(t, max_samples));
  } catch (const DefectiveError& e) {
    ctx.warnings.push_back(e.what());
  }
  if (ctx.csv()) {
    auto f = ctx.open("A.csv");
    write_complex_matrix_csv(f, A);
    write_snapshot_pair(ctx.out.string(), p);
    ctx.result.artifacts.push_back("X.csv");
    ctx.result.artifacts.push_back("Xp.csv");
  }
  ctx.line("fit residual " + format_double(fit));
}

void run_companion_dmd(Context& ctx) {
  const auto& cfg = ctx.cfg;
  allow_keys(cfg.options, "options", {"hankel_rows"});
  const auto dict = require_dictionary(cfg);
  const Trajectory traj = make_trajectory(cfg);
  ctx.lap("trajectory");
  auto ev = evaluate_dictionary(dict, traj);
  ctx.add(ev.warnings);
  std::optional<SnapshotPair> p;
  if (cfg.options.contains("hankel_rows")) {
    const auto rows = get_count(cfg.options, "options", "hankel_rows", std::nullopt, 1);
    p.emplace(hankel_pair(ev.F.transpose(), rows, traj.dt()));
  } else {
    p.emplace(dictionary_pair(ev.F, traj.dt()));
  }
  const CompanionModel model = companion_dmd(*p);
  ctx.add(model.warnings);
  ctx.result.summary["residuals"]["companion"] = model.residual;
  ctx.result.summary["metrics"]["used_exact_inverse"] = model.used_exact_inverse;
  std::vector<Complex> c(model.c.data(), model.c.data() + model.c.size());
  ctx.result.summary["metrics"]["c"] = complex_list_to_json(c);
  record_eigenvalues(ctx, eigenvalues(model.C), traj.dt());
  if (ctx.csv()) {
    auto f = ctx.open("companion.csv");
    write_complex_matrix_csv(f, model.C);
  }
  ctx.line("companion residual " + format_double(model.residual));
}

void run_edmd(Context& ctx) {
  const auto& cfg = ctx.cfg;
  allow_keys(cfg.options, "options", {"subset", "library", "max_exported_samples"});
  const auto max_samples = get_count(cfg.options, "options", "max_exported_samples", 1000);
  const double tol = get_number(cfg.tolerances, "tolerances", "leakage", 1e-6);
  const auto dict = require_dictionary(cfg);
  const auto subset = indices_of(dict, get_names(cfg.options, "options", "subset"), "options.subset");
  const auto library = indices_of(dict, get_names(cfg.options, "options", "library"), "options.library");
  const Trajectory traj = make_trajectory(cfg);
  ctx.lap("trajectory");

  const FiniteSectionMatrix u = finite_section_matrix(dict, traj);
  ctx.add(u.warnings);
  ctx.result.summary["residuals"]["form_agreement"] = u.form_agreement;
  ctx.result.summary["metrics"]["sample_count"] = u.sample_count;
  record_eigenvalues(ctx, eigenvalues(u.U), traj.dt());

  if (!subset.empty()) {
    const auto lin = detect_linear_subrepresentation(u, subset, tol);
    ctx.result.summary["metrics"]["linear_subrepresentation"] = {
        {"subset", lin.names}, {"is_linear", lin.is_linear}, {"leakage", lin.leakage}};
    if (!library.empty()) {
      const auto nl = detect_nonlinear_representation(u, subset, library, tol);
      Json undeclared = Json::array();
      for (const auto& t : nl.undeclared) undeclared.push_back({{"name", t.name}, {"magnitude", t.magnitude}});
      ctx.result.summary["metrics"]["nonlinear_representation"] = {{"columns", nl.names},
                                                                   {"is_closed", nl.is_closed},
                                                                   {"leakage", nl.leakage},
                                                                   {"F_coeffs", complex_matrix_to_json(nl.F_coeffs)},
                                                                   {"undeclared", undeclared}};
    }
  }

  auto F = evaluate_dictionary(dict, traj).F;
  const SnapshotPair p = dictionary_pair(F, traj.dt());
  try {
    const SpectralTriple t = spectral_triple(eigenmatrix(u), p);
    ctx.result.summary["residuals"]["reconstruction"] = t.reconstruction_residual;
    if (ctx.json()) ctx.write_json("spectral_triple.json", limited_triple(t, max_samples));
  } catch (const DefectiveError& e) {
    ctx.warnings.push_back(e.what());
  }
  if (ctx.json()) ctx.write_json("finite_section.json", finite_section_to_json(u));
  if (ctx.csv()) {
    auto f = ctx.open("U.csv");
    write_complex_matrix_csv(f, u.U);
  }
  ctx.line("averaged vs least-squares forms differ by " + format_double(u.form_agreement));
}

void run_gla(Context& ctx) {
  const auto& cfg = ctx.cfg;
  allow_keys(cfg.options, "options", {"observable", "lambda", "generator", "window", "count"});
  const auto dict = require_dictionary(cfg);
  const std::string name = get_string(cfg.options, "options", "observable", dict[0].name);
  std::size_t idx = 0;
  try {
    idx = dict.index_of(name);
  } catch (const UsageError&) {
    throw SchemaError("options.observable", "no dictionary entry named '" + name + "'");
  }
  const Trajectory traj = make_trajectory(cfg);
  ctx.lap("trajectory");
  Complex lambda;
  if (cfg.options.contains("lambda")) {
    lambda = get_complex(cfg.options, "options", "lambda");
  } else if (cfg.options.contains("generator")) {
    if (!(traj.dt() > 0.0)) throw SchemaError("options.generator", "needs a flow (dt > 0)");
    lambda = std::exp(get_complex(cfg.options, "options", "generator") * traj.dt());
  } else {
    throw SchemaError("options.lambda", "missing (or give options.generator for flows)");
  }
  const std::size_t window = get_count(cfg.options, "options", "window", traj.size() / 2, 1);
  if (window + 1 > traj.size()) throw SchemaError("options.window", "longer than the trajectory");
  const std::size_t available = traj.size() - window + 1;
  const std::size_t count = get_count(cfg.options, "options", "count", std::min<std::size_t>(available, 1000), 2);
  if (count > available) throw SchemaError("options.count", "exceeds the positions with a full window");

  const ObservableDictionary one = dict.select({idx});
  const CVector g = evaluate_dictionary(one, traj).F.col(0);
  const GlaResult r = gla_eigenfunction(g, lambda, window, count);
  ctx.add(r.warnings);
  ctx.result.summary["eigenvalues"] = complex_list_to_json({lambda});
  ctx.result.summary["residuals"]["eigen_equation"] = r.residual;
  ctx.result.summary["metrics"]["window"] = r.window;
  ctx.result.summary["metrics"]["constant"] = r.constant;
  if (ctx.csv()) {
    auto f = ctx.open("gla.csv");
    f << "k,re,im\n";
    for (Eigen::Index k = 0; k < r.samples.size(); ++k)
      f << k << ',' << format_double(r.samples[k].real()) << ',' << format_double(r.samples[k].imag()) << '\n';
  }
  ctx.line("eigen-equation residual " + format_double(r.residual) + " (C = " + format_double(r.constant) + ")");
}

void run_partition(Context& ctx) {
  const auto& cfg = ctx.cfg;
  allow_keys(cfg.options, "options", {"bins", "n_test"});
  const int bins = static_cast<int>(get_count(cfg.options, "options", "bins", 4, 1));
  const std::size_t n_test = get_count(cfg.options, "options", "n_test", 1, 1);
  const auto dict = require_dictionary(cfg);
  if (!cfg.sampling.grid) throw SchemaError("sampling.grid", "required by method 'partition'");
  if (cfg.system.dimension() != 2) throw SchemaError("system", "partition needs a two-dimensional system");
  if (cfg.sampling.n < 1) throw SchemaError("sampling.n", "must be >= 1");
  if (!is_map(cfg.system.kind()) && !(cfg.sampling.dt > 0.0)) throw SchemaError("sampling.dt", "must be > 0 for flows");
  const Grid2D& grid = *cfg.sampling.grid;

  const TimeAverageField field = time_average(dict, cfg.system, grid.points(), cfg.sampling.n, cfg.sampling.dt);
  ctx.lap("time_average");
  const PartitionLabeling lab = ergodic_partition_approx(field, bins);
  const double score = partition_invariance_score(lab, grid, cfg.system, n_test, cfg.sampling.dt);
  ctx.lap("invariance");

  std::size_t diverged = 0;
  for (bool d : field.diverged) diverged += d ? 1 : 0;
  double cesaro = 0.0;
  for (Eigen::Index p = 0; p < field.cesaro.size(); ++p)
    if (std::isfinite(field.cesaro[p])) cesaro = std::max(cesaro, field.cesaro[p]);
  ctx.result.summary["eigenvalues"] = Json::array();
  ctx.result.summary["residuals"]["cesaro_max"] = cesaro;
  ctx.result.summary["metrics"]["cells"] = lab.cells;
  ctx.result.summary["metrics"]["invariance_score"] = score;
  ctx.result.summary["metrics"]["random_baseline"] = lab.cells > 0 ? 1.0 / lab.cells : 1.0;
  ctx.result.summary["metrics"]["diverged_points"] = diverged;
  if (ctx.csv()) {
    auto f = ctx.open("field.csv");
    write_time_average_csv(f, field, lab);
    auto l = ctx.open("labeling.csv");
    l << "x,y,cell_id\n";
    for (Eigen::Index p = 0; p < field.grid.cols(); ++p)
      l << format_double(field.grid(0, p)) << ',' << format_double(field.grid(1, p)) << ','
        << lab.cell_id[static_cast<std::size_t>(p)] << '\n';
  }
  if (ctx.json()) ctx.write_json("partition.json", {{"cells", lab.cells}, {"invariance_score", score}});
  ctx.line("cells " + std::to_string(lab.cells) + ", invariance score " + format_double(score));
}

void run_static(Context& ctx) {
  const auto& cfg = ctx.cfg;
  allow_keys(cfg.options, "options", {"pairs_csv", "output_dictionary", "input_range"});
  const auto dict_in = require_dictionary(cfg);
  const ObservableDictionary dict_out = cfg.options.contains("output_dictionary")
                                            ? dictionary_from_json(cfg.options["output_dictionary"], "options.output_dictionary")
                                            : dict_in;
  PairedSamples pairs;
  if (cfg.options.contains("pairs_csv")) {
    const fs::path path = cfg.base_dir / get_string(cfg.options, "options", "pairs_csv");
    std::ifstream in(path);
    if (!in) throw SchemaError("options.pairs_csv", "cannot open " + path.string());
    pairs = read_paired_csv(in);
  } else {
    if (!is_map(cfg.system.kind())) throw SchemaError("system", "generated pairs need a map");
    if (cfg.sampling.n < 1) throw SchemaError("sampling.n", "number of pairs must be >= 1");
    const double range = get_number(cfg.options, "options", "input_range", 1.0);
    const auto dim = static_cast<Eigen::Index>(cfg.system.dimension());
    const auto n = static_cast<Eigen::Index>(cfg.sampling.n);
    SeededUniform rng(cfg.sampling.seed);
    pairs.inputs.resize(dim, n);
    pairs.outputs.resize(dim, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index i = 0; i < dim; ++i) pairs.inputs(i, k) = range * (2.0 * rng.next() - 1.0);
      pairs.outputs.col(k) = step_map(cfg.system, pairs.inputs.col(k));
    }
  }
  const StaticFit fit = fit_static_linear(pairs, dict_in, dict_out);
  if (fit.rank_deficient) ctx.warnings.push_back("fit_static_linear: X is rank deficient; minimum-norm solution");
  ctx.result.summary["eigenvalues"] = Json::array();
  ctx.result.summary["residuals"]["fit"] = fit.residual;
  ctx.result.summary["metrics"]["rank"] = fit.rank;
  ctx.result.summary["metrics"]["pairs"] = pairs.count();
  ctx.result.summary["metrics"]["A"] = complex_matrix_to_json(fit.A);
  if (ctx.csv()) {
    auto f = ctx.open("A.csv");
    write_complex_matrix_csv(f, fit.A);
  }
  ctx.line("static fit residual " + format_double(fit.residual));
}

void run_mz(Context& ctx) {
  const auto& cfg = ctx.cfg;
  allow_keys(cfg.options, "options", {"closure", "targets", "k_max"});
  if (cfg.options.contains("closure")) {
    const Json& c = cfg.options["closure"];
    allow_keys(c, "options.closure", {"coefficients", "omega", "m_samples"});
    if (!c.contains("coefficients") || !c["coefficients"].is_array() || c["coefficients"].empty())
      throw SchemaError("options.closure.coefficients", "expected a non-empty list");
    FourierObservable f;
    for (std::size_t i = 0; i < c["coefficients"].size(); ++i) {
      Json holder = {{"v", c["coefficients"][i]}};
      f.coefficients.push_back(get_complex(holder, "options.closure.coefficients[" + std::to_string(i) + "]", "v"));
    }
    const double omega = get_number(c, "options.closure", "omega");
    const std::size_t m = get_count(c, "options.closure", "m_samples", 4096, 1);
    const ClosureResult r = circle_rotation_closure(f, omega, m);
    ctx.add(r.warnings);
    ctx.result.summary["eigenvalues"] = complex_list_to_json({r.lambda_empirical});
    ctx.result.summary["residuals"]["lambda_agreement"] = r.lambda_agreement;
    ctx.result.summary["residuals"]["markov"] = r.residual_markov;
    ctx.result.summary["metrics"]["orthogonal_fraction"] = r.orthogonal_fraction;
    ctx.result.summary["metrics"]["residual_closed_form"] = r.residual_closed_form;
    if (ctx.json()) ctx.write_json("closure.json", closure_to_json(r));
    ctx.line("lambda agreement " + format_double(r.lambda_agreement) + ", markov residual " + format_double(r.residual_markov));
    return;
  }
  const auto span = require_dictionary(cfg);
  if (!cfg.options.contains("targets")) throw SchemaError("options.targets", "missing");
  const auto targets = dictionary_from_json(cfg.options["targets"], "options.targets");
  const std::size_t k_max = get_count(cfg.options, "options", "k_max", 10, 1);
  const Trajectory traj = make_trajectory(cfg);
  ctx.lap("trajectory");
  const CMatrix S = evaluate_dictionary(span, traj).F;
  const CMatrix T = evaluate_dictionary(targets, traj).F;
  const MzDecomposition d = mz_decompose(S, T, k_max);
  ctx.result.summary["eigenvalues"] = complex_list_to_json(sorted(eigenvalues(d.section_matrix)));
  ctx.result.summary["residuals"]["decomposition"] = d.decomposition_error;
  ctx.result.summary["metrics"]["max_orthogonal_norm"] = d.orthogonal_norm.maxCoeff();
  ctx.result.summary["metrics"]["window"] = d.window;
  if (ctx.csv()) {
    const auto names = targets.names();
    for (std::size_t t = 0; t < names.size(); ++t) {
      auto f = ctx.open(names.size() == 1 ? "mz_norms.csv" : "mz_norms_" + names[t] + ".csv");
      write_mz_norms_csv(f, d, static_cast<Eigen::Index>(t));
    }
  }
  ctx.line("max orthogonal norm " + format_double(d.orthogonal_norm.maxCoeff()));
}

void run_sindy(Context& ctx) {
  const auto& cfg = ctx.cfg;
  allow_keys(cfg.options, "options", {"degree", "threshold", "relative", "max_iterations"});
  const Trajectory traj = make_trajectory(cfg);
  ctx.lap("trajectory");
  ObservableDictionary library;
  if (!cfg.dictionary.is_null()) {
    library = dictionary_from_json(cfg.dictionary, "dictionary");
  } else {
    const int degree = static_cast<int>(get_count(cfg.options, "options", "degree", 2));
    std::vector<std::string> names;
    if (traj.dim() <= 3) names.assign({"x", "y", "z"});
    names.resize(traj.dim() <= 3 ? traj.dim() : 0);
    library = monomial_library(traj.dim(), degree, names);
  }
  SindyOptions opt;
  opt.threshold = get_number(cfg.options, "options", "threshold", 0.05);
  opt.relative = get_bool(cfg.options, "options", "relative", true);
  opt.max_iterations = get_count(cfg.options, "options", "max_iterations", 20, 1);
  const RepresentationModel m = sindy_fit(traj, library, opt);
  ctx.lap("fit");
  ctx.result.summary["eigenvalues"] = Json::array();
  ctx.result.summary["residuals"]["representation"] = m.residual;
  ctx.result.summary["metrics"]["iterations"] = m.iterations;
  ctx.result.summary["metrics"]["model"] = representation_to_json(m);
  if (ctx.json()) ctx.write_json("model.json", representation_to_json(m));
  ctx.line("sindy residual " + format_double(m.residual) + " after " + std::to_string(m.iterations) + " iterations");
}

void run_repr_check(Context& ctx) {
  const auto& cfg = ctx.cfg;
  allow_keys(cfg.options, "options", {"max_samples", "neighbors"});
  const std::size_t max_samples = get_count(cfg.options, "options", "max_samples", 2000, 2);
  const std::size_t neighbors = get_count(cfg.options, "options", "neighbors", 12, 2);
  const auto dict = require_dictionary(cfg);
  const Trajectory traj = make_trajectory(cfg);
  ctx.lap("trajectory");
  const CMatrix F = evaluate_dictionary(dict, traj).F;

  const FiniteSectionMatrix u = finite_section_matrix(dict, traj);
  RepresentationModel model = RepresentationModel::linear(dict.names(), eigenmatrix(u));
  model.residual = representation_residual(model, F);

  const std::size_t stride = std::max<std::size_t>(1, (traj.size() + max_samples - 1) / max_samples);
  std::vector<Eigen::Index> rows;
  for (std::size_t k = 0; k < traj.size(); k += stride) rows.push_back(static_cast<Eigen::Index>(k));
  CMatrix Fs(static_cast<Eigen::Index>(rows.size()), F.cols());
  RMatrix Ss(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(traj.dim()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Fs.row(static_cast<Eigen::Index>(r)) = F.row(rows[r]);
    Ss.row(static_cast<Eigen::Index>(r)) = traj.states().col(rows[r]).transpose();
  }
  const FaithfulnessResult faith = faithfulness_estimate(Fs, Ss);
  model.faithful_score = faith.score;
  ctx.lap("checks");

  ctx.result.summary["eigenvalues"] = complex_list_to_json(sorted(eigenvalues(u.U)));
  ctx.result.summary["residuals"]["representation"] = model.residual;
  ctx.result.summary["metrics"]["faithful_score"] = faith.score;
  if (faith.found)
    ctx.result.summary["metrics"]["witness"] = {rows[faith.i] , rows[faith.j]};
  if (rows.size() > neighbors) {
    const auto eff = efficiency_heuristic(Fs, Ss, std::min(neighbors, rows.size() - 1),
                                          std::max<std::size_t>(1, rows.size() / 200));
    ctx.result.summary["metrics"]["efficiency"] = {{"min_singular_ratio", eff.min_singular_ratio},
                                                   {"dependent", eff.dependent}, {"heuristic", true}};
  }
  if (ctx.json()) ctx.write_json("representation.json", representation_to_json(model));

  std::ostringstream os;
  os << std::left << std::setw(24) << "check" << "value\n";
  os << std::setw(24) << "residual" << format_double(model.residual) << '\n';
  os << std::setw(24) << "faithfulness" << format_double(faith.score);
  if (faith.found) os << "  (samples " << rows[faith.i] << ", " << rows[faith.j] << ")";
  ctx.line(os.str());
}

}  // namespace

// ---- public API -----------------------------------------------------------

ExperimentConfig parse_config(const Json& j, const fs::path& base_dir) {
  allow_keys(j, "", {"system", "method", "dictionary", "sampling", "output", "tolerances", "options"});
  ExperimentConfig c;
  c.base_dir = base_dir;
  if (!j.contains("system")) throw SchemaError("system", "missing");
  c.system = system_spec_from_json(j["system"], "system");
  c.method = get_string(j, "", "method");
  const auto& methods = experiment_methods();
  if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
    throw SchemaError("method", "unknown method '" + c.method + "'");
  if (j.contains("dictionary")) {
    c.dictionary = j["dictionary"];
    dictionary_from_json(c.dictionary, "dictionary");  // validate early
  }

  if (j.contains("sampling")) {
    const Json& s = j["sampling"];
    allow_keys(s, "sampling", {"dt", "n", "initial", "grid", "seed", "transient"});
    c.sampling.dt = get_number(s, "sampling", "dt", 0.0);
    if (c.sampling.dt < 0.0) throw SchemaError("sampling.dt", "must be >= 0");
    c.sampling.n = get_count(s, "sampling", "n", 0);
    c.sampling.transient = get_count(s, "sampling", "transient", 0);
    c.sampling.seed = get_count(s, "sampling", "seed", 0);
    if (s.contains("initial")) {
      const Json& init = s["initial"];
      if (!init.is_array() || init.size() != c.system.dimension())
        throw SchemaError("sampling.initial", "expected " + std::to_string(c.system.dimension()) + " numbers");
      StateVector v(static_cast<Eigen::Index>(init.size()));
      for (std::size_t i = 0; i < init.size(); ++i) {
        if (!init[i].is_number()) throw SchemaError("sampling.initial[" + std::to_string(i) + "]", "expected a number");
        v[static_cast<Eigen::Index>(i)] = init[i].get<double>();
      }
      c.sampling.initial = v;
    }
    if (s.contains("grid")) {
      const Json& g = s["grid"];
      allow_keys(g, "sampling.grid", {"nx", "ny", "x0", "x1", "y0", "y1", "periodic"});
      Grid2D grid;
      grid.nx = get_count(g, "sampling.grid", "nx", std::nullopt, 1);
      grid.ny = get_count(g, "sampling.grid", "ny", std::nullopt, 1);
      grid.x0 = get_number(g, "sampling.grid", "x0", 0.0);
      grid.x1 = get_number(g, "sampling.grid", "x1", 1.0);
      grid.y0 = get_number(g, "sampling.grid", "y0", 0.0);
      grid.y1 = get_number(g, "sampling.grid", "y1", 1.0);
      grid.periodic = get_bool(g, "sampling.grid", "periodic", true);
      if (!(grid.x1 > grid.x0)) throw SchemaError("sampling.grid.x1", "must exceed x0");
      if (!(grid.y1 > grid.y0)) throw SchemaError("sampling.grid.y1", "must exceed y0");
      c.sampling.grid = grid;
    }
  }

  if (j.contains("output")) {
    const Json& o = j["output"];
    allow_keys(o, "output", {"dir", "formats"});
    c.output_dir = get_string(o, "output", "dir", "");
    if (o.contains("formats")) {
      c.formats = get_names(o, "output", "formats");
      for (std::size_t i = 0; i < c.formats.size(); ++i)
        if (c.formats[i] != "csv" && c.formats[i] != "json")
          throw SchemaError("output.formats[" + std::to_string(i) + "]", "expected 'csv' or 'json'");
    }
  }
  if (j.contains("tolerances")) {
    allow_keys(j["tolerances"], "tolerances", {"leakage"});
    c.tolerances = j["tolerances"];
  }
  if (j.contains("options")) {
    if (!j["options"].is_object()) throw SchemaError("options", "expected an object");
    c.options = j["options"];
  }
  return c;
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw SchemaError(assignment, "override must look like path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw SchemaError(path, "empty path component");
    if (!node->is_object()) throw SchemaError(path, "cannot descend into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

RunResult run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  Context ctx{config, out_dir, {}, {}};
  ctx.result.summary = Json::object();
  ctx.result.summary["method"] = config.method;
  ctx.result.summary["system"] = system_spec_to_json(config.system);
  ctx.result.summary["seed"] = config.sampling.seed;
  ctx.result.summary["residuals"] = Json::object();
  ctx.result.summary["metrics"] = Json::object();
  ctx.result.timing = Json::object();

  const auto start = std::chrono::steady_clock::now();
  static const std::map<std::string, std::function<void(Context&)>> dispatch = {
      {"companion_dmd", run_companion_dmd}, {"pinv_dmd", run_pinv_dmd}, {"edmd", run_edmd},
      {"gla", run_gla},                     {"partition", run_partition}, {"static", run_static},
      {"mz", run_mz},                       {"sindy", run_sindy},       {"repr_check", run_repr_check}};
  dispatch.at(config.method)(ctx);
  if (!ctx.result.summary.contains("eigenvalues")) ctx.result.summary["eigenvalues"] = Json::array();
  ctx.result.summary["warnings"] = ctx.warnings;

  ctx.result.timing["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<std::string> artifacts = ctx.result.artifacts;
  artifacts.push_back("summary.json");
  artifacts.push_back("timing.json");
  ctx.result.summary["artifacts"] = artifacts;
  {
    std::ofstream f(out_dir / "summary.json", std::ios::binary);
    f << ctx.result.summary.dump(2) << '\n';
  }
  {
    std::ofstream f(out_dir / "timing.json", std::ios::binary);
    f << ctx.result.timing.dump(2) << '\n';
  }
  ctx.result.artifacts = artifacts;
  for (const auto& w : ctx.warnings) ctx.result.report += "warning: " + w + "\n";
  return std::move(ctx.result);
}

}  // namespace koopman
