#include "koopman/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace koopman {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json complex_to_json(Complex z) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return Json{{"re", num(z.real())}, {"im", num(z.imag())}};
}

Json complex_list_to_json(const std::vector<Complex>& v) {
  Json out = Json::array();
  for (const auto& z : v) out.push_back(complex_to_json(z));
  return out;
}

Json complex_matrix_to_json(const CMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

Json system_spec_to_json(const SystemSpec& spec) {
  Json params = Json::object();
  for (const auto& [k, v] : spec.params()) params[k] = v;
  return Json{{"kind", std::string(to_string(spec.kind()))}, {"params", params}};
}

SystemSpec system_spec_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw SchemaError(path + ".kind", "expected a string");
  for (const auto& [key, value] : j.items())
    if (key != "kind" && key != "params") throw SchemaError(path + "." + key, "unknown field");
  SystemKind kind;
  try {
    kind = system_kind_from_string(j["kind"].get<std::string>());
  } catch (const UsageError& e) {
    throw SchemaError(path + ".kind", e.what());
  }
  std::map<std::string, double> params;
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw SchemaError(path + ".params", "expected an object");
    for (const auto& [key, value] : j["params"].items()) {
      if (!value.is_number()) throw SchemaError(path + ".params." + key, "expected a number");
      params[key] = value.get<double>();
    }
  }
  try {
    return SystemSpec::create(kind, std::move(params));
  } catch (const UsageError& e) {
    throw SchemaError(path + ".params", e.what());
  }
}

namespace {

std::vector<int> int_list(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty list of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) throw SchemaError(path + "[" + std::to_string(i) + "]", "expected an integer");
    out.push_back(j[i].get<int>());
  }
  return out;
}

Complex complex_value(const Json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object() && j.contains("re") && j["re"].is_number()) {
    const double im = j.contains("im") && j["im"].is_number() ? j["im"].get<double>() : 0.0;
    return {j["re"].get<double>(), im};
  }
  throw SchemaError(path, "expected a number, [re, im] or {re, im}");
}

double period_of(const Json& j, const std::string& path) {
  if (!j.contains("period")) return 1.0;
  if (!j["period"].is_number() || !(j["period"].get<double>() > 0.0)) throw SchemaError(path + ".period", "expected a positive number");
  return j["period"].get<double>();
}

void allow_fields(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = key == "name" || key == "type";
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw SchemaError(path + "." + key, "unknown field");
  }
}

}  // namespace

Observable observable_from_json(const Json& j, const ObservableDictionary& earlier, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty())
    throw SchemaError(path + ".name", "expected a non-empty string");
  if (!j.contains("type") || !j["type"].is_string()) throw SchemaError(path + ".type", "expected a string");
  const std::string name = j["name"];
  const std::string type = j["type"];
  auto need = [&](const char* field) -> const Json& {
    if (!j.contains(field)) throw SchemaError(path + "." + field, "missing");
    return j[field];
  };

  if (type == "constant") {
    allow_fields(j, path, {});
    return monomial_observable(name, {0});
  }
  if (type == "coordinate") {
    allow_fields(j, path, {"index"});
    const Json& idx = need("index");
    if (!idx.is_number_integer() || idx.get<int>() < 0) throw SchemaError(path + ".index", "expected an integer >= 0");
    std::vector<int> powers(static_cast<std::size_t>(idx.get<int>()) + 1, 0);
    powers.back() = 1;
    return monomial_observable(name, powers);
  }
  if (type == "monomial") {
    allow_fields(j, path, {"powers"});
    return monomial_observable(name, int_list(need("powers"), path + ".powers"));
  }
  if (type == "polynomial") {
    allow_fields(j, path, {"terms"});
    const Json& terms = need("terms");
    if (!terms.is_array() || terms.empty()) throw SchemaError(path + ".terms", "expected a non-empty list");
    std::vector<std::pair<Complex, Observable>> parts;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string tp = path + ".terms[" + std::to_string(t) + "]";
      if (!terms[t].is_object() || !terms[t].contains("coef") || !terms[t].contains("powers"))
        throw SchemaError(tp, "expected {coef, powers}");
      parts.emplace_back(complex_value(terms[t]["coef"], tp + ".coef"),
                         monomial_observable(name, int_list(terms[t]["powers"], tp + ".powers")));
    }
    auto fn = [parts](const StateVector& s) {
      Complex v(0.0, 0.0);
      for (const auto& [c, o] : parts) v += c * o.fn(s);
      return v;
    };
    return {name, fn, std::nullopt};
  }
  if (type == "fourier") {
    allow_fields(j, path, {"k", "period"});
    return fourier_observable(name, int_list(need("k"), path + ".k"), period_of(j, path));
  }
  if (type == "angle") {
    allow_fields(j, path, {"k"});
    return angle_observable(name, int_list(need("k"), path + ".k"));
  }
  if (type == "sin" || type == "cos") {
    allow_fields(j, path, {"k", "period"});
    auto k = int_list(need("k"), path + ".k");
    return type == "sin" ? sin_observable(name, k, period_of(j, path)) : cos_observable(name, k, period_of(j, path));
  }
  if (type == "product") {
    allow_fields(j, path, {"of"});
    const Json& of = need("of");
    if (!of.is_array() || of.empty()) throw SchemaError(path + ".of", "expected a non-empty list of names");
    std::vector<Observable> factors;
    for (std::size_t i = 0; i < of.size(); ++i) {
      const std::string fp = path + ".of[" + std::to_string(i) + "]";
      if (!of[i].is_string()) throw SchemaError(fp, "expected a name");
      try {
        factors.push_back(earlier[earlier.index_of(of[i].get<std::string>())]);
      } catch (const UsageError& e) {
        throw SchemaError(fp, "no earlier entry named '" + of[i].get<std::string>() + "'");
      }
    }
    auto fn = [factors](const StateVector& s) {
      Complex v(1.0, 0.0);
      for (const auto& o : factors) v *= o.fn(s);
      return v;
    };
    return {name, fn, std::nullopt};
  }
  throw SchemaError(path + ".type", "unknown observable type '" + type + "'");
}

ObservableDictionary dictionary_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty list of observables");
  ObservableDictionary dict;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    Observable o = observable_from_json(j[i], dict, p);
    try {
      dict.add(std::move(o));
    } catch (const UsageError& e) {
      throw SchemaError(p + ".name", e.what());
    }
  }
  return dict;
}

Json spectral_triple_to_json(const SpectralTriple& t) {
  Json modes = Json::array();
  for (Eigen::Index j = 0; j < t.modes.cols(); ++j) {
    Json col = Json::array();
    for (Eigen::Index i = 0; i < t.modes.rows(); ++i) col.push_back(complex_to_json(t.modes(i, j)));
    modes.push_back(std::move(col));
  }
  return Json{{"eigenvalues", complex_list_to_json(t.eigenvalues)},
              {"modes", modes},
              {"eigenfunction_samples", complex_matrix_to_json(t.eigenfunction_samples)},
              {"reconstruction_residual", t.reconstruction_residual},
              {"eigenvector_condition", t.eigenvector_condition}};
}

Json finite_section_to_json(const FiniteSectionMatrix& u) {
  return Json{{"names", u.names},
              {"indices", u.indices},
              {"sample_count", u.sample_count},
              {"form_agreement", u.form_agreement},
              {"U", complex_matrix_to_json(u.U)}};
}

Json representation_to_json(const RepresentationModel& m) {
  Json j;
  j["observables"] = m.observables;
  j["continuous_time"] = m.continuous_time;
  j["residual"] = m.residual;
  if (m.faithful_score) j["faithful_score"] = *m.faithful_score;
  switch (m.kind) {
    case RepresentationModel::Kind::linear:
      j["kind"] = "linear";
      j["A"] = complex_matrix_to_json(m.A);
      break;
    case RepresentationModel::Kind::library: {
      j["kind"] = "library";
      j["iterations"] = m.iterations;
      const auto lib = m.library.names();
      Json eqs = Json::object();
      for (Eigen::Index d = 0; d < m.C.cols(); ++d) {
        Json terms = Json::object();
        for (Eigen::Index i = 0; i < m.C.rows(); ++i) {
          const Complex c = m.C(i, d);
          if (c == Complex(0.0, 0.0)) continue;
          terms[lib[static_cast<std::size_t>(i)]] = c.imag() == 0.0 ? Json(c.real()) : complex_to_json(c);
        }
        eqs[m.observables[static_cast<std::size_t>(d)]] = terms;
      }
      j["coefficients"] = eqs;
      break;
    }
    case RepresentationModel::Kind::explicit_map:
      j["kind"] = "explicit";
      break;
  }
  return j;
}

Json closure_to_json(const ClosureResult& r) {
  return Json{{"lambda_analytic", complex_to_json(r.lambda_analytic)},
              {"lambda_empirical", complex_to_json(r.lambda_empirical)},
              {"lambda_agreement", r.lambda_agreement},
              {"residual_markov", r.residual_markov},
              {"residual_closed_form", r.residual_closed_form},
              {"orthogonal_fraction", r.orthogonal_fraction},
              {"warnings", r.warnings}};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  for (std::size_t i = 0; i < traj.dim(); ++i) os << ",coord_" << i;
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << (traj.dt() > 0.0 ? format_double(traj.time(k)) : std::to_string(k));
    for (std::size_t i = 0; i < traj.dim(); ++i)
      os << ',' << format_double(traj.states()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
    os << '\n';
  }
}

void write_complex_matrix_csv(std::ostream& os, const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << "re_" << j << ",im_" << j;
  os << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      os << (j ? "," : "") << format_double(m(i, j).real()) << ',' << format_double(m(i, j).imag());
    os << '\n';
  }
}

void write_real_matrix_csv(std::ostream& os, const RMatrix& m, const std::vector<std::string>& header) {
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
    os << '\n';
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
}

void write_snapshot_pair(const std::string& dir, const SnapshotPair& p) {
  std::filesystem::create_directories(dir);
  std::ofstream x(std::filesystem::path(dir) / "X.csv");
  write_complex_matrix_csv(x, p.X());
  std::ofstream xp(std::filesystem::path(dir) / "Xp.csv");
  write_complex_matrix_csv(xp, p.Xp());
}

void write_time_average_csv(std::ostream& os, const TimeAverageField& field, const PartitionLabeling& labeling) {
  const Eigen::Index P = field.values.rows();
  if (static_cast<Eigen::Index>(labeling.cell_id.size()) != P) throw SizeError("write_time_average_csv: labels do not match");
  static const char* coords[] = {"x", "y", "z"};
  const Eigen::Index dim = field.grid.rows();
  std::vector<bool> complex_col(static_cast<std::size_t>(field.values.cols()), false);
  for (Eigen::Index j = 0; j < field.values.cols(); ++j)
    for (Eigen::Index p = 0; p < P; ++p)
      if (field.values(p, j).imag() != 0.0 && !std::isnan(field.values(p, j).imag())) complex_col[static_cast<std::size_t>(j)] = true;

  for (Eigen::Index i = 0; i < dim; ++i) os << (i ? "," : "") << (dim <= 3 ? coords[i] : "coord_" + std::to_string(i));
  for (Eigen::Index j = 0; j < field.values.cols(); ++j) {
    const std::string name = "g*_" + field.names[static_cast<std::size_t>(j)];
    if (complex_col[static_cast<std::size_t>(j)])
      os << ',' << name << "_re," << name << "_im";
    else
      os << ',' << name;
  }
  os << ",cell_id\n";
  for (Eigen::Index p = 0; p < P; ++p) {
    for (Eigen::Index i = 0; i < dim; ++i) os << (i ? "," : "") << format_double(field.grid(i, p));
    for (Eigen::Index j = 0; j < field.values.cols(); ++j) {
      os << ',' << format_double(field.values(p, j).real());
      if (complex_col[static_cast<std::size_t>(j)]) os << ',' << format_double(field.values(p, j).imag());
    }
    os << ',' << labeling.cell_id[static_cast<std::size_t>(p)] << '\n';
  }
}

void write_mz_norms_csv(std::ostream& os, const MzDecomposition& d, Eigen::Index target) {
  os << "k,resolved_norm,orthogonal_norm,cross_norm\n";
  for (Eigen::Index k = 0; k < d.resolved_norm.rows(); ++k)
    os << k << ',' << format_double(d.resolved_norm(k, target)) << ',' << format_double(d.orthogonal_norm(k, target))
       << ',' << format_double(d.cross_norm(k, target)) << '\n';
}

void write_lattice_csv(std::ostream& os, const std::vector<LatticePoint>& points) {
  os << "n,m,re,im\n";
  for (const auto& p : points)
    os << p.n << ',' << p.m << ',' << format_double(p.value.real()) << ',' << format_double(p.value.imag()) << '\n';
}

PairedSamples read_paired_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("csv", "empty file");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  };
  const auto header = split(strip(line));
  if (header.empty() || header[0] != "split") throw SchemaError("csv.header", "first column must be 'split'");
  const std::size_t width = header.size() - 1;

  std::vector<std::vector<double>> in, out;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    line = strip(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = "csv.row[" + std::to_string(row) + "]";
    if (cells.size() > width + 1) throw SchemaError(where, "too many cells");
    std::vector<double> vals;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) break;
      double v = 0.0;
      auto res = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (res.ec != std::errc() || res.ptr != cells[c].data() + cells[c].size())
        throw SchemaError(where, "cell '" + cells[c] + "' is not a number");
      vals.push_back(v);
    }
    if (cells[0] == "input")
      in.push_back(std::move(vals));
    else if (cells[0] == "output")
      out.push_back(std::move(vals));
    else
      throw SchemaError(where + ".split", "expected 'input' or 'output'");
  }
  if (in.empty() || in.size() != out.size()) throw SchemaError("csv", "input and output row counts differ or are zero");
  auto to_matrix = [](const std::vector<std::vector<double>>& rows, const char* what) {
    const std::size_t d = rows.front().size();
    if (d == 0) throw SchemaError("csv", std::string(what) + " rows are empty");
    RMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].size() != d) throw SchemaError("csv", std::string(what) + " rows have different widths");
      for (std::size_t i = 0; i < d; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[k][i];
    }
    return m;
  };
  PairedSamples p{to_matrix(in, "input"), to_matrix(out, "output")};
  p.validate();
  return p;
}

}  // namespace koopman
