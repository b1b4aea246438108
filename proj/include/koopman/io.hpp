#pragma once

// JSON and CSV conversion of the library's data types.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "koopman/dictionary.hpp"
#include "koopman/dmd.hpp"
#include "koopman/finite_section.hpp"
#include "koopman/gla.hpp"
#include "koopman/mori_zwanzig.hpp"
#include "koopman/representation.hpp"
#include "koopman/static_koopman.hpp"
#include "koopman/systems.hpp"

namespace koopman {

using Json = nlohmann::json;

/// Invalid configuration; `path` locates the offending field ("a.b[2].c").
class SchemaError : public UsageError {
 public:
  SchemaError(std::string path, const std::string& what)
      : UsageError(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

Json complex_to_json(Complex z);
Json complex_list_to_json(const std::vector<Complex>& v);
/// Rows of the matrix as lists of {"re","im"} objects.
Json complex_matrix_to_json(const CMatrix& m);

/// {"kind": string, "params": {string: number}}
Json system_spec_to_json(const SystemSpec& spec);
SystemSpec system_spec_from_json(const Json& j, const std::string& path = "system");

/// Entry types:
///   constant                          1
///   coordinate   index                x_index
///   monomial     powers               prod x_i^p_i (negative powers allowed)
///   polynomial   terms [{coef, powers}] coef real or [re, im]
///   fourier      k, period = 1        exp(i 2 pi k.x / period)
///   angle        k                    exp(i k.x), x in radians
///   sin, cos     k, period = 1        sin/cos(2 pi k.x / period)
///   product      of [names]           product of earlier entries
Observable observable_from_json(const Json& j, const ObservableDictionary& earlier, const std::string& path);
ObservableDictionary dictionary_from_json(const Json& j, const std::string& path = "dictionary");

/// {"eigenvalues":[{"re","im"}], "modes":[[..]], "eigenfunction_samples":[[..]]}
Json spectral_triple_to_json(const SpectralTriple& t);
Json finite_section_to_json(const FiniteSectionMatrix& u);
Json representation_to_json(const RepresentationModel& m);
Json closure_to_json(const ClosureResult& r);

/// t,coord_0,...,coord_{n-1}
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// One row per matrix row, re/im interleaved: re_0,im_0,re_1,im_1,...
void write_complex_matrix_csv(std::ostream& os, const CMatrix& m);
void write_real_matrix_csv(std::ostream& os, const RMatrix& m, const std::vector<std::string>& header = {});
/// X.csv and Xp.csv in `dir`, rows = observables.
void write_snapshot_pair(const std::string& dir, const SnapshotPair& p);
/// x,y,...,g*_<name>,...,cell_id (complex averages as _re/_im column pairs).
void write_time_average_csv(std::ostream& os, const TimeAverageField& field, const PartitionLabeling& labeling);
/// k,resolved_norm,orthogonal_norm,cross_norm for target column `target`.
void write_mz_norms_csv(std::ostream& os, const MzDecomposition& d, Eigen::Index target = 0);
/// n,m,re,im
void write_lattice_csv(std::ostream& os, const std::vector<LatticePoint>& points);

/// Header split,c0,...; rows whose split is "input" or "output", paired in order
/// of appearance. Blocks may have different widths (trailing cells empty).
PairedSamples read_paired_csv(std::istream& is);

}  // namespace koopman
