// koopman: command-line front end.
//
//   koopman run <config.json> [--set path=value]... [--out dir]
//   koopman partition <config.json>      (run with method forced to partition)
//   koopman repr check <config.json>     (run with method forced to repr_check)
//   koopman list-systems
//   koopman lattice --c C --omega W --N N --M M
//
// Exit codes: 0 ok, 2 invalid input, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "koopman/runner.hpp"

namespace fs = std::filesystem;
using namespace koopman;

namespace {

int run_config(const std::string& path, const std::vector<std::string>& sets, const std::string& out,
               const std::string& forced_method) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << '\n';
    return 2;
  }
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    std::cerr << "error: " << path << " is not valid JSON\n";
    return 2;
  }
  try {
    for (const auto& s : sets) apply_override(j, s);
    if (!forced_method.empty()) j["method"] = forced_method;
    const fs::path base = fs::path(path).parent_path();
    const ExperimentConfig cfg = parse_config(j, base);
    fs::path dir = out;
    if (dir.empty()) dir = cfg.output_dir.empty() ? fs::path("out") : base / cfg.output_dir;
    const RunResult r = run_experiment(cfg, dir);
    std::cout << r.report;
    std::cout << "wrote " << r.artifacts.size() << " artifacts to " << dir.string() << '\n';
    return 0;
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Koopman operator toolkit"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  std::string out;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config, "Config file")->required();
  run->add_option("--set", sets, "Override a field, path=value");
  run->add_option("--out", out, "Output directory");

  auto* part = app.add_subcommand("partition", "Ergodic partition of a config's grid");
  part->add_option("config", config, "Config file")->required();
  part->add_option("--set", sets, "Override a field, path=value");
  part->add_option("--out", out, "Output directory");

  auto* repr = app.add_subcommand("repr", "Representation tools");
  auto* check = repr->add_subcommand("check", "Residual, faithfulness and efficiency checks");
  check->add_option("config", config, "Config file")->required();
  check->add_option("--set", sets, "Override a field, path=value");
  check->add_option("--out", out, "Output directory");
  repr->require_subcommand(1);

  auto* list = app.add_subcommand("list-systems", "Print the built-in systems and their parameters");

  double c = 1.0, omega = 1.0;
  int N = 2, M = 2;
  auto* lattice = app.add_subcommand("lattice", "Eigenvalue lattice of the Duffing fixed point");
  lattice->add_option("--c", c, "Damping")->required();
  lattice->add_option("--omega", omega, "Frequency")->required();
  lattice->add_option("--N", N, "Powers 0..N of the first eigenvalue")->check(CLI::NonNegativeNumber);
  lattice->add_option("--M", M, "Powers 0..M of the second eigenvalue")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return run_config(config, sets, out, "");
  if (part->parsed()) return run_config(config, sets, out, "partition");
  if (check->parsed()) return run_config(config, sets, out, "repr_check");
  if (list->parsed()) {
    for (SystemKind k : all_system_kinds()) {
      std::cout << to_string(k) << (is_map(k) ? "  (map)" : "  (flow)");
      if (k == SystemKind::linear_map) {
        std::cout << "  B_i_j for i, j < n (required; n x n, n inferred)\n";
        continue;
      }
      const SystemSpec s = SystemSpec::create(k);
      std::cout << "  dim " << s.dimension();
      const Json j = system_spec_to_json(s);
      for (const auto& [name, value] : j["params"].items()) std::cout << "  " << name << "=" << value.dump();
      std::cout << '\n';
    }
    return 0;
  }
  if (lattice->parsed()) {
    try {
      write_lattice_csv(std::cout, duffing_lattice(c, omega, N, M));
      return 0;
    } catch (const UsageError& e) {
      std::cerr << "usage error: " << e.what() << '\n';
      return 2;
    } catch (const Error& e) {
      std::cerr << "numerical error: " << e.what() << '\n';
      return 3;
    }
  }
  return 2;
}
