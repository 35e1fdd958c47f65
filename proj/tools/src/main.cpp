#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bellqmc/errors.hpp"
#include "bellqmc_tools/runner.hpp"

namespace {

using bellqmc::tools::RunConfig;

RunConfig read_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                      const std::string& out) {
  std::ifstream in(path);
  if (!in) throw bellqmc::ConfigError("cannot open config " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw bellqmc::ConfigError("config " + path + ": " + e.what());
  }
  // Command-line values take precedence over the file.
  if (seed) doc["master_seed"] = *seed;
  if (!out.empty()) doc["output_dir"] = out;
  return bellqmc::tools::parse_config(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bell-basis stochastic series expansion for the Ising chain and the Z2 gauge theory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;

  auto* run = app.add_subcommand("run", "equilibrate and measure the configured observables");
  auto* ti = app.add_subcommand("ti", "thermodynamic integration of S2 over a lambda grid");
  for (auto* sub : {run, ti}) {
    sub->add_option("config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  auto* orc = app.add_subcommand("oracle", "exact-diagonalization reference values as JSON");
  orc->set_help_flag("--help", "print this help message and exit");
  std::string model = "tfim", boundary = "open";
  int L = 8;
  double h = 1.0;
  std::optional<double> beta;
  orc->add_option("--model", model, "tfim or lgt");
  orc->add_option("--L", L, "linear size")->required();
  orc->add_option("--h", h, "transverse field");
  orc->add_option("--beta", beta, "inverse temperature (ground state if omitted)");
  orc->add_option("--boundary", boundary, "open or periodic (chain only)");
  orc->add_option("--out", out_dir, "directory for oracle.json (stdout if omitted)");

  auto* check = app.add_subcommand("check", "quick self-test at tiny sizes");
  std::uint64_t check_seed = 1;
  check->add_option("--seed", check_seed, "seed");
  check->add_option("--threads", threads, "ignored; the self-test is serial");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto cfg = read_config(config_path, seed, out_dir);
      const auto outcome = bellqmc::tools::run(cfg, threads, std::cerr);
      std::cout << outcome.summary.dump(2) << '\n';
      return outcome.partial ? 2 : 0;
    }
    if (ti->parsed()) {
      const auto cfg = read_config(config_path, seed, out_dir);
      const auto outcome = bellqmc::tools::thermodynamic_integration(cfg, threads, std::cerr);
      std::cout << outcome.summary.dump(2) << '\n';
      return 0;
    }
    if (orc->parsed()) {
      const auto kind = bellqmc::model_kind_from_string(model);
      if (boundary != "open" && boundary != "periodic") throw bellqmc::ConfigError("--boundary: open or periodic");
      const auto spec = kind == bellqmc::ModelKind::tfim_1d
                            ? bellqmc::make_tfim(L, boundary == "open" ? bellqmc::Boundary::open
                                                                       : bellqmc::Boundary::periodic, h)
                            : bellqmc::make_lgt(L, h);
      const auto j = bellqmc::tools::oracle(spec, beta);
      if (out_dir.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        std::filesystem::create_directories(out_dir);
        std::ofstream(std::filesystem::path(out_dir) / "oracle.json") << j.dump(2) << '\n';
      }
      return 0;
    }
    if (check->parsed()) return bellqmc::tools::self_check(std::cout, check_seed) ? 0 : 1;
  } catch (const bellqmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
