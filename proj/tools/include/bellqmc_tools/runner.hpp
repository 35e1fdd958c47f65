#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bellqmc/estimators.hpp"
#include "bellqmc/ext_ensemble.hpp"
#include "bellqmc/model.hpp"

namespace bellqmc::tools {

inline constexpr int summary_schema_version = 1;

/// Observable request as written in the config; resolved against the lattice.
struct ObservableSpec {
  nlohmann::json raw;
};

struct TopoSpec {
  std::string label, ab, bc, abc, b;
};

struct TiSpec {
  nlohmann::json region;
  ExtMethod method = ExtMethod::analytic_B;
  int nodes = 16;
};

struct RunConfig {
  ModelSpec model;
  double beta = 1.0;
  std::int64_t n_equilibration_sweeps = 0;
  std::int64_t n_measurement_sweeps = 0;
  std::size_t block_size = default_block_size;
  std::uint64_t master_seed = 1;
  int n_chains = 1;
  std::vector<ObservableSpec> observables;
  std::vector<TopoSpec> topo;
  std::optional<TiSpec> ti;
  bool write_checkpoints = false;
  std::filesystem::path output_dir = "bellqmc_out";
};

/// Parses a JSON config; ConfigError messages name the offending field path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Reads "4L", "4*L" or a number.
double parse_beta(const nlohmann::json& value, int L);

/// Resolves a region description ({"sites": [...]}, {"mid_chain": ell},
/// {"block": [first, length]}, {"square": m}, {"stars": [x0, y0, m]}).
SquareRegion resolve_region(const Lattice& lat, const nlohmann::json& desc, const std::string& path);

std::vector<Observable> build_observables(const RunConfig& cfg);

/// Seed of chain k: splitmix64 applied to master_seed + (k + 1) * golden gamma.
std::uint64_t chain_seed(std::uint64_t master_seed, std::uint64_t k);

/// Equilibrates with cutoff growth, then freezes the cutoff.
void equilibrate(ChainState& st, std::int64_t sweeps, const SliceZeroPolicy* policy = nullptr);

struct RunOutcome {
  std::vector<ObservableResult> rows;
  nlohmann::json summary;
  bool partial = false;
};

/// `run`: all chains, merged in chain order. Writes observables.csv,
/// summary.json, run.log and (optionally) per-chain checkpoints.
RunOutcome run(const RunConfig& cfg, int threads, std::ostream& log);

struct TiNode {
  double lambda = 0.0;
  BinnedSeries e1, e2, empty;
  double e1_variance = 0.0, e2_variance = 0.0;
  std::size_t n_samples = 0;
  bool has_e1 = false;
};

struct TiOutcome {
  std::vector<TiNode> nodes;
  Estimate s2;
  nlohmann::json summary;
};

/// `ti`: one extended-ensemble simulation per quadrature node (times n_chains).
TiOutcome thermodynamic_integration(const RunConfig& cfg, int threads, std::ostream& log);

/// `oracle`: exact reference values as JSON.
nlohmann::json oracle(const ModelSpec& model, std::optional<double> beta);

/// `check`: tiny self-tests; prints one line per test, returns true if all pass.
bool self_check(std::ostream& out, std::uint64_t seed);

/// Runs jobs 0..n-1 on up to `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int)>& job);

}  // namespace bellqmc::tools
