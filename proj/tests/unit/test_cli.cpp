#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bellqmc/errors.hpp"
#include "bellqmc_tools/runner.hpp"

using namespace bellqmc;
using namespace bellqmc::tools;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config(const fs::path& out) {
  return json{{"model", "tfim"},
              {"L", 6},
              {"h", 1.0},
              {"boundary", "open"},
              {"beta", "1L"},
              {"n_equilibration_sweeps", 200},
              {"n_measurement_sweeps", 800},
              {"block_size", 50},
              {"master_seed", 7},
              {"n_chains", 3},
              {"output_dir", out.string()},
              {"observables",
               json::array({json{{"type", "energy"}},
                            json{{"type", "pauli_sq"}, {"label", "Z0Z1"}, {"pauli", "ZZIIII"}},
                            json{{"type", "renyi2"}, {"label", "A2"}, {"region", {{"mid_chain", 2}}}},
                            json{{"type", "renyi2"}, {"label", "A4"}, {"region", {{"mid_chain", 4}}}}})}};
}

std::string message_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("bellqmc_test_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BELLQMC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesValidDocument) {
  const auto cfg = parse_config(small_config("out"));
  EXPECT_EQ(cfg.model.lattice.n_sites, 6);
  EXPECT_DOUBLE_EQ(cfg.beta, 6.0);
  EXPECT_EQ(cfg.block_size, 50u);
  EXPECT_EQ(build_observables(cfg).size(), 4u);
}

TEST(Config, DefaultsAreOnlyBlockSizeAndNodes) {
  auto doc = small_config("out");
  doc.erase("block_size");
  doc["ti"] = {{"region", {{"mid_chain", 2}}}};
  const auto cfg = parse_config(doc);
  EXPECT_EQ(cfg.block_size, 5000u);
  ASSERT_TRUE(cfg.ti);
  EXPECT_EQ(cfg.ti->nodes, 16);
}

TEST(Config, ErrorsNameTheField) {
  auto doc = small_config("out");
  doc.erase("master_seed");
  EXPECT_NE(message_of(doc).find("config.master_seed"), std::string::npos);

  doc = small_config("out");
  doc["n_chains"] = 0;
  EXPECT_NE(message_of(doc).find("config.n_chains"), std::string::npos);

  doc = small_config("out");
  doc["observables"][2]["region"] = {{"sites", {0, 9}}};
  EXPECT_NE(message_of(doc).find("config.observables[2].region"), std::string::npos) << message_of(doc);

  doc = small_config("out");
  doc["observables"][1]["pauli"] = "ZZ";
  EXPECT_NE(message_of(doc).find("config.observables[1]"), std::string::npos);

  doc = small_config("out");
  doc["observables"][0]["type"] = "magic";
  EXPECT_NE(message_of(doc).find("config.observables[0].type"), std::string::npos);

  doc = small_config("out");
  doc["topo_ee"] = json::array({json{{"label", "t"}, {"ab", "A2"}, {"bc", "A4"}, {"abc", "X"}, {"b", "A2"}}});
  EXPECT_NE(message_of(doc).find("config.topo_ee.t"), std::string::npos);

  doc = small_config("out");
  doc["boundary"] = "twisted";
  EXPECT_NE(message_of(doc).find("config.boundary"), std::string::npos);

  doc = small_config("out");
  doc["hy"] = 0.5;
  EXPECT_NE(message_of(doc).find("complex"), std::string::npos);
}

TEST(Config, BetaExpressions) {
  EXPECT_DOUBLE_EQ(parse_beta(json("4L"), 8), 32.0);
  EXPECT_DOUBLE_EQ(parse_beta(json("3*L"), 10), 30.0);
  EXPECT_DOUBLE_EQ(parse_beta(json("L"), 5), 5.0);
  EXPECT_DOUBLE_EQ(parse_beta(json(2.5), 5), 2.5);
  EXPECT_THROW(parse_beta(json("4K"), 8), ConfigError);
  EXPECT_THROW(parse_beta(json(-1.0), 8), ConfigError);
}

TEST(Config, Regions) {
  const auto torus = build_torus_links(4);
  EXPECT_EQ(resolve_region(torus, json{{"square", 2}}, "r").boundary.size(), 8u);
  const auto chain = build_chain(8, Boundary::open);
  EXPECT_EQ(resolve_region(chain, json{{"block", {2, 3}}}, "r").interior.sites, (std::vector<int>{2, 3, 4}));
  EXPECT_THROW(resolve_region(chain, json{{"blob", 1}}, "r"), ConfigError);
}

TEST(Seeds, DistinctAndStable) {
  EXPECT_NE(chain_seed(1, 0), chain_seed(1, 1));
  EXPECT_NE(chain_seed(1, 0), chain_seed(2, 0));
  EXPECT_EQ(chain_seed(42, 3), chain_seed(42, 3));
}

TEST(Run, ByteIdenticalAcrossRerunsAndThreadCounts) {
  const auto a = scratch("run_a"), b = scratch("run_b");
  std::ostringstream log;
  auto cfg_a = parse_config(small_config(a));
  auto cfg_b = parse_config(small_config(b));
  cfg_a.write_checkpoints = true;
  const auto out = run(cfg_a, 1, log);
  run(cfg_b, 3, log);
  EXPECT_FALSE(out.partial);
  EXPECT_EQ(slurp(a / "observables.csv"), slurp(b / "observables.csv"));
  const auto sa = json::parse(slurp(a / "summary.json"));
  const auto sb = json::parse(slurp(b / "summary.json"));
  EXPECT_EQ(sa["observables"], sb["observables"]);
  EXPECT_EQ(sa["schema_version"], summary_schema_version);
  EXPECT_EQ(sa["status"], "ok");
  for (int k = 0; k < 3; ++k) EXPECT_TRUE(fs::exists(a / ("chain_" + std::to_string(k) + ".ckpt")));
  EXPECT_TRUE(fs::exists(a / "run.log"));
  EXPECT_EQ(slurp(a / "observables.csv").rfind("observable,label,mean,stderr,n_bins,block_size\n", 0), 0u);
}

TEST(Run, SeedChangesResult) {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  std::ostringstream log;
  auto cfg_b = parse_config(small_config(b));
  cfg_b.master_seed = 8;
  run(parse_config(small_config(a)), 1, log);
  run(cfg_b, 1, log);
  EXPECT_NE(slurp(a / "observables.csv"), slurp(b / "observables.csv"));
}

TEST(Run, CheckpointResumesBitExactly) {
  const auto dir = scratch("ckpt");
  auto cfg = parse_config(small_config(dir));
  cfg.n_chains = 1;
  cfg.write_checkpoints = true;
  std::ostringstream log;
  run(cfg, 1, log);
  std::ifstream in(dir / "chain_0.ckpt");
  auto table = std::make_shared<const OperatorTable>(cfg.model);
  auto st = ChainState::load(in, table);
  EXPECT_TRUE(st.cutoff_frozen);
  EXPECT_EQ(st.sweeps, static_cast<std::uint64_t>(cfg.n_equilibration_sweeps + cfg.n_measurement_sweeps));
  EXPECT_TRUE(check_propagation(st));
  std::ostringstream again;
  st.save(again);
  EXPECT_EQ(again.str(), slurp(dir / "chain_0.ckpt"));
}

TEST(Ti, WritesNodesAndSummary) {
  const auto dir = scratch("ti");
  auto doc = small_config(dir);
  doc["n_chains"] = 1;
  doc["ti"] = {{"region", {{"mid_chain", 2}}}, {"nodes", 4}, {"method", "subset_B"}};
  std::ostringstream log;
  const auto out = thermodynamic_integration(parse_config(doc), 2, log);
  EXPECT_EQ(out.nodes.size(), 4u);
  EXPECT_TRUE(fs::exists(dir / "ti_nodes.csv"));
  const auto s = json::parse(slurp(dir / "summary.json"));
  EXPECT_TRUE(s.contains("s2_e2"));
  EXPECT_TRUE(s.contains("s2_e1"));
  EXPECT_TRUE(std::isfinite(out.s2.value));
}

TEST(Oracle, Values) {
  const auto j = oracle(make_tfim(2, Boundary::open, 1.0), std::nullopt);
  EXPECT_NEAR(j["energy"].get<double>(), -std::sqrt(5.0), 1e-10);
  const auto t = oracle(make_lgt(2, 0.0), 2.0);
  EXPECT_TRUE(t.contains("wilson_1x1_sq"));
}

TEST(Binary, ExitCodes) {
  const auto dir = scratch("bin");
  fs::create_directories(dir);
  EXPECT_EQ(run_cli("oracle --model tfim --L 8 --h 1.0 --beta 24 --out " + (dir / "oracle").string()), 0);
  const auto j = json::parse(slurp(dir / "oracle" / "oracle.json"));
  EXPECT_LT(j["energy"].get<double>(), -9.0);

  EXPECT_EQ(run_cli("oracle --model heisenberg --L 4"), 64);
  std::ofstream(dir / "bad.json") << R"({"model": "tfim", "L": 4})";
  EXPECT_EQ(run_cli("run " + (dir / "bad.json").string()), 64);
  EXPECT_EQ(run_cli("run " + (dir / "missing.json").string()), 64);

  std::ofstream(dir / "good.json") << small_config(dir / "out").dump();
  EXPECT_EQ(run_cli("run " + (dir / "good.json").string() + " --seed 3 --threads 2 --out " + (dir / "cli_out").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "cli_out" / "observables.csv"));
  const auto s = json::parse(slurp(dir / "cli_out" / "summary.json"));
  EXPECT_EQ(s["master_seed"], 3);
}
