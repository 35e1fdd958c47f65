#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

#include "bellqmc/ed.hpp"
#include "bellqmc/errors.hpp"
#include "bellqmc_tools/runner.hpp"

namespace bellqmc::tools {

using nlohmann::json;

std::uint64_t chain_seed(std::uint64_t master_seed, std::uint64_t k) {
  std::uint64_t z = master_seed + (k + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void equilibrate(ChainState& st, std::int64_t sweeps, const SliceZeroPolicy* policy) {
  st.cutoff_frozen = false;
  for (std::int64_t i = 0; i < sweeps; ++i) {
    sweep(st, policy);
    grow_cutoff(st);
  }
  st.cutoff_frozen = true;
}

void parallel_for(int n, int threads, const std::function<void(int)>& job) {
  threads = std::max(1, std::min(threads, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < n; k = next++) {
      try {
        job(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

json model_json(const RunConfig& cfg) {
  const auto& m = cfg.model;
  return {{"kind", to_string(m.kind)},
          {"L", m.lattice.linear_size},
          {"h", m.h},
          {"boundary", m.lattice.boundary == Boundary::open ? "open" : "periodic"},
          {"n_sites", m.lattice.n_sites},
          {"beta", cfg.beta}};
}

json row_json(const ObservableResult& r) {
  json j = {{"observable", to_string(r.kind)}, {"label", r.label},   {"n_bins", r.n_bins},
            {"block_size", r.block_size},      {"failed", r.failed}, {"raw_mean", r.raw_mean},
            {"raw_variance", r.raw_variance}};
  if (r.failed) {
    j["failure"] = r.failure;
    j["mean"] = nullptr;
    j["stderr"] = nullptr;
  } else {
    j["mean"] = r.mean;
    j["stderr"] = r.error;
  }
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

struct ChainLog {
  std::int64_t winding = 0;
  double site_flip = 0, locus_flip = 0;
  int cutoff = 0;
  double mean_n = 0;
};

std::string describe(int k, std::uint64_t seed, const ChainLog& c, std::int64_t sweeps) {
  std::ostringstream s;
  s << "chain " << k << " seed " << seed << " cutoff " << c.cutoff << " mean_n " << c.mean_n / sweeps
    << " site_cluster_flip_rate " << c.site_flip / sweeps << " locus_cluster_flip_rate " << c.locus_flip / sweeps
    << " winding_accepted " << c.winding << '\n';
  return s.str();
}

void tally(ChainLog& log, const SweepStats& s, const ChainState& st) {
  if (s.site.clusters + s.site.free_vars > 0)
    log.site_flip += double(s.site.flipped) / (s.site.clusters + s.site.free_vars);
  if (s.locus.clusters + s.locus.free_vars > 0)
    log.locus_flip += double(s.locus.flipped) / (s.locus.clusters + s.locus.free_vars);
  log.winding += s.winding;
  log.mean_n += st.ops.n;
}

}  // namespace

RunOutcome run(const RunConfig& cfg, int threads, std::ostream& log) {
  const auto table = std::make_shared<const OperatorTable>(cfg.model);
  const auto observables = build_observables(cfg);
  std::vector<MeasurementSet> sets(cfg.n_chains, MeasurementSet(observables, cfg.block_size));
  std::vector<std::string> chain_logs(cfg.n_chains);
  std::filesystem::create_directories(cfg.output_dir);

  parallel_for(cfg.n_chains, threads, [&](int k) {
    const std::uint64_t seed = chain_seed(cfg.master_seed, k);
    ChainState st(table, cfg.beta, seed);
    equilibrate(st, cfg.n_equilibration_sweeps);
    ChainLog c;
    for (std::int64_t i = 0; i < cfg.n_measurement_sweeps; ++i) {
      tally(c, sweep(st), st);
      sets[k].record(st);
    }
    c.cutoff = st.ops.cutoff();
    chain_logs[k] = describe(k, seed, c, cfg.n_measurement_sweeps);
    if (cfg.write_checkpoints) {
      std::ofstream out(cfg.output_dir / ("chain_" + std::to_string(k) + ".ckpt"));
      st.save(out);
    }
  });

  MeasurementSet merged = sets[0];
  for (int k = 1; k < cfg.n_chains; ++k) merged.merge(sets[k]);

  RunOutcome outcome;
  outcome.rows = merged.results();
  json rows = json::array();
  for (const auto& r : outcome.rows) {
    rows.push_back(row_json(r));
    outcome.partial |= r.failed;
  }
  json topo = json::array();
  for (const auto& t : cfg.topo) {
    json j = {{"label", t.label}};
    try {
      const auto bins = [&](const std::string& label) { return merged.accumulator(merged.find(label)).bins(); };
      const Estimate e = topo_ee(bins(t.ab), bins(t.bc), bins(t.abc), bins(t.b));
      j["value"] = e.value;
      j["stderr"] = e.error;
      j["failed"] = false;
    } catch (const Error& e) {
      j["failed"] = true;
      j["failure"] = e.what();
      outcome.partial = true;
    }
    topo.push_back(j);
  }
  outcome.summary = {{"schema_version", summary_schema_version},
                     {"command", "run"},
                     {"status", outcome.partial ? "partial" : "ok"},
                     {"model", model_json(cfg)},
                     {"master_seed", cfg.master_seed},
                     {"n_chains", cfg.n_chains},
                     {"n_equilibration_sweeps", cfg.n_equilibration_sweeps},
                     {"n_measurement_sweeps", cfg.n_measurement_sweeps},
                     {"block_size", cfg.block_size},
                     {"observables", rows},
                     {"topo_ee", topo}};

  std::ostringstream csv;
  write_results_csv(csv, outcome.rows);
  write_text(cfg.output_dir / "observables.csv", csv.str());
  write_text(cfg.output_dir / "summary.json", outcome.summary.dump(2) + "\n");
  std::string all_logs;
  for (const auto& l : chain_logs) all_logs += l;
  write_text(cfg.output_dir / "run.log", all_logs);
  log << all_logs;
  return outcome;
}

TiOutcome thermodynamic_integration(const RunConfig& cfg, int threads, std::ostream& log) {
  if (!cfg.ti) throw ConfigError("config.ti: missing");
  const auto table = std::make_shared<const OperatorTable>(cfg.model);
  const Region region = resolve_region(cfg.model.lattice, cfg.ti->region, "config.ti.region").interior;
  const Quadrature grid = gauss_legendre(cfg.ti->nodes);
  const int n_nodes = cfg.ti->nodes;
  const bool subset = cfg.ti->method == ExtMethod::subset_B;
  std::filesystem::create_directories(cfg.output_dir);

  struct Acc {
    BinAccumulator e1, e2, empty;
  };
  const int jobs = n_nodes * cfg.n_chains;
  std::vector<Acc> acc(jobs, Acc{BinAccumulator(cfg.block_size), BinAccumulator(cfg.block_size),
                                 BinAccumulator(cfg.block_size)});
  std::vector<std::string> chain_logs(jobs);
  parallel_for(jobs, threads, [&](int job) {
    const int node = job / cfg.n_chains;
    const std::uint64_t seed = chain_seed(cfg.master_seed, job);
    ExtEnsembleState st(ChainState(table, cfg.beta, seed), region, grid.nodes[node], cfg.ti->method);
    st.chain.cutoff_frozen = false;
    for (std::int64_t i = 0; i < cfg.n_equilibration_sweeps; ++i) {
      ext_sweep(st);
      grow_cutoff(st.chain);
    }
    st.chain.cutoff_frozen = true;
    for (std::int64_t i = 0; i < cfg.n_measurement_sweeps; ++i) {
      ext_sweep(st);
      if (subset) acc[job].e1.push(estimator_e1(st));
      acc[job].e2.push(estimator_e2(st));
      acc[job].empty.push(empty_indicator(st));
    }
    std::ostringstream s;
    s << "node " << node << " lambda " << grid.nodes[node] << " chain " << job % cfg.n_chains << " seed " << seed
      << " cutoff " << st.chain.ops.cutoff() << '\n';
    chain_logs[job] = s.str();
  });

  TiOutcome out;
  std::vector<Estimate> e2_means, e1_means;
  std::ostringstream csv;
  csv.precision(12);
  csv << "lambda,weight,e1_mean,e1_stderr,e1_variance,e2_mean,e2_stderr,e2_variance,q_ratio,q_ratio_stderr,n_samples\n";
  for (int node = 0; node < n_nodes; ++node) {
    Acc m{BinAccumulator(cfg.block_size), BinAccumulator(cfg.block_size), BinAccumulator(cfg.block_size)};
    for (int c = 0; c < cfg.n_chains; ++c) {
      const auto& a = acc[node * cfg.n_chains + c];
      m.e1.absorb(a.e1);
      m.e2.absorb(a.e2);
      m.empty.absorb(a.empty);
    }
    TiNode n;
    n.lambda = grid.nodes[node];
    n.e2 = m.e2.series();
    n.e2_variance = m.e2.raw_variance();
    n.empty = m.empty.series();
    n.n_samples = m.e2.count();
    n.has_e1 = subset;
    if (subset) {
      n.e1 = m.e1.series();
      n.e1_variance = m.e1.raw_variance();
      e1_means.push_back(n.e1.estimate());
    }
    e2_means.push_back(n.e2.estimate());
    const double q = n.empty.mean > 0 ? 1.0 / n.empty.mean : std::nan("");
    const double qe = n.empty.mean > 0 ? n.empty.error / (n.empty.mean * n.empty.mean) : std::nan("");
    csv << n.lambda << ',' << grid.weights[node] << ',';
    if (subset)
      csv << n.e1.mean << ',' << n.e1.error << ',' << n.e1_variance << ',';
    else
      csv << ",,,";
    csv << n.e2.mean << ',' << n.e2.error << ',' << n.e2_variance << ',' << q << ',' << qe << ',' << n.n_samples
        << '\n';
    out.nodes.push_back(std::move(n));
  }
  const int n_a = static_cast<int>(region.size());
  out.s2 = integrate_s2(grid, e2_means, n_a);
  json nodes = json::array();
  for (const auto& n : out.nodes) {
    json j = {{"lambda", n.lambda}, {"e2_mean", n.e2.mean}, {"e2_stderr", n.e2.error}, {"n_samples", n.n_samples}};
    if (n.has_e1) {
      j["e1_mean"] = n.e1.mean;
      j["e1_stderr"] = n.e1.error;
    }
    nodes.push_back(j);
  }
  out.summary = {{"schema_version", summary_schema_version},
                 {"command", "ti"},
                 {"status", "ok"},
                 {"model", model_json(cfg)},
                 {"region", {{"label", region.label}, {"sites", region.sites}}},
                 {"method", to_string(cfg.ti->method)},
                 {"quadrature", {{"rule", "gauss_legendre"}, {"nodes", n_nodes}}},
                 {"master_seed", cfg.master_seed},
                 {"n_chains", cfg.n_chains},
                 {"s2_e2", {{"value", out.s2.value}, {"stderr", out.s2.error}}},
                 {"nodes", nodes}};
  if (subset) {
    const Estimate s1 = integrate_s2(grid, e1_means, n_a);
    out.summary["s2_e1"] = {{"value", s1.value}, {"stderr", s1.error}};
  }
  write_text(cfg.output_dir / "ti_nodes.csv", csv.str());
  write_text(cfg.output_dir / "summary.json", out.summary.dump(2) + "\n");
  std::string all_logs;
  for (const auto& l : chain_logs) all_logs += l;
  write_text(cfg.output_dir / "run.log", all_logs);
  log << all_logs;
  return out;
}

json oracle(const ModelSpec& model, std::optional<double> beta) {
  const auto state = beta ? ed::thermal_state(model, *beta) : ed::ground_state(model);
  const auto& lat = model.lattice;
  const int n = lat.n_sites;
  json j = {{"schema_version", summary_schema_version},
            {"command", "oracle"},
            {"model",
             {{"kind", to_string(model.kind)},
              {"L", lat.linear_size},
              {"h", model.h},
              {"boundary", lat.boundary == Boundary::open ? "open" : "periodic"},
              {"n_sites", n}}},
            {"ensemble", beta ? "thermal" : "ground"},
            {"energy", ed::energy(state)}};
  if (beta) j["beta"] = *beta;
  if (!beta) j["degenerate"] = state.degenerate;
  if (model.kind == ModelKind::tfim_1d) {
    const std::array<int, 2> pair{0, 1};
    j["zz_01_sq"] = ed::pauli_sq(state, PauliString::z_string(n, pair));
    j["xx_01_sq"] = ed::pauli_sq(state, PauliString::x_string(n, pair));
    const auto half = chain_block(lat, 0, lat.linear_size / 2, "half");
    j["s2_half"] = -std::log(ed::exact_purity(state, half));
  } else {
    const auto loop = wilson_loop(lat, 0, 0, 1, 1);
    j["wilson_1x1_sq"] = ed::pauli_sq(state, PauliString::x_string(n, loop.sites));
    if (lat.linear_size % 2 == 0) {
      const auto sq = square_region(lat, lat.linear_size);
      j["s2_square"] = -std::log(ed::exact_purity(state, sq.interior));
    }
  }
  return j;
}

namespace {

bool report(std::ostream& out, const std::string& name, double got, double err, double want, double tol_sigma) {
  const bool ok = std::abs(got - want) <= tol_sigma * err + 1e-12;
  out << (ok ? "PASS " : "FAIL ") << name << ": " << got << " +- " << err << " vs exact " << want << '\n';
  return ok;
}

}  // namespace

bool self_check(std::ostream& out, std::uint64_t seed) {
  bool ok = true;
  {
    // Slice-0 distribution of a 3-site chain against the exact one.
    const auto model = make_tfim(3, Boundary::open, 1.0);
    const auto p = ed::thermal_bell_distribution(model, 1.0);
    ChainState st(std::make_shared<const OperatorTable>(model), 1.0, chain_seed(seed, 0));
    equilibrate(st, 2000);
    const int n = 40000;
    std::vector<double> counts(p.size(), 0.0);
    for (int i = 0; i < n; ++i) {
      for (int r = 0; r < 4; ++r) sweep(st);
      counts[ed::bell_index(st.cfg0)] += 1;
    }
    double chi2 = 0.0;
    int cells = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] < 1e-12) {
        if (counts[k] > 0) chi2 = std::numeric_limits<double>::infinity();
        continue;
      }
      chi2 += std::pow(counts[k] - n * p[k], 2) / (n * p[k]);
      ++cells;
    }
    const double pval = std::isfinite(chi2)
                            ? boost::math::cdf(boost::math::complement(boost::math::chi_squared(cells - 1), chi2))
                            : 0.0;
    const bool pass = pval > 1e-3;
    out << (pass ? "PASS " : "FAIL ") << "tfim L=3 slice-0 distribution: chi2 " << chi2 << " over " << cells - 1
        << " dof, p " << pval << '\n';
    ok &= pass;
  }
  {
    const auto model = make_lgt(2, 0.5);
    ChainState st(std::make_shared<const OperatorTable>(model), 2.0, chain_seed(seed, 1));
    equilibrate(st, 2000);
    BinAccumulator e(2000);
    for (int i = 0; i < 40000; ++i) {
      sweep(st);
      e.push(energy_sample(st));
    }
    const auto s = e.series();
    ok &= report(out, "lgt 2x2 energy", s.mean, s.error, ed::energy(ed::thermal_state(model, 2.0)), 4.0);
  }
  {
    const auto model = make_tfim(4, Boundary::open, 1.0);
    const auto region = chain_block(model.lattice, 0, 2, "A");
    ExtEnsembleState st(ChainState(std::make_shared<const OperatorTable>(model), 4.0, chain_seed(seed, 2)), region,
                        0.5, ExtMethod::analytic_B);
    for (int i = 0; i < 2000; ++i) {
      ext_sweep(st);
      grow_cutoff(st.chain);
    }
    st.chain.cutoff_frozen = true;
    BinAccumulator e(2000);
    for (int i = 0; i < 40000; ++i) {
      ext_sweep(st);
      e.push(estimator_e2(st));
    }
    const auto s = e.series();
    ok &= report(out, "tfim L=4 extended ensemble e2", s.mean, s.error,
                 ed::exact_dlogq(ed::thermal_state(model, 4.0), region, 0.5), 4.0);
  }
  return ok;
}

}  // namespace bellqmc::tools
