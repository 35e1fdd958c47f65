#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bellqmc/ed.hpp"
#include "bellqmc/errors.hpp"
#include "bellqmc/estimators.hpp"
#include "test_support.hpp"

using namespace bellqmc;
using bellqmc::testing::table_of;
using bellqmc::testing::warm_up;

namespace {

MeasurementSet simulate(const ModelSpec& model, double beta, std::vector<Observable> obs, std::uint64_t seed,
                        int sweeps, std::size_t block, int warm = 2000) {
  ChainState st(table_of(model), beta, seed);
  warm_up(st, warm);
  MeasurementSet m(std::move(obs), block);
  for (int i = 0; i < sweeps; ++i) {
    sweep(st);
    m.record(st);
  }
  return m;
}

PauliString terms(int n, std::vector<std::pair<int, char>> t) { return PauliString::from_terms(n, t); }

}  // namespace

TEST(PauliSq, StrongFieldLimit) {
  const auto model = make_tfim(6, Boundary::open, 10.0);
  auto m = simulate(model, 2.0,
                    {pauli_sq_observable("X1", terms(6, {{1, 'X'}})), pauli_sq_observable("Z1", terms(6, {{1, 'Z'}}))},
                    1, 20000, 1000, 500);
  const auto x = m.result(0), z = m.result(1);
  EXPECT_NEAR(x.mean, 1.0, std::max(3 * x.error, 0.01));
  EXPECT_NEAR(z.mean, 0.0, std::max(3 * z.error, 0.01));
}

TEST(PauliSq, NeighbourCorrelationMatchesExact) {
  const auto model = make_tfim(10, Boundary::open, 1.0);
  const double beta = 10.0;
  const auto zz = terms(10, {{1, 'Z'}, {2, 'Z'}});
  const double exact = ed::pauli_sq(ed::thermal_state(model, beta), zz);
  auto m = simulate(model, beta, {pauli_sq_observable("Z1Z2", zz)}, 2, 40000, 2000);
  const auto r = m.result(0);
  EXPECT_NEAR(r.mean, exact, 3.5 * r.error);
}

TEST(Renyi2, EmptyRegionIsZero) {
  const auto model = make_tfim(4, Boundary::open, 1.0);
  auto m = simulate(model, 1.0, {renyi2_observable(model.lattice, Region{{}, "empty"})}, 3, 100, 10, 10);
  const auto r = m.result(0);
  EXPECT_FALSE(r.failed);
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_EQ(r.error, 0.0);
}

TEST(Renyi2, ProductStateHasNoEntanglement) {
  const auto model = make_tfim(6, Boundary::open, 10.0);
  auto m = simulate(model, 2.0, {renyi2_observable(model.lattice, mid_chain_region(model.lattice, 2))}, 4, 20000,
                    1000, 500);
  const auto r = m.result(0);
  EXPECT_NEAR(r.mean, 0.0, std::max(3 * r.error, 0.01));
}

TEST(Renyi2, HalfChainMatchesExactPurity) {
  const auto model = make_tfim(8, Boundary::open, 1.0);
  const double beta = 16.0;
  const auto a = chain_block(model.lattice, 0, 4, "half");
  const double exact = -std::log(ed::exact_purity(ed::thermal_state(model, beta), a));
  auto m = simulate(model, beta, {renyi2_observable(model.lattice, a)}, 5, 40000, 2000);
  const auto r = m.result(0);
  EXPECT_NEAR(r.mean, exact, 3.5 * r.error);
}

TEST(Renyi2, GaugeSwapValueExamples) {
  const SiteMask interior(4, std::vector<int>{0, 1, 2, 3});
  const SiteMask boundary(4, std::vector<int>{0, 1});
  EXPECT_EQ(gauge_swap_value(BellConfig::from_string("01000000"), interior, boundary), 0.0);
  EXPECT_EQ(gauge_swap_value(BellConfig::from_string("10100000"), interior, boundary), 1.0);
  EXPECT_EQ(gauge_swap_value(BellConfig::from_string("00001100"), interior, boundary), -1.0);
  EXPECT_EQ(gauge_swap_value(BellConfig::from_string("10001010"), interior, boundary), 1.0);
}

TEST(Renyi2, GaugeAndPlainAgreeWithExactOnSmallTorus) {
  const auto model = make_lgt(2, 0.3);
  const double beta = 8.0;
  const auto sq = square_region(model.lattice, 2);
  const double exact = -std::log(ed::exact_purity(ed::thermal_state(model, beta), sq.interior));
  auto m = simulate(model, beta,
                    {renyi2_observable(model.lattice, sq.interior), renyi2_gauge_observable(model.lattice, sq, false)},
                    6, 40000, 2000);
  const auto plain = m.result(0), gauge = m.result(1);
  EXPECT_NEAR(plain.mean, exact, 3.5 * plain.error);
  EXPECT_NEAR(gauge.mean, exact, 3.5 * gauge.error);
  EXPECT_LE(gauge.error, plain.error * 1.2);
}

TEST(Renyi2, SwapVarianceIdentity) {
  const auto model = make_tfim(6, Boundary::open, 1.0);
  const double beta = 12.0;
  const auto a = chain_block(model.lattice, 0, 3, "half");
  const double purity = ed::exact_purity(ed::thermal_state(model, beta), a);
  auto m = simulate(model, beta, {renyi2_observable(model.lattice, a)}, 7, 40000, 2000);
  const auto r = m.result(0);
  EXPECT_NEAR(r.raw_variance, 1 - purity * purity, 0.05 * (1 - purity * purity));
}

TEST(Renyi2, TranslationAveragingOnRing) {
  const auto model = make_tfim(8, Boundary::periodic, 1.0);
  const double beta = 8.0;
  const auto a = chain_block(model.lattice, 0, 3, "A");
  const double exact = -std::log(ed::exact_purity(ed::thermal_state(model, beta), a));
  const auto obs = renyi2_translated_observable(model.lattice, a);
  EXPECT_EQ(obs.regions.size(), 8u);
  auto m = simulate(model, beta, {obs}, 8, 30000, 1500);
  const auto r = m.result(0);
  EXPECT_NEAR(r.mean, exact, 3.5 * r.error);
}

TEST(Translate, ChainAndTorus) {
  const auto ring = build_chain(5, Boundary::periodic);
  EXPECT_EQ(translate_region(ring, Region{{3, 4}, "A"}, 2, 0).sites, (std::vector<int>{0, 1}));
  EXPECT_THROW(translate_region(build_chain(5, Boundary::open), Region{{1}, "A"}, 1, 0), UnsupportedGeometry);
  const auto torus = build_torus_links(3);
  const int h00 = torus.horizontal_link(0, 0);
  EXPECT_EQ(translate_region(torus, Region{{h00}, "A"}, 2, 1).sites,
            (std::vector<int>{torus.horizontal_link(2, 1)}));
}

TEST(Wilson, StabilizerPointGivesOne) {
  const auto model = make_lgt(3, 0.0);
  auto m = simulate(model, 3.0, {wilson_observable(model.lattice, 1, 1, true)}, 9, 2000, 100, 200);
  const auto r = m.result(0);
  EXPECT_DOUBLE_EQ(r.mean, 1.0);
  EXPECT_EQ(r.label, "W1x1");
}

TEST(Wilson, SmallTorusMatchesExact) {
  const auto model = make_lgt(2, 0.5);
  const double beta = 4.0;
  const auto obs = wilson_observable(model.lattice, 1, 1, true);
  EXPECT_EQ(obs.strings.size(), 4u);
  const double exact = ed::pauli_sq(ed::thermal_state(model, beta), obs.strings[0]);
  auto m = simulate(model, beta, {obs}, 10, 30000, 1500);
  const auto r = m.result(0);
  EXPECT_NEAR(r.mean, exact, 3.5 * r.error);
}

TEST(TopoEE, EqualInputsGiveZero) {
  const Estimate e{0.7, 0.01};
  EXPECT_DOUBLE_EQ(topo_ee(e, e, e, e).value, 0.0);
  EXPECT_NEAR(topo_ee(e, e, e, e).error, 0.02, 1e-15);
  const std::vector<double> bins{0.5, 0.4, 0.6, 0.5, 0.45, 0.55, 0.5, 0.5};
  const auto c = topo_ee(bins, bins, bins, bins);
  EXPECT_DOUBLE_EQ(c.value, 0.0);
  EXPECT_NEAR(c.error, 0.0, 1e-15);
}

TEST(TopoEE, CorrelatedJackknifeCancelsCommonNoise) {
  // S(AB) and S(ABC) share fluctuations; the correlated error is below the
  // quadrature error.
  std::vector<double> ab, bc, abc, b;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 0.01);
  for (int k = 0; k < 20; ++k) {
    const double common = g(rng);
    ab.push_back(0.5 + common);
    abc.push_back(0.4 + common);
    bc.push_back(0.5 + g(rng) * 0.1);
    b.push_back(0.7 + g(rng) * 0.1);
  }
  const auto corr = topo_ee(ab, bc, abc, b);
  const auto quad = topo_ee(jackknife_log(ab), jackknife_log(bc), jackknife_log(abc), jackknife_log(b));
  EXPECT_NEAR(corr.value, quad.value, 1e-14);
  EXPECT_LT(corr.error, 0.5 * quad.error);
}

TEST(Energy, VanishingBeta) {
  ChainState st(table_of(make_tfim(4, Boundary::open, 1.0)), 1e-6, 11);
  double n = 0;
  for (int i = 0; i < 1000; ++i) {
    sweep(st);
    n += st.ops.n;
  }
  EXPECT_LT(n / 1000, 0.01);
}

TEST(Energy, GroundStateAndSeedConsistency) {
  const auto model = make_tfim(8, Boundary::open, 1.0);
  const double exact = ed::ground_state(model).ground_energy;
  std::vector<Estimate> runs;
  for (std::uint64_t seed : {12u, 13u}) {
    auto m = simulate(model, 16.0, {energy_observable()}, seed, 20000, 1000);
    runs.push_back({m.result(0).mean, m.result(0).error});
    EXPECT_NEAR(runs.back().value, exact, 3.5 * runs.back().error);
  }
  EXPECT_NEAR(runs[0].value, runs[1].value, 4 * std::hypot(runs[0].error, runs[1].error));
}

TEST(MeasurementSet, MergeAppendsBinsInOrder) {
  const auto model = make_tfim(4, Boundary::open, 1.0);
  auto a = simulate(model, 1.0, {energy_observable()}, 14, 100, 10, 10);
  const auto b = simulate(model, 1.0, {energy_observable()}, 15, 100, 10, 10);
  auto bins = a.accumulator(0).bins();
  bins.insert(bins.end(), b.accumulator(0).bins().begin(), b.accumulator(0).bins().end());
  a.merge(b);
  EXPECT_EQ(a.accumulator(0).bins(), bins);
  EXPECT_EQ(a.find(energy_observable().label), 0u);
  EXPECT_THROW(a.find("nope"), ConfigError);
}

TEST(MeasurementSet, ExhaustedEstimatorIsReportedNotThrown) {
  const auto model = make_tfim(4, Boundary::open, 1.0);
  MeasurementSet m({renyi2_observable(model.lattice, Region{{0, 1}, "A"})}, 1);
  ChainState st(table_of(model), 1.0, 16);
  st.cfg0 = BellConfig::from_string("11000000");  // swap sign -1 on every record
  for (int i = 0; i < 10; ++i) m.record(st);
  const auto r = m.result(0);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(r.failure.empty());
}

TEST(Csv, HeaderAndRows) {
  ObservableResult r{ObservableKind::wilson, "W1x1", 0.5, 0.01, 0.5, 0.1, 10, 100, false, {}};
  std::ostringstream out;
  write_results_csv(out, {r});
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "observable,label,mean,stderr,n_bins,block_size");
  EXPECT_EQ(row.rfind("wilson,W1x1,0.5,0.01,10,100", 0), 0u) << row;
}
