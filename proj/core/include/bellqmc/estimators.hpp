#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bellqmc/bell.hpp"
#include "bellqmc/lattice.hpp"
#include "bellqmc/sse.hpp"
#include "bellqmc/stats.hpp"

namespace bellqmc {

enum class ObservableKind { pauli_sq, renyi2, renyi2_gauge, wilson, energy };

std::string to_string(ObservableKind kind);

/// A diagonal observable of the slice-0 state, averaged over symmetry copies.
struct Observable {
  ObservableKind kind = ObservableKind::pauli_sq;
  std::string label;
  std::vector<PauliString> strings;  // pauli_sq, wilson
  std::vector<SiteMask> regions;     // renyi2, renyi2_gauge (A)
  std::vector<SiteMask> boundaries;  // renyi2_gauge (dA), parallel to regions
  std::size_t region_size = 0;

  /// Sample value on one configuration.
  double value(const BellConfig& cfg) const;
};

/// Gauge-averaged swap: prod_{dA} delta(r^x, 0) * prod_{A \ dA} (-1)^{r^x r^z}.
double gauge_swap_value(const BellConfig& cfg, const SiteMask& interior, const SiteMask& boundary);

/// Periodic shift: by dx sites on a PBC chain, by (dx, dy) unit cells on the
/// torus. Throws UnsupportedGeometry for open chains.
Region translate_region(const Lattice& lat, const Region& region, int dx, int dy);

Observable pauli_sq_observable(const std::string& label, const PauliString& s);
Observable renyi2_observable(const Lattice& lat, const Region& region);
/// Plain swap estimator averaged over all translations of A.
Observable renyi2_translated_observable(const Lattice& lat, const Region& region);
Observable renyi2_gauge_observable(const Lattice& lat, const SquareRegion& region, bool translate);
/// w x h plaquette-rectangle loop; averaged over all translations if asked.
Observable wilson_observable(const Lattice& lat, int w, int h, bool translate);
Observable energy_observable();

/// One line of the per-observable CSV.
struct ObservableResult {
  ObservableKind kind;
  std::string label;
  double mean = 0.0;   // S2 for the entropies, the sample mean otherwise
  double error = 0.0;
  double raw_mean = 0.0;
  double raw_variance = 0.0;
  std::size_t n_bins = 0;
  std::size_t block_size = 0;
  bool failed = false;
  std::string failure;
};

/// Streaming accumulators for a list of observables. Accumulators from
/// independent chains merge by appending bins in chain order.
class MeasurementSet {
 public:
  MeasurementSet(std::vector<Observable> observables, std::size_t block_size = default_block_size);

  void record(const ChainState& st);
  void merge(const MeasurementSet& other);

  const std::vector<Observable>& observables() const { return observables_; }
  const BinAccumulator& accumulator(std::size_t k) const { return acc_[k]; }
  std::size_t find(const std::string& label) const;

  /// Bin statistics; entropies via jackknife of -ln. Failures are reported
  /// in the result rather than thrown.
  std::vector<ObservableResult> results() const;
  ObservableResult result(std::size_t k) const;

 private:
  std::vector<Observable> observables_;
  std::vector<BinAccumulator> acc_;
};

/// S2 from swap bins; throws EstimatorExhausted.
Estimate measure_renyi2(std::span<const double> swap_bins);

/// S(AB) + S(BC) - S(ABC) - S(B) from bins of one run, with a correlated
/// delete-one jackknife over the common bins.
Estimate topo_ee(std::span<const double> ab, std::span<const double> bc, std::span<const double> abc,
                 std::span<const double> b);
/// Same combination from independent estimates, errors in quadrature.
Estimate topo_ee(const Estimate& ab, const Estimate& bc, const Estimate& abc, const Estimate& b);

/// hN + N_loci - n / (2 beta): energy per two-copy sample.
double energy_sample(const ChainState& st);

void write_results_csv(std::ostream& out, const std::vector<ObservableResult>& rows);

}  // namespace bellqmc
