#include "bellqmc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bellqmc/errors.hpp"

namespace bellqmc {

std::string to_string(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::pauli_sq: return "pauli_sq";
    case ObservableKind::renyi2: return "renyi2";
    case ObservableKind::renyi2_gauge: return "renyi2_gauge";
    case ObservableKind::wilson: return "wilson";
    case ObservableKind::energy: return "energy";
  }
  return "unknown";
}

double gauge_swap_value(const BellConfig& cfg, const SiteMask& interior, const SiteMask& boundary) {
  auto x = cfg.rx().words();
  auto z = cfg.rz().words();
  auto a = interior.bits().words();
  auto d = boundary.bits().words();
  std::uint64_t odd = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] & d[k]) return 0.0;
    odd ^= x[k] & z[k] & a[k] & ~d[k];
  }
  return std::popcount(odd) & 1 ? -1.0 : 1.0;
}

double Observable::value(const BellConfig& cfg) const {
  double acc = 0.0;
  switch (kind) {
    case ObservableKind::pauli_sq:
    case ObservableKind::wilson:
      for (const auto& s : strings) acc += pauli_sign(cfg, s);
      return acc / strings.size();
    case ObservableKind::renyi2:
      for (const auto& m : regions) acc += swap_sign(cfg, m);
      return acc / regions.size();
    case ObservableKind::renyi2_gauge:
      for (std::size_t k = 0; k < regions.size(); ++k) acc += gauge_swap_value(cfg, regions[k], boundaries[k]);
      return acc / regions.size();
    case ObservableKind::energy:
      break;
  }
  throw Error("observable needs the chain state");
}

Region translate_region(const Lattice& lat, const Region& region, int dx, int dy) {
  const int L = lat.linear_size;
  std::vector<int> out;
  out.reserve(region.size());
  if (lat.geometry == Geometry::chain) {
    if (lat.boundary != Boundary::periodic) throw UnsupportedGeometry("translations need a periodic chain");
    for (int s : region.sites) out.push_back(((s + dx) % L + L) % L);
  } else {
    for (int s : region.sites) {
      const int cell = s / 2, dir = s % 2;
      const int x = ((cell % L + dx) % L + L) % L;
      const int y = ((cell / L + dy) % L + L) % L;
      out.push_back(2 * (y * L + x) + dir);
    }
  }
  return make_region(lat, std::move(out), region.label);
}

namespace {

std::vector<std::pair<int, int>> all_shifts(const Lattice& lat) {
  std::vector<std::pair<int, int>> out;
  const int L = lat.linear_size;
  if (lat.geometry == Geometry::chain) {
    for (int d = 0; d < L; ++d) out.emplace_back(d, 0);
  } else {
    for (int y = 0; y < L; ++y)
      for (int x = 0; x < L; ++x) out.emplace_back(x, y);
  }
  return out;
}

}  // namespace

Observable pauli_sq_observable(const std::string& label, const PauliString& s) {
  Observable o;
  o.kind = ObservableKind::pauli_sq;
  o.label = label;
  o.strings.push_back(s);
  return o;
}

Observable renyi2_observable(const Lattice& lat, const Region& region) {
  Observable o;
  o.kind = ObservableKind::renyi2;
  o.label = region.label;
  o.region_size = region.size();
  o.regions.emplace_back(lat.n_sites, region);
  return o;
}

Observable renyi2_translated_observable(const Lattice& lat, const Region& region) {
  Observable o = renyi2_observable(lat, region);
  o.regions.clear();
  for (auto [dx, dy] : all_shifts(lat)) o.regions.emplace_back(lat.n_sites, translate_region(lat, region, dx, dy));
  return o;
}

Observable renyi2_gauge_observable(const Lattice& lat, const SquareRegion& region, bool translate) {
  if (lat.geometry != Geometry::torus_links) throw UnsupportedGeometry("gauge estimator needs the torus");
  Observable o;
  o.kind = ObservableKind::renyi2_gauge;
  o.label = region.interior.label;
  o.region_size = region.interior.size();
  const auto shifts = translate ? all_shifts(lat) : std::vector<std::pair<int, int>>{{0, 0}};
  for (auto [dx, dy] : shifts) {
    o.regions.emplace_back(lat.n_sites, translate_region(lat, region.interior, dx, dy));
    o.boundaries.emplace_back(lat.n_sites, translate_region(lat, region.boundary, dx, dy));
  }
  return o;
}

Observable wilson_observable(const Lattice& lat, int w, int h, bool translate) {
  Observable o;
  o.kind = ObservableKind::wilson;
  o.label = "W" + std::to_string(w) + "x" + std::to_string(h);
  const Region loop = wilson_loop(lat, 0, 0, w, h);
  const auto shifts = translate ? all_shifts(lat) : std::vector<std::pair<int, int>>{{0, 0}};
  for (auto [dx, dy] : shifts) {
    const Region moved = translate_region(lat, loop, dx, dy);
    o.strings.push_back(PauliString::x_string(lat.n_sites, moved.sites));
  }
  return o;
}

Observable energy_observable() {
  Observable o;
  o.kind = ObservableKind::energy;
  o.label = "energy";
  return o;
}

double energy_sample(const ChainState& st) {
  const auto& t = st.table();
  if (st.beta <= 0) throw Error("energy estimator needs beta > 0");
  return t.site_coupling() * t.n_sites() + t.locus_coupling() * t.n_loci() - st.ops.n / (2.0 * st.beta);
}

MeasurementSet::MeasurementSet(std::vector<Observable> observables, std::size_t block_size)
    : observables_(std::move(observables)) {
  acc_.assign(observables_.size(), BinAccumulator(block_size));
}

void MeasurementSet::record(const ChainState& st) {
  for (std::size_t k = 0; k < observables_.size(); ++k) {
    const auto& o = observables_[k];
    acc_[k].push(o.kind == ObservableKind::energy ? energy_sample(st) : o.value(st.cfg0));
  }
}

void MeasurementSet::merge(const MeasurementSet& other) {
  if (other.observables_.size() != observables_.size()) throw Error("merging different measurement sets");
  for (std::size_t k = 0; k < acc_.size(); ++k) acc_[k].absorb(other.acc_[k]);
}

std::size_t MeasurementSet::find(const std::string& label) const {
  for (std::size_t k = 0; k < observables_.size(); ++k)
    if (observables_[k].label == label) return k;
  throw ConfigError("no observable labelled '" + label + "'");
}

ObservableResult MeasurementSet::result(std::size_t k) const {
  const auto& o = observables_[k];
  const auto& acc = acc_[k];
  ObservableResult r;
  r.kind = o.kind;
  r.label = o.label;
  r.n_bins = acc.bins().size();
  r.block_size = acc.block_size();
  try {
    r.raw_mean = acc.raw_mean();
    r.raw_variance = acc.raw_variance();
    if (o.kind == ObservableKind::renyi2 || o.kind == ObservableKind::renyi2_gauge) {
      if (o.region_size == 0) {
        r.mean = 0.0;
        r.error = 0.0;
      } else {
        from_bins(acc.bins(), acc.block_size());
        const Estimate e = measure_renyi2(acc.bins());
        r.mean = e.value;
        r.error = e.error;
      }
    } else {
      const Estimate e = from_bins(acc.bins(), acc.block_size()).estimate();
      r.mean = e.value;
      r.error = e.error;
    }
  } catch (const Error& e) {
    r.failed = true;
    r.failure = e.what();
    r.mean = r.error = std::nan("");
  }
  return r;
}

std::vector<ObservableResult> MeasurementSet::results() const {
  std::vector<ObservableResult> out;
  for (std::size_t k = 0; k < observables_.size(); ++k) out.push_back(result(k));
  return out;
}

Estimate measure_renyi2(std::span<const double> swap_bins) { return jackknife_log(swap_bins); }

Estimate topo_ee(std::span<const double> ab, std::span<const double> bc, std::span<const double> abc,
                 std::span<const double> b) {
  const std::size_t n = ab.size();
  if (bc.size() != n || abc.size() != n || b.size() != n) throw ConfigError("topological combination needs bins of one run");
  const auto jab = jackknife_log_samples(ab), jbc = jackknife_log_samples(bc);
  const auto jabc = jackknife_log_samples(abc), jb = jackknife_log_samples(b);
  std::vector<double> comb(n);
  for (std::size_t k = 0; k < n; ++k) comb[k] = jab[k] + jbc[k] - jabc[k] - jb[k];
  const double value = jackknife_log(ab).value + jackknife_log(bc).value - jackknife_log(abc).value -
                       jackknife_log(b).value;
  return {value, jackknife_error(comb)};
}

Estimate topo_ee(const Estimate& ab, const Estimate& bc, const Estimate& abc, const Estimate& b) {
  return {ab.value + bc.value - abc.value - b.value,
          std::sqrt(ab.error * ab.error + bc.error * bc.error + abc.error * abc.error + b.error * b.error)};
}

void write_results_csv(std::ostream& out, const std::vector<ObservableResult>& rows) {
  out << "observable,label,mean,stderr,n_bins,block_size\n";
  const auto old = out.precision(12);
  for (const auto& r : rows)
    out << to_string(r.kind) << ',' << r.label << ',' << r.mean << ',' << r.error << ',' << r.n_bins << ','
        << r.block_size << '\n';
  out.precision(old);
}

}  // namespace bellqmc
