#include "bellqmc/model.hpp"

#include <algorithm>
#include <numeric>

#include "bellqmc/errors.hpp"

namespace bellqmc {

std::string to_string(ModelKind kind) { return kind == ModelKind::tfim_1d ? "tfim" : "lgt"; }

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "tfim" || name == "tfim_1d") return ModelKind::tfim_1d;
  if (name == "lgt" || name == "z2_lgt" || name == "z2_lgt_2d") return ModelKind::z2_lgt_2d;
  throw ConfigError("unknown model '" + name + "' (expected tfim or lgt)");
}

ModelSpec make_tfim(int L, Boundary boundary, double h) {
  if (h < 0) throw ConfigError("transverse field must be >= 0");
  return ModelSpec{ModelKind::tfim_1d, h, build_chain(L, boundary), true};
}

ModelSpec make_lgt(int L, double h) {
  if (h < 0) throw ConfigError("transverse field must be >= 0");
  return ModelSpec{ModelKind::z2_lgt_2d, h, build_torus_links(L), true};
}

OperatorTable::OperatorTable(const ModelSpec& model)
    : model_(model), n_sites_(model.lattice.n_sites) {
  if (model.h < 0) throw ConfigError("transverse field must be >= 0");
  locus_offsets_.push_back(0);
  if (model.kind == ModelKind::tfim_1d) {
    if (model.lattice.geometry != Geometry::chain)
      throw UnsupportedGeometry("the transverse-field Ising model is wired to the chain");
    site_channel_ = Channel::x;
    for (const auto& b : model.lattice.bonds) {
      locus_sites_.insert(locus_sites_.end(), b.begin(), b.end());
      locus_offsets_.push_back(static_cast<int>(locus_sites_.size()));
    }
  } else {
    if (model.lattice.geometry != Geometry::torus_links)
      throw UnsupportedGeometry("the Z2 gauge theory needs the torus_links geometry");
    site_channel_ = Channel::z;
    for (const auto& p : model.lattice.plaquettes) {
      locus_sites_.insert(locus_sites_.end(), p.begin(), p.end());
      locus_offsets_.push_back(static_cast<int>(locus_sites_.size()));
    }
  }
  std::vector<std::vector<int>> adj(n_sites_);
  for (int b = 0; b < n_loci(); ++b)
    for (int s : locus(b)) adj[s].push_back(b);
  site_offsets_.push_back(0);
  for (const auto& a : adj) {
    site_loci_.insert(site_loci_.end(), a.begin(), a.end());
    site_offsets_.push_back(static_cast<int>(site_loci_.size()));
  }

  std::vector<std::vector<int>> candidates(1, std::vector<int>(n_sites_));
  std::iota(candidates[0].begin(), candidates[0].end(), 0);
  if (model.kind == ModelKind::z2_lgt_2d)
    for (const auto& star : model.lattice.vertex_stars) candidates.emplace_back(star.begin(), star.end());
  std::vector<int> hits(n_loci());
  for (auto& set : candidates) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    std::fill(hits.begin(), hits.end(), 0);
    for (int s : set)
      for (int b : loci_of(s)) ++hits[b];
    if (std::all_of(hits.begin(), hits.end(), [](int k) { return k % 2 == 0; })) site_symmetries_.push_back(set);
  }
}

bool flippable(const OperatorTable& table, const OperatorEntry& entry, const BellConfig& state) {
  const auto& site_bits = state.bits(table.site_channel());
  const auto& locus_bits = state.bits(table.locus_channel());
  switch (entry.kind) {
    case OpKind::site_diag:
      return !locus_bits.get(entry.locus);
    case OpKind::locus_diag: {
      bool parity = false;
      for (int s : table.locus(entry.locus)) parity ^= site_bits.get(s);
      return !parity;
    }
    default:
      throw Error("flippable() is only defined for diagonal operators");
  }
}

bool try_apply(const OperatorTable& table, const OperatorEntry& entry, BellConfig& state) {
  const bool tfim = table.model().kind == ModelKind::tfim_1d;
  switch (entry.kind) {
    case OpKind::site_offdiag:
      return tfim ? try_apply_site_x(state, entry.locus) : try_apply_site_z(state, entry.locus);
    case OpKind::locus_offdiag: {
      auto sites = table.locus(entry.locus);
      if (tfim) return try_apply_bond_zz(state, sites[0], sites[1]);
      return try_apply_plaquette_x(state, {sites[0], sites[1], sites[2], sites[3]});
    }
    default:
      return true;
  }
}

std::array<std::array<int, 2>, 2> split_plaquette_vertex(const std::array<int, 4>& links,
                                                          std::mt19937_64& rng) {
  // Partner of links[0] picks the pairing.
  const int partner = 1 + static_cast<int>(rng() % 3);
  std::array<int, 2> rest{};
  int k = 0;
  for (int i = 1; i < 4; ++i)
    if (i != partner) rest[k++] = links[i];
  return {{{links[0], links[partner]}, rest}};
}

BellConfig initial_config(const ModelSpec& model) { return BellConfig(model.lattice.n_sites); }

}  // namespace bellqmc
