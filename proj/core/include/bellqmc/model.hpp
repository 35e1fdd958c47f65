#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bellqmc/bell.hpp"
#include "bellqmc/lattice.hpp"

namespace bellqmc {

enum class ModelKind { tfim_1d, z2_lgt_2d };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// H = -sum_<ij> Z_i Z_j - h sum_i X_i on a chain, or
/// H = -sum_plaq prod X - h sum_links Z on the torus.
struct ModelSpec {
  ModelKind kind = ModelKind::tfim_1d;
  double h = 1.0;
  Lattice lattice;
  /// Random pairing of plaquette links in the site-cluster update. Turning it
  /// off keeps the update valid but makes clusters proliferate.
  bool split_plaquettes = true;
};

ModelSpec make_tfim(int L, Boundary boundary, double h);
ModelSpec make_lgt(int L, double h);

/// Model-generic operator tables used by the sampler.
///
/// Both models share one structure. "Site" operators act on a single site and,
/// off-diagonal, flip the `site_channel` bit there, allowed only when the
/// other channel is 0. "Locus" operators (bonds or plaquettes) flip the other
/// channel on every site of the locus, allowed only when the `site_channel`
/// bits over the locus have even parity. TFIM: site_channel = x, loci = bonds.
/// Z2 LGT: site_channel = z, loci = plaquettes.
class OperatorTable {
 public:
  explicit OperatorTable(const ModelSpec& model);

  const ModelSpec& model() const { return model_; }
  int n_sites() const { return n_sites_; }
  int n_loci() const { return static_cast<int>(locus_offsets_.size()) - 1; }
  int n_total() const { return n_sites_ + n_loci(); }
  Channel site_channel() const { return site_channel_; }
  Channel locus_channel() const { return other(site_channel_); }
  double site_coupling() const { return model_.h; }
  double locus_coupling() const { return 1.0; }
  bool split_loci() const { return model_.split_plaquettes; }

  std::span<const int> locus(int b) const {
    return {locus_sites_.data() + locus_offsets_[b],
            static_cast<std::size_t>(locus_offsets_[b + 1] - locus_offsets_[b])};
  }
  /// Loci containing site i.
  std::span<const int> loci_of(int i) const {
    return {site_loci_.data() + site_offsets_[i],
            static_cast<std::size_t>(site_offsets_[i + 1] - site_offsets_[i])};
  }
  /// Site sets meeting every locus an even number of times: all sites, plus
  /// the vertex stars of the gauge model. Toggling the site channel on such a
  /// set at every time slice leaves all weights unchanged.
  const std::vector<std::vector<int>>& site_symmetries() const { return site_symmetries_; }

 private:
  ModelSpec model_;
  int n_sites_;
  Channel site_channel_;
  std::vector<int> locus_offsets_, locus_sites_;
  std::vector<int> site_offsets_, site_loci_;
  std::vector<std::vector<int>> site_symmetries_;
};

inline OperatorTable operator_table(const ModelSpec& model) { return OperatorTable(model); }

enum class OpKind : std::uint8_t { null_op, site_diag, site_offdiag, locus_diag, locus_offdiag };

struct OperatorEntry {
  OpKind kind = OpKind::null_op;
  std::int32_t locus = -1;  // site index or locus index; -1 for null

  bool is_diagonal() const { return kind == OpKind::site_diag || kind == OpKind::locus_diag; }
  friend bool operator==(const OperatorEntry&, const OperatorEntry&) = default;
};

/// Whether a diagonal entry can be swapped to its off-diagonal partner in the
/// given (propagated) state without producing a zero matrix element.
/// Throws Error for off-diagonal or null entries.
bool flippable(const OperatorTable& table, const OperatorEntry& entry, const BellConfig& state);

/// Applies the off-diagonal action of `entry` to `state` if allowed.
bool try_apply(const OperatorTable& table, const OperatorEntry& entry, BellConfig& state);

/// Uniformly random partition of four links into two pairs (one of three).
std::array<std::array<int, 2>, 2> split_plaquette_vertex(const std::array<int, 4>& links,
                                                          std::mt19937_64& rng);

/// All sites in |0,0>: the identity string, parity_z = 0, Gauss law satisfied.
BellConfig initial_config(const ModelSpec& model);

}  // namespace bellqmc
