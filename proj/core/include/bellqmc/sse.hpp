#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "bellqmc/bell.hpp"
#include "bellqmc/model.hpp"

namespace bellqmc {

/// Operator list of fixed capacity M; `n` counts the non-null entries.
struct OperatorString {
  std::vector<OperatorEntry> slots;
  int n = 0;

  int cutoff() const { return static_cast<int>(slots.size()); }
  int count_nonnull() const;
};

/// Which variables the cluster legs attach to.
/// site_vars: sites; bond_vars (TFIM) / plaquette_vars (LGT): the loci.
enum class ClusterMode { site_vars, bond_vars, plaquette_vars };

/// Hook for restricted ensembles. Cluster flips that change the slice-0 Bell
/// state are accepted with probability 1/2 * min(1, weight_ratio(...)).
class SliceZeroPolicy {
 public:
  virtual ~SliceZeroPolicy() = default;
  /// Weight ratio for toggling `channel` on `sites` of the slice-0 state `cfg`.
  /// Return 0 to forbid the change.
  virtual double weight_ratio(const BellConfig& cfg, Channel channel,
                              std::span<const int> sites) const = 0;
};

/// One Markov chain: slice-0 Bell state, operator string, beta and RNG.
class ChainState {
 public:
  ChainState(std::shared_ptr<const OperatorTable> table, double beta, std::uint64_t seed,
             int initial_cutoff = 16);

  const OperatorTable& table() const { return *table_; }
  std::shared_ptr<const OperatorTable> table_ptr() const { return table_; }

  BellConfig cfg0;
  OperatorString ops;
  double beta;
  std::mt19937_64 rng;
  std::uint64_t sweeps = 0;
  bool cutoff_frozen = false;

  double uniform() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
  bool coin() { return rng() >> 63; }

  /// Writes a structured-text checkpoint (bit-exact, including RNG state).
  void save(std::ostream& out) const;
  /// Restores a checkpoint written by save(); the table must match.
  static ChainState load(std::istream& in, std::shared_ptr<const OperatorTable> table);

 private:
  std::shared_ptr<const OperatorTable> table_;
};

/// Metropolis insertion/removal of diagonal operators at every null/diagonal slot.
void diagonal_update(ChainState& st);

/// Grows M to ceil(4n/3) + 1 when n > floor(3M/4). No-op once frozen.
/// Returns true if M changed.
bool grow_cutoff(ChainState& st);

/// Linked-vertex representation for one cluster mode.
///
/// Legs of a vertex are stored contiguously, grouped into "groups" whose legs
/// are connected inside the vertex. Leg links follow each variable's world
/// line periodically in imaginary time.
struct VertexList {
  ClusterMode mode = ClusterMode::site_vars;
  int n_vars = 0;

  struct Leg {
    int link;   // partner leg along the variable's world line
    int var;    // variable index (site or locus)
    int group;  // group id
    bool above; // leg above (true) or below (false) the operator
  };
  std::vector<Leg> legs;
  std::vector<int> group_begin;          // n_groups + 1 offsets into legs
  std::vector<std::uint8_t> group_anchored;  // group may never be flipped
  std::vector<int> vertex_slot;          // per vertex
  std::vector<int> vertex_group_begin;   // n_vertices + 1 offsets into groups
  std::vector<std::uint8_t> vertex_toggles;  // operator changes kind on flip
  std::vector<int> first_leg;            // per variable, -1 when no legs
  std::vector<int> last_leg;             // per variable, -1 when no legs

  int n_groups() const { return static_cast<int>(group_begin.size()) - 1; }
  int n_vertices() const { return static_cast<int>(vertex_slot.size()); }
};

/// Builds the vertex list by propagating cfg0 through the operator string.
/// With `periodic` false the world lines are left open at slice 0 (first and
/// last legs unlinked). Throws UnsupportedMode when the mode does not match
/// the model.
VertexList build_linked_list(ChainState& st, ClusterMode mode, bool periodic = true);

/// Statistics of one cluster update.
struct ClusterStats {
  int clusters = 0;
  int flipped = 0;
  int free_vars = 0;
};

/// Builds clusters on the given variables and flips each one with probability
/// 1/2 (times the policy acceptance when a policy is given).
ClusterStats cluster_update(ChainState& st, ClusterMode mode,
                            const SliceZeroPolicy* policy = nullptr);

/// The locus-variable mode of the chain's model.
ClusterMode locus_mode(const OperatorTable& table);

/// True when flipping every locus leaves the state unchanged (every site in
/// an even number of loci): periodic chains and the torus.
bool loci_have_relation(const OperatorTable& table);

/// Changes the parity of the number of off-diagonal operators on every locus
/// at once, which the cluster updates cannot do when the loci obey a relation.
/// Built from open-time clusters; the move is its own inverse. Returns
/// whether it was applied. No-op (false) without a relation.
bool winding_update(ChainState& st, const SliceZeroPolicy* policy = nullptr);

struct SweepStats {
  ClusterStats site, locus;
  bool winding = false;
};

/// Diagonal update, site- and locus-cluster updates, then winding_update.
SweepStats sweep(ChainState& st, const SliceZeroPolicy* policy = nullptr);

/// Propagates cfg0 through the whole string; true iff every off-diagonal
/// action is allowed, the state returns to cfg0 and n matches the slots.
bool check_propagation(const ChainState& st);

}  // namespace bellqmc
