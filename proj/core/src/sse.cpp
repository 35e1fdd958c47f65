#include "bellqmc/sse.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bellqmc/errors.hpp"

namespace bellqmc {

int OperatorString::count_nonnull() const {
  return static_cast<int>(std::count_if(slots.begin(), slots.end(), [](const OperatorEntry& e) {
    return e.kind != OpKind::null_op;
  }));
}

ChainState::ChainState(std::shared_ptr<const OperatorTable> table, double beta_,
                       std::uint64_t seed, int initial_cutoff)
    : cfg0(table->n_sites()), beta(beta_), rng(seed), table_(std::move(table)) {
  if (beta < 0) throw ConfigError("beta must be >= 0");
  if (initial_cutoff < 1) throw ConfigError("initial cutoff must be positive");
  ops.slots.assign(initial_cutoff, OperatorEntry{});
}

ClusterMode locus_mode(const OperatorTable& table) {
  return table.model().kind == ModelKind::tfim_1d ? ClusterMode::bond_vars
                                                  : ClusterMode::plaquette_vars;
}

void diagonal_update(ChainState& st) {
  const auto& t = st.table();
  const int n_sites = t.n_sites();
  const int total = t.n_total();
  const double two_beta = 2.0 * st.beta;
  const int M = st.ops.cutoff();
  int n = st.ops.n;
  if (n > M || n < 0) throw InternalCorruption("operator count out of range");
  for (auto& op : st.ops.slots) {
    if (op.kind == OpKind::null_op) {
      const int r = static_cast<int>(st.rng() % static_cast<std::uint64_t>(total));
      const double c = r < n_sites ? t.site_coupling() : t.locus_coupling();
      if (c == 0.0) continue;
      const double ratio = two_beta * c * total / (M - n);
      if (ratio >= 1.0 || st.uniform() < ratio) {
        op = r < n_sites ? OperatorEntry{OpKind::site_diag, r}
                         : OperatorEntry{OpKind::locus_diag, r - n_sites};
        ++n;
      }
    } else if (op.is_diagonal()) {
      const double c = op.kind == OpKind::site_diag ? t.site_coupling() : t.locus_coupling();
      const double ratio = (M - n + 1) / (two_beta * c * total);
      if (ratio >= 1.0 || st.uniform() < ratio) {
        op = OperatorEntry{};
        --n;
      }
    }
  }
  st.ops.n = n;
}

bool grow_cutoff(ChainState& st) {
  if (st.cutoff_frozen) return false;
  const int M = st.ops.cutoff();
  const int n = st.ops.n;
  if (n <= (3 * M) / 4) return false;
  const int new_m = (4 * n + 2) / 3 + 1;
  const int extra = new_m - M;
  std::vector<int> where(extra);
  for (auto& w : where) w = static_cast<int>(st.rng() % static_cast<std::uint64_t>(M + 1));
  std::sort(where.begin(), where.end());
  std::vector<OperatorEntry> grown;
  grown.reserve(new_m);
  std::size_t k = 0;
  for (int p = 0; p <= M; ++p) {
    while (k < where.size() && where[k] == p) {
      grown.emplace_back();
      ++k;
    }
    if (p < M) grown.push_back(st.ops.slots[p]);
  }
  st.ops.slots = std::move(grown);
  return true;
}

namespace {

class VertexBuilder {
 public:
  explicit VertexBuilder(VertexList& vl) : vl_(vl), last_(vl.n_vars, -1) {
    vl_.first_leg.assign(vl.n_vars, -1);
    vl_.group_begin.assign(1, 0);
    vl_.vertex_group_begin.assign(1, 0);
  }

  void begin_vertex(int slot, bool toggles) {
    vl_.vertex_slot.push_back(slot);
    vl_.vertex_toggles.push_back(toggles);
  }
  void end_vertex() { vl_.vertex_group_begin.push_back(vl_.n_groups()); }

  void begin_group(bool anchored = false) { vl_.group_anchored.push_back(anchored); }
  void end_group() { vl_.group_begin.push_back(static_cast<int>(vl_.legs.size())); }

  void leg(int var, bool above) {
    const int id = static_cast<int>(vl_.legs.size());
    const int group = static_cast<int>(vl_.group_anchored.size()) - 1;
    vl_.legs.push_back({-1, var, group, above});
    if (above) {
      last_[var] = id;
    } else if (last_[var] >= 0) {
      connect(id, last_[var]);
    } else {
      vl_.first_leg[var] = id;
    }
  }

  /// Two-leg vertex whose legs are cluster ends (no internal connection).
  void terminal_vertex(int slot, int var) {
    begin_vertex(slot, true);
    begin_group();
    leg(var, false);
    end_group();
    begin_group();
    leg(var, true);
    end_group();
    end_vertex();
  }

  void finish(bool periodic) {
    vl_.last_leg = last_;
    if (!periodic) return;
    for (int v = 0; v < vl_.n_vars; ++v)
      if (vl_.first_leg[v] >= 0) connect(vl_.first_leg[v], last_[v]);
  }

 private:
  void connect(int a, int b) {
    vl_.legs[a].link = b;
    vl_.legs[b].link = a;
  }

  VertexList& vl_;
  std::vector<int> last_;
};

void check_mode(const OperatorTable& t, ClusterMode mode) {
  if (mode == ClusterMode::site_vars) return;
  const bool tfim = t.model().kind == ModelKind::tfim_1d;
  if ((mode == ClusterMode::bond_vars) != tfim)
    throw UnsupportedMode(mode == ClusterMode::bond_vars
                              ? "bond_vars clusters need the Ising chain"
                              : "plaquette_vars clusters need the gauge theory");
}

}  // namespace

VertexList build_linked_list(ChainState& st, ClusterMode mode, bool periodic) {
  const auto& t = st.table();
  check_mode(t, mode);
  const bool site_mode = mode == ClusterMode::site_vars;
  const int n_sites = t.n_sites();

  VertexList vl;
  vl.mode = mode;
  vl.n_vars = site_mode ? n_sites : t.n_loci();
  VertexBuilder b(vl);

  std::vector<std::uint8_t> sbit(n_sites), lbit(n_sites);
  const auto& sb = st.cfg0.bits(t.site_channel());
  const auto& lb = st.cfg0.bits(t.locus_channel());
  for (int i = 0; i < n_sites; ++i) {
    sbit[i] = sb.get(i);
    lbit[i] = lb.get(i);
  }

  const int M = st.ops.cutoff();
  for (int p = 0; p < M; ++p) {
    const OperatorEntry op = st.ops.slots[p];
    switch (op.kind) {
      case OpKind::null_op:
        break;
      case OpKind::site_diag:
        if (site_mode && !lbit[op.locus]) b.terminal_vertex(p, op.locus);
        break;
      case OpKind::site_offdiag: {
        if (site_mode) {
          b.terminal_vertex(p, op.locus);
        } else {
          auto loci = t.loci_of(op.locus);
          if (!loci.empty()) {
            // Flipping every adjacent locus segment leaves this site's locus
            // channel unchanged only for an even number of adjacent loci.
            b.begin_vertex(p, false);
            b.begin_group(loci.size() % 2 == 1);
            for (int l : loci) b.leg(l, false);
            for (int l : loci) b.leg(l, true);
            b.end_group();
            b.end_vertex();
          }
        }
        sbit[op.locus] ^= 1;
        break;
      }
      case OpKind::locus_diag: {
        if (!site_mode) {
          bool parity = false;
          for (int s : t.locus(op.locus)) parity ^= sbit[s];
          if (!parity) b.terminal_vertex(p, op.locus);
        }
        break;
      }
      case OpKind::locus_offdiag: {
        auto sites = t.locus(op.locus);
        if (site_mode) {
          b.begin_vertex(p, false);
          if (sites.size() == 4 && t.split_loci()) {
            const auto pairs =
                split_plaquette_vertex({sites[0], sites[1], sites[2], sites[3]}, st.rng);
            for (const auto& pair : pairs) {
              b.begin_group();
              for (int s : pair) b.leg(s, false);
              for (int s : pair) b.leg(s, true);
              b.end_group();
            }
          } else {
            b.begin_group();
            for (int s : sites) b.leg(s, false);
            for (int s : sites) b.leg(s, true);
            b.end_group();
          }
          b.end_vertex();
        } else {
          b.terminal_vertex(p, op.locus);
        }
        for (int s : sites) lbit[s] ^= 1;
        break;
      }
    }
  }
  b.finish(periodic);
  return vl;
}

namespace {

struct Clusters {
  std::vector<int> of_group;
  std::vector<std::uint8_t> anchored;
  int count = 0;
};

Clusters label_clusters(const VertexList& vl) {
  Clusters cl;
  cl.of_group.assign(vl.n_groups(), -1);
  std::vector<int> stack;
  for (int g = 0; g < vl.n_groups(); ++g) {
    if (cl.of_group[g] >= 0) continue;
    const int c = cl.count++;
    cl.anchored.push_back(0);
    cl.of_group[g] = c;
    stack.push_back(g);
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      cl.anchored[c] |= vl.group_anchored[cur];
      for (int l = vl.group_begin[cur]; l < vl.group_begin[cur + 1]; ++l) {
        const int link = vl.legs[l].link;
        if (link < 0) continue;
        const int g2 = vl.legs[link].group;
        if (cl.of_group[g2] < 0) {
          cl.of_group[g2] = c;
          stack.push_back(g2);
        }
      }
    }
  }
  return cl;
}

void apply_toggles(ChainState& st, const VertexList& vl, const Clusters& cl,
                   const std::vector<std::uint8_t>& flip) {
  for (int v = 0; v < vl.n_vertices(); ++v) {
    if (!vl.vertex_toggles[v]) continue;
    const int g0 = vl.vertex_group_begin[v];
    if (flip[cl.of_group[g0]] == flip[cl.of_group[g0 + 1]]) continue;
    auto& op = st.ops.slots[vl.vertex_slot[v]];
    switch (op.kind) {
      case OpKind::site_diag: op.kind = OpKind::site_offdiag; break;
      case OpKind::site_offdiag: op.kind = OpKind::site_diag; break;
      case OpKind::locus_diag: op.kind = OpKind::locus_offdiag; break;
      case OpKind::locus_offdiag: op.kind = OpKind::locus_diag; break;
      case OpKind::null_op: throw InternalCorruption("vertex on a null slot");
    }
  }
}

/// Sites whose locus channel toggles when the listed loci flip.
class LocusFootprint {
 public:
  explicit LocusFootprint(const OperatorTable& t) : t_(t), mark_(t.n_sites(), 0) {}

  template <class Loci>
  const std::vector<int>& sites(const Loci& loci) {
    sites_.clear();
    for (int b : loci)
      for (int s : t_.locus(b)) {
        if (!mark_[s]) sites_.push_back(s);
        mark_[s] ^= 1;
      }
    std::erase_if(sites_, [&](int s) {
      const bool keep = mark_[s];
      mark_[s] = 0;
      return !keep;
    });
    return sites_;
  }

 private:
  const OperatorTable& t_;
  std::vector<std::uint8_t> mark_;
  std::vector<int> sites_;
};

bool accept_slice_zero(ChainState& st, const SliceZeroPolicy* policy, std::span<const int> changed,
                       Channel channel) {
  if (!st.coin()) return false;
  if (policy == nullptr || changed.empty()) return true;
  const double ratio = policy->weight_ratio(st.cfg0, channel, changed);
  return ratio >= 1.0 || st.uniform() < ratio;
}

}  // namespace

ClusterStats cluster_update(ChainState& st, ClusterMode mode, const SliceZeroPolicy* policy) {
  const auto& t = st.table();
  const VertexList vl = build_linked_list(st, mode);
  const bool site_mode = mode == ClusterMode::site_vars;
  const Clusters cl = label_clusters(vl);
  const int n_clusters = cl.count;

  // Slice-0 footprint of every cluster: variables whose first leg (scanning
  // up from slot 0) belongs to it. Variables without legs become their own
  // single-variable cluster.
  std::vector<int> owner(vl.n_vars);
  int n_free = 0;
  for (int v = 0; v < vl.n_vars; ++v) {
    const int f = vl.first_leg[v];
    owner[v] = f >= 0 ? cl.of_group[vl.legs[f].group] : n_clusters + n_free++;
  }
  const int n_total = n_clusters + n_free;
  std::vector<int> foot_begin(n_total + 1, 0), foot(vl.n_vars);
  for (int v = 0; v < vl.n_vars; ++v) ++foot_begin[owner[v] + 1];
  for (int c = 0; c < n_total; ++c) foot_begin[c + 1] += foot_begin[c];
  {
    std::vector<int> fill(foot_begin.begin(), foot_begin.end() - 1);
    for (int v = 0; v < vl.n_vars; ++v) foot[fill[owner[v]]++] = v;
  }

  const Channel channel = site_mode ? t.site_channel() : t.locus_channel();
  BitVector& bits = st.cfg0.bits(channel);
  LocusFootprint footprint(t);

  ClusterStats stats;
  stats.clusters = n_clusters;
  stats.free_vars = n_free;
  std::vector<std::uint8_t> flip(n_total, 0);
  for (int c = 0; c < n_total; ++c) {
    if (c < n_clusters && cl.anchored[c]) continue;
    std::span<const int> vars(foot.data() + foot_begin[c], foot_begin[c + 1] - foot_begin[c]);
    std::span<const int> sites = site_mode ? vars : std::span<const int>(footprint.sites(vars));
    if (!accept_slice_zero(st, policy, sites, channel)) continue;
    flip[c] = 1;
    ++stats.flipped;
    for (int s : sites) bits.flip(s);
  }
  apply_toggles(st, vl, cl, flip);

  if (!site_mode) {
    // Toggles of the site channel on symmetry sets (all sites, stars) at
    // every time slice; they keep all parity constraints intact.
    BitVector& site_bits = st.cfg0.bits(t.site_channel());
    for (const auto& set : t.site_symmetries())
      if (accept_slice_zero(st, policy, set, t.site_channel()))
        for (int s : set) site_bits.flip(s);
  }
  return stats;
}

bool loci_have_relation(const OperatorTable& table) {
  for (int i = 0; i < table.n_sites(); ++i)
    if (table.loci_of(i).size() % 2 == 1) return false;
  return true;
}

bool winding_update(ChainState& st, const SliceZeroPolicy* policy) {
  const auto& t = st.table();
  if (!loci_have_relation(t)) return false;
  const VertexList vl = build_linked_list(st, locus_mode(t), false);
  const Clusters cl = label_clusters(vl);

  // Every locus must flip differently below and above slice 0: a 2-colouring
  // of the clusters with one edge per locus between its bottom and top piece.
  std::vector<std::vector<int>> adj(cl.count);
  std::vector<int> bottom(vl.n_vars);
  for (int b = 0; b < vl.n_vars; ++b) {
    if (vl.first_leg[b] < 0) return false;
    const int lo = cl.of_group[vl.legs[vl.first_leg[b]].group];
    const int hi = cl.of_group[vl.legs[vl.last_leg[b]].group];
    if (lo == hi) return false;
    adj[lo].push_back(hi);
    adj[hi].push_back(lo);
    bottom[b] = lo;
  }
  std::vector<std::uint8_t> colour(cl.count, 0);
  std::vector<std::int8_t> seen(cl.count, 0);
  std::vector<int> component, stack;
  for (int root = 0; root < cl.count; ++root) {
    if (seen[root] || adj[root].empty()) continue;
    component.clear();
    seen[root] = 1;
    stack.push_back(root);
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      component.push_back(c);
      for (int d : adj[c]) {
        if (!seen[d]) {
          seen[d] = 1;
          colour[d] = colour[c] ^ 1;
          stack.push_back(d);
        } else if (colour[d] == colour[c]) {
          return false;
        }
      }
    }
    bool flipped_anchor = false, kept_anchor = false;
    for (int c : component) (colour[c] ? flipped_anchor : kept_anchor) |= cl.anchored[c] != 0;
    if (flipped_anchor && kept_anchor) return false;
    if (flipped_anchor)
      for (int c : component) colour[c] ^= 1;
  }

  std::vector<int> moved;
  for (int b = 0; b < vl.n_vars; ++b)
    if (colour[bottom[b]]) moved.push_back(b);
  LocusFootprint footprint(t);
  const auto& sites = footprint.sites(moved);
  if (!accept_slice_zero(st, policy, sites, t.locus_channel())) return false;
  BitVector& bits = st.cfg0.bits(t.locus_channel());
  for (int s : sites) bits.flip(s);
  apply_toggles(st, vl, cl, colour);
  return true;
}

SweepStats sweep(ChainState& st, const SliceZeroPolicy* policy) {
  SweepStats out;
  diagonal_update(st);
  out.site = cluster_update(st, ClusterMode::site_vars, policy);
  out.locus = cluster_update(st, locus_mode(st.table()), policy);
  out.winding = winding_update(st, policy);
  ++st.sweeps;
  return out;
}

bool check_propagation(const ChainState& st) {
  if (st.ops.n != st.ops.count_nonnull()) return false;
  BellConfig state = st.cfg0;
  for (const auto& op : st.ops.slots)
    if (!try_apply(st.table(), op, state)) return false;
  return state == st.cfg0;
}

void ChainState::save(std::ostream& out) const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", beta);
  out << "bellqmc-checkpoint 1\n"
      << "n_sites " << cfg0.size() << '\n'
      << "beta " << buf << '\n'
      << "sweeps " << sweeps << '\n'
      << "cutoff_frozen " << (cutoff_frozen ? 1 : 0) << '\n'
      << "cfg0 " << cfg0.to_string() << '\n'
      << "ops " << ops.cutoff() << ' ' << ops.n << '\n';
  for (const auto& op : ops.slots) out << static_cast<int>(op.kind) << ' ' << op.locus << '\n';
  out << "rng " << rng << '\n';
}

ChainState ChainState::load(std::istream& in, std::shared_ptr<const OperatorTable> table) {
  auto expect = [&](const char* key) {
    std::string k;
    if (!(in >> k) || k != key) throw Error(std::string("checkpoint: expected '") + key + "'");
  };
  expect("bellqmc-checkpoint");
  int version = 0;
  in >> version;
  if (version != 1) throw Error("checkpoint: unsupported version");
  expect("n_sites");
  std::size_t n_sites = 0;
  in >> n_sites;
  if (n_sites != static_cast<std::size_t>(table->n_sites()))
    throw Error("checkpoint: site count does not match the model");
  expect("beta");
  std::string beta_text;
  in >> beta_text;
  ChainState st(table, std::strtod(beta_text.c_str(), nullptr), 0, 1);
  expect("sweeps");
  in >> st.sweeps;
  expect("cutoff_frozen");
  int frozen = 0;
  in >> frozen;
  st.cutoff_frozen = frozen != 0;
  expect("cfg0");
  std::string cfg;
  in >> cfg;
  st.cfg0 = BellConfig::from_string(cfg);
  expect("ops");
  int m = 0;
  in >> m >> st.ops.n;
  st.ops.slots.resize(m);
  for (auto& op : st.ops.slots) {
    int kind = 0;
    in >> kind >> op.locus;
    if (kind < 0 || kind > 4) throw Error("checkpoint: bad operator kind");
    op.kind = static_cast<OpKind>(kind);
  }
  expect("rng");
  in >> st.rng;
  if (!in) throw Error("checkpoint: truncated input");
  return st;
}

}  // namespace bellqmc
