#include "bellqmc/ext_ensemble.hpp"

#include <cmath>
#include <numbers>

#include "bellqmc/errors.hpp"

namespace bellqmc {

std::string to_string(ExtMethod method) { return method == ExtMethod::subset_B ? "subset_B" : "analytic_B"; }

ExtMethod ext_method_from_string(const std::string& name) {
  if (name == "subset_B") return ExtMethod::subset_B;
  if (name == "analytic_B") return ExtMethod::analytic_B;
  throw ConfigError("unknown extended-ensemble method '" + name + "'");
}

ExtEnsembleState::ExtEnsembleState(ChainState chain_, const Region& region, double lambda, ExtMethod method)
    : chain(std::move(chain_)),
      region_(region),
      mask_a_(chain.cfg0.size(), region),
      lambda_(lambda),
      method_(method),
      in_a_(chain.cfg0.size(), 0),
      in_b_(chain.cfg0.size(), 0) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  for (int i : region.sites) {
    if (i < 0 || i >= static_cast<int>(in_a_.size())) throw IndexError("region site out of range");
    in_a_[i] = 1;
  }
  const int n = static_cast<int>(chain.cfg0.size());
  for (int i = 0; i < n; ++i)
    if (!in_a_[i] && (chain.cfg0.rz().get(i) || chain.cfg0.rx().get(i)))
      throw ConfigError("slice-0 state must be |0,0> outside A");
  if (method == ExtMethod::subset_B) {
    // Start with B covering the non-trivial sites of A so the state is valid.
    for (int i : region.sites)
      if (chain.cfg0.rz().get(i) || chain.cfg0.rx().get(i)) {
        in_b_[i] = 1;
        ++n_b_;
      }
  }
}

double ExtEnsembleState::weight_ratio(const BellConfig& cfg, Channel channel, std::span<const int> sites) const {
  int delta = 0;
  const BitVector& flipped = cfg.bits(channel);
  const BitVector& kept = cfg.bits(other(channel));
  for (int s : sites) {
    if (frozen(s)) return 0.0;
    if (method_ == ExtMethod::analytic_B && !kept.get(s)) delta += flipped.get(s) ? -1 : 1;
  }
  if (method_ == ExtMethod::subset_B || delta == 0) return 1.0;
  return std::pow(lambda_, delta);
}

void subset_update(ExtEnsembleState& st) {
  if (st.method_ != ExtMethod::subset_B) throw UnsupportedMode("subset update needs the subset_B method");
  const double lam = st.lambda_;
  const double p_remove = std::min(1.0, (1.0 - lam) / lam);
  const double p_add = std::min(1.0, lam / (1.0 - lam));
  const auto& cfg = st.chain.cfg0;
  for (int j : st.region_.sites) {
    if (st.in_b_[j]) {
      if (cfg.rz().get(j) || cfg.rx().get(j)) continue;
      if (p_remove >= 1.0 || st.chain.uniform() < p_remove) {
        st.in_b_[j] = 0;
        --st.n_b_;
      }
    } else if (p_add >= 1.0 || st.chain.uniform() < p_add) {
      st.in_b_[j] = 1;
      ++st.n_b_;
    }
  }
}

double constrained_flip_analytic(double lambda, int wt_before, int wt_after) {
  const int delta = wt_after - wt_before;
  if (delta <= 0) return 1.0;
  return std::pow(lambda, delta);
}

void ext_sweep(ExtEnsembleState& st) {
  sweep(st.chain, &st);
  if (st.method() == ExtMethod::subset_B) subset_update(st);
}

double estimator_e1(const ExtEnsembleState& st) {
  if (st.method() != ExtMethod::subset_B) throw UnsupportedMode("e1 needs the subset_B method");
  const double lam = st.lambda();
  if (!(lam > 0.0 && lam < 1.0)) throw ConfigError("e1 is undefined at lambda 0 or 1");
  return st.n_b() / lam - (st.n_a() - st.n_b()) / (1.0 - lam);
}

double estimator_e2(const ExtEnsembleState& st) {
  if (!(st.lambda() > 0.0)) throw ConfigError("e2 is undefined at lambda 0");
  return st.weight() / st.lambda();
}

double empty_indicator(const ExtEnsembleState& st) { return st.weight() == 0 ? 1.0 : 0.0; }

Quadrature gauss_legendre(int k) {
  if (k < 1) throw ConfigError("quadrature needs at least one node");
  Quadrature q;
  q.nodes.resize(k);
  q.weights.resize(k);
  for (int i = 0; i < k; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= k; ++n) {
        const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = k * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // Map [-1, 1] to [0, 1], nodes ascending.
    q.nodes[k - 1 - i] = 0.5 * (x + 1.0);
    q.weights[k - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

Estimate integrate_s2(const Quadrature& grid, std::span<const Estimate> means, int n_a) {
  if (means.size() != grid.nodes.size()) throw ConfigError("one mean per quadrature node required");
  double value = n_a * std::numbers::ln2, var = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (!std::isfinite(means[k].value)) throw Error("node " + std::to_string(k) + " failed");
    value -= grid.weights[k] * means[k].value;
    var += grid.weights[k] * grid.weights[k] * means[k].error * means[k].error;
  }
  return {value, std::sqrt(var)};
}

}  // namespace bellqmc
