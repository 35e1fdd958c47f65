#pragma once

#include <span>
#include <vector>

#include "bellqmc/bell.hpp"
#include "bellqmc/lattice.hpp"
#include "bellqmc/sse.hpp"
#include "bellqmc/stats.hpp"

namespace bellqmc {

/// subset_B: B is sampled explicitly with weight lambda^{N_B} (1-lambda)^{N_A-N_B}.
/// analytic_B: B is summed out, leaving lambda^{wt_A} on the slice-0 string.
enum class ExtMethod { subset_B, analytic_B };

std::string to_string(ExtMethod method);
ExtMethod ext_method_from_string(const std::string& name);

/// Extended ensemble Q(lambda) on top of one chain. Sites outside A (and, for
/// subset_B, outside B) stay |0,0> at slice 0.
class ExtEnsembleState : public SliceZeroPolicy {
 public:
  ExtEnsembleState(ChainState chain, const Region& region, double lambda, ExtMethod method);

  double weight_ratio(const BellConfig& cfg, Channel channel, std::span<const int> sites) const override;

  ChainState chain;

  double lambda() const { return lambda_; }
  ExtMethod method() const { return method_; }
  const Region& region() const { return region_; }
  int n_a() const { return static_cast<int>(region_.size()); }
  int n_b() const { return n_b_; }
  bool in_a(int i) const { return in_a_[i]; }
  bool in_b(int i) const { return in_b_[i]; }
  /// Non-identity sites of the slice-0 string inside A.
  int weight() const { return weight_in(chain.cfg0, mask_a_); }
  bool frozen(int i) const { return !in_a_[i] || (method_ == ExtMethod::subset_B && !in_b_[i]); }

  friend void subset_update(ExtEnsembleState& st);

 private:
  Region region_;
  SiteMask mask_a_;
  double lambda_;
  ExtMethod method_;
  std::vector<std::uint8_t> in_a_, in_b_;
  int n_b_ = 0;
};

/// Sequential add/remove pass over the sites of A (subset_B only).
void subset_update(ExtEnsembleState& st);

/// min(1, lambda^(wt_after - wt_before)).
double constrained_flip_analytic(double lambda, int wt_before, int wt_after);

/// One full sweep of the chain under the ensemble constraints, followed by
/// subset_update for subset_B.
void ext_sweep(ExtEnsembleState& st);

/// N_B / lambda - (N_A - N_B) / (1 - lambda); subset_B only.
double estimator_e1(const ExtEnsembleState& st);
/// wt_A / lambda (called e2* under subset_B).
double estimator_e2(const ExtEnsembleState& st);
/// 1 when the slice-0 string is the identity on A; its mean is Q(0)/Q(lambda).
double empty_indicator(const ExtEnsembleState& st);

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with k interior nodes on [0, 1].
Quadrature gauss_legendre(int k);

/// S2 = -sum_k w_k <e>_k + N_A ln 2, errors added in quadrature.
Estimate integrate_s2(const Quadrature& grid, std::span<const Estimate> means, int n_a);

}  // namespace bellqmc
