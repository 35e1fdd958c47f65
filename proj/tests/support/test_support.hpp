#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "bellqmc/model.hpp"
#include "bellqmc/sse.hpp"

namespace bellqmc::testing {

inline std::shared_ptr<const OperatorTable> table_of(const ModelSpec& model) {
  return std::make_shared<const OperatorTable>(model);
}

inline void warm_up(ChainState& st, int sweeps, const SliceZeroPolicy* policy = nullptr) {
  st.cutoff_frozen = false;
  for (int i = 0; i < sweeps; ++i) {
    sweep(st, policy);
    grow_cutoff(st);
  }
  st.cutoff_frozen = true;
}

struct ChiSquare {
  double chi2 = 0.0;
  int dof = 0;
  double p_value = 0.0;
  bool impossible_hit = false;  // an outcome of zero probability was observed
};

/// Pearson test of counts against probabilities; cells with p below
/// `floor` are pooled into one.
inline ChiSquare chi_square(const std::vector<double>& counts, const std::vector<double>& p, double floor = 0.0) {
  double n = 0;
  for (double c : counts) n += c;
  ChiSquare out;
  double pooled_p = 0, pooled_c = 0;
  int cells = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] < 1e-13) {
      if (counts[k] > 0) out.impossible_hit = true;
      continue;
    }
    if (p[k] * n < floor) {
      pooled_p += p[k];
      pooled_c += counts[k];
      continue;
    }
    out.chi2 += (counts[k] - n * p[k]) * (counts[k] - n * p[k]) / (n * p[k]);
    ++cells;
  }
  if (pooled_p > 0) {
    out.chi2 += (pooled_c - n * pooled_p) * (pooled_c - n * pooled_p) / (n * pooled_p);
    ++cells;
  }
  out.dof = cells - 1;
  out.p_value = out.impossible_hit ? 0.0
                                   : boost::math::cdf(boost::math::complement(boost::math::chi_squared(out.dof), out.chi2));
  return out;
}

}  // namespace bellqmc::testing
