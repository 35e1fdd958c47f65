#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bellqmc/bell.hpp"
#include "bellqmc/lattice.hpp"
#include "bellqmc/model.hpp"

namespace bellqmc::ed {

inline constexpr int max_thermal_sites = 18;
inline constexpr int max_lanczos_sites = 22;
inline constexpr int max_bell_sites = 10;
inline constexpr int max_pauli_region = 12;

/// One symmetry block. `basis` holds computational states of the working
/// frame, columns of `vectors` the kept eigenvectors with unnormalized
/// Boltzmann weights `weights` (relative to the overall lowest energy).
struct Sector {
  std::vector<std::uint32_t> basis;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd energies;
  Eigen::VectorXd weights;

  double partition() const { return weights.sum(); }
};

enum class StateKind { pure, thermal };

/// Block-diagonal real state. The thermal state keeps each block separately:
/// the sampler sees sum_a rho_a (x) rho_a, not rho (x) rho.
///
/// For the Ising chain the working frame is the X eigenbasis (`x_frame`),
/// where both models read H = -sum_loci F_loci - h sum_i (-1)^{b_i} with F
/// flipping the locus bits.
struct DenseState {
  int n_sites = 0;
  StateKind kind = StateKind::pure;
  bool x_frame = false;
  bool degenerate = false;
  double ground_energy = 0.0;
  std::vector<Sector> sectors;

  /// sum_a Z_a^2
  double norm() const;
};

/// Pure state from amplitudes in the computational Z basis (normalized here).
DenseState pure_state(const Eigen::VectorXd& amplitudes);

/// Lowest eigenvector over all symmetry sectors; `degenerate` is set when the
/// two lowest levels coincide. Dense path for blocks up to 4096 states,
/// Lanczos above that.
DenseState ground_state(const ModelSpec& model);

/// Sector-resolved thermal state; levels with relative weight below `cutoff`
/// are dropped.
DenseState thermal_state(const ModelSpec& model, double beta, double cutoff = 1e-14);

/// Generators of the diagonal symmetries commuting with every locus flip
/// (GF(2) null space of the locus incidence matrix), as site masks.
std::vector<std::uint32_t> symmetry_generators(const ModelSpec& model);

/// sum_a Z_a <H>_a Z_a / sum_a Z_a^2, the energy seen by the two-copy sampler.
double energy(const DenseState& state);

/// sum_a Tr(rho_a s)^2 / sum_a Z_a^2
double pauli_sq(const DenseState& state, const PauliString& s);

/// sum_a Tr[(rho_a)_A^2] / sum_a Z_a^2
double exact_purity(const DenseState& state, const Region& region);

/// Unnormalized reduced density matrix of every sector on `sites` (frame of the state).
std::vector<Eigen::MatrixXd> reduced_blocks(const DenseState& state, const std::vector<int>& sites);

/// Index of a Bell configuration in bell_distribution(): r^z bits in the low
/// N bits, r^x bits above.
std::size_t bell_index(const BellConfig& cfg);

enum class Resolution { sectors, merged };

/// Exact slice-0 outcome distribution over all 4^N strings. `sectors` gives
/// the distribution sampled by the engine, `merged` the plain two-copy
/// distribution of the full thermal state.
std::vector<double> bell_distribution(const DenseState& state, Resolution resolution = Resolution::sectors);

std::vector<double> thermal_bell_distribution(const ModelSpec& model, double beta,
                                              Resolution resolution = Resolution::sectors);

/// q[w] = sum over Pauli strings P supported on A with weight w of
/// sum_a Tr(P rho_a P rho_a), normalized so that q[0] = 1. This is the
/// two-replica weight; for a pure state it is <P>^2.
std::vector<double> pauli_weight_spectrum(const DenseState& state, const Region& region);

/// Q(lambda)/Q(empty) in the Pauli form.
double exact_q_lambda(const DenseState& state, const Region& region, double lambda);

/// Same quantity from the subset expansion over B in A; independent route.
double exact_q_lambda_subsets(const DenseState& state, const Region& region, double lambda);

/// d ln Q / d lambda, the exact mean of both integrand estimators.
double exact_dlogq(const DenseState& state, const Region& region, double lambda);

}  // namespace bellqmc::ed
