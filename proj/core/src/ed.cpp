#include "bellqmc/ed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "bellqmc/errors.hpp"

namespace bellqmc::ed {

namespace {

constexpr int max_dense_block = 4096;

struct Structure {
  int n = 0;
  double h = 0.0;
  bool x_frame = false;
  std::vector<std::uint32_t> loci;

  double diagonal(std::uint32_t b) const { return -h * (n - 2 * std::popcount(b)); }
};

Structure structure_of(const ModelSpec& model, int max_sites) {
  OperatorTable table(model);
  Structure s;
  s.n = table.n_sites();
  if (s.n > max_sites)
    throw InvalidSize("exact diagonalization limited to " + std::to_string(max_sites) + " sites");
  s.h = model.h;
  s.x_frame = model.kind == ModelKind::tfim_1d;
  for (int b = 0; b < table.n_loci(); ++b) {
    std::uint32_t m = 0;
    for (int i : table.locus(b)) m |= std::uint32_t{1} << i;
    s.loci.push_back(m);
  }
  return s;
}

std::vector<std::uint32_t> null_space(std::vector<std::uint32_t> rows, int n) {
  std::vector<int> pivots;
  std::size_t rank = 0;
  for (int col = 0; col < n && rank < rows.size(); ++col) {
    const std::uint32_t bit = std::uint32_t{1} << col;
    auto it = std::find_if(rows.begin() + rank, rows.end(), [&](std::uint32_t r) { return r & bit; });
    if (it == rows.end()) continue;
    std::iter_swap(rows.begin() + rank, it);
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (r != rank && (rows[r] & bit)) rows[r] ^= rows[rank];
    pivots.push_back(col);
    ++rank;
  }
  std::vector<std::uint32_t> basis;
  for (int f = 0; f < n; ++f) {
    if (std::find(pivots.begin(), pivots.end(), f) != pivots.end()) continue;
    std::uint32_t g = std::uint32_t{1} << f;
    for (std::size_t k = 0; k < rank; ++k)
      if (rows[k] & (std::uint32_t{1} << f)) g |= std::uint32_t{1} << pivots[k];
    basis.push_back(g);
  }
  return basis;
}

std::vector<std::vector<std::uint32_t>> split_sectors(const Structure& s) {
  const auto gens = null_space(s.loci, s.n);
  std::vector<int> index(std::size_t{1} << gens.size(), -1);
  std::vector<std::vector<std::uint32_t>> blocks;
  for (std::uint32_t b = 0; b < (std::uint32_t{1} << s.n); ++b) {
    std::size_t syn = 0;
    for (std::size_t k = 0; k < gens.size(); ++k) syn |= std::size_t(std::popcount(gens[k] & b) & 1) << k;
    if (index[syn] < 0) {
      index[syn] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    blocks[index[syn]].push_back(b);
  }
  return blocks;
}

/// Position of every basis state inside its block; -1 when absent.
struct Lookup {
  std::vector<int> sector, pos;
  explicit Lookup(const DenseState& st) : sector(std::size_t{1} << st.n_sites, -1), pos(sector.size(), -1) {
    for (std::size_t a = 0; a < st.sectors.size(); ++a) {
      const auto& basis = st.sectors[a].basis;
      for (std::size_t k = 0; k < basis.size(); ++k) {
        sector[basis[k]] = static_cast<int>(a);
        pos[basis[k]] = static_cast<int>(k);
      }
    }
  }
};

Eigen::MatrixXd dense_block(const Structure& s, const std::vector<std::uint32_t>& basis,
                            const std::vector<int>& pos) {
  const int d = static_cast<int>(basis.size());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    H(k, k) = s.diagonal(basis[k]);
    for (std::uint32_t m : s.loci) H(pos[basis[k] ^ m], k) -= 1.0;
  }
  return H;
}

std::vector<int> block_positions(const Structure& s, const std::vector<std::vector<std::uint32_t>>& blocks) {
  std::vector<int> pos(std::size_t{1} << s.n);
  for (const auto& blk : blocks)
    for (std::size_t k = 0; k < blk.size(); ++k) pos[blk[k]] = static_cast<int>(k);
  return pos;
}

struct LanczosResult {
  double energy;
  Eigen::VectorXd vector;
};

LanczosResult lanczos(const Structure& s, const std::vector<std::uint32_t>& basis, const std::vector<int>& pos) {
  const Eigen::Index d = static_cast<Eigen::Index>(basis.size());
  auto apply = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const std::uint32_t b = basis[k];
      double acc = s.diagonal(b) * v[k];
      for (std::uint32_t m : s.loci) acc -= v[pos[b ^ m]];
      out[k] = acc;
    }
  };
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Eigen::VectorXd start(d);
  for (Eigen::Index k = 0; k < d; ++k) start[k] = u(rng);
  start.normalize();

  constexpr int max_iter = 600;
  std::vector<double> alpha, beta;
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(d), cur = start, w(d);
  double theta = std::numeric_limits<double>::infinity();
  bool converged = false;
  Eigen::VectorXd ritz;
  auto solve_tridiagonal = [&](Eigen::VectorXd& y) {
    const int m = static_cast<int>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub = Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    y = es.eigenvectors().col(0);
    return es.eigenvalues()[0];
  };
  for (int j = 0; j < max_iter; ++j) {
    apply(cur, w);
    if (j > 0) w -= beta.back() * prev;
    const double a = w.dot(cur);
    alpha.push_back(a);
    w -= a * cur;
    const double b = w.norm();
    if ((j + 1) % 5 == 0 || b < 1e-12) {
      const double t = solve_tridiagonal(ritz);
      if (std::abs(t - theta) < 1e-13 * std::max(1.0, std::abs(t)) || b < 1e-12) {
        theta = t;
        converged = true;
        break;
      }
      theta = t;
    }
    beta.push_back(b);
    prev = cur;
    cur = w / b;
  }
  if (!converged) throw Error("Lanczos did not converge");

  // Second pass rebuilds the Krylov vectors to assemble the eigenvector.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  prev.setZero();
  cur = start;
  for (Eigen::Index j = 0; j < ritz.size(); ++j) {
    x += ritz[j] * cur;
    if (j + 1 == ritz.size()) break;
    apply(cur, w);
    if (j > 0) w -= beta[j - 1] * prev;
    w -= alpha[j] * cur;
    prev = cur;
    cur = w / beta[j];
  }
  x.normalize();
  return {theta, x};
}

std::uint32_t gather(std::uint32_t b, const std::vector<int>& sites) {
  std::uint32_t out = 0;
  for (std::size_t k = 0; k < sites.size(); ++k) out |= ((b >> sites[k]) & 1u) << k;
  return out;
}

void walsh_hadamard(std::vector<double>& f) {
  for (std::size_t len = 1; len < f.size(); len <<= 1)
    for (std::size_t i = 0; i < f.size(); i += len << 1)
      for (std::size_t j = i; j < i + len; ++j) {
        const double a = f[j], b = f[j + len];
        f[j] = a + b;
        f[j + len] = a - b;
      }
}

/// Operator masks (z part, x part) of a Pauli string in the state's frame.
std::pair<std::uint32_t, std::uint32_t> frame_masks(const DenseState& st, const PauliString& s) {
  if (static_cast<int>(s.size()) != st.n_sites) throw InvalidSize("Pauli string length mismatch");
  std::uint32_t z = 0, x = 0;
  for (int i = 0; i < st.n_sites; ++i) {
    if (s.sz().get(i)) z |= std::uint32_t{1} << i;
    if (s.sx().get(i)) x |= std::uint32_t{1} << i;
  }
  if (st.x_frame) std::swap(z, x);
  return {z, x};
}

Eigen::MatrixXd block_density(const DenseState& st, const Sector& sec) {
  const int n = 1 << st.n_sites;
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd local = sec.vectors * sec.weights.asDiagonal() * sec.vectors.transpose();
  for (std::size_t a = 0; a < sec.basis.size(); ++a)
    for (std::size_t b = 0; b < sec.basis.size(); ++b) rho(sec.basis[a], sec.basis[b]) = local(a, b);
  return rho;
}

void check_region(const DenseState& st, const Region& region) {
  for (int i : region.sites)
    if (i < 0 || i >= st.n_sites) throw IndexError("region site out of range");
}

}  // namespace

double DenseState::norm() const {
  double acc = 0.0;
  for (const auto& s : sectors) acc += s.partition() * s.partition();
  return acc;
}

std::vector<std::uint32_t> symmetry_generators(const ModelSpec& model) {
  const auto s = structure_of(model, 32);
  return null_space(s.loci, s.n);
}

DenseState pure_state(const Eigen::VectorXd& amplitudes) {
  const auto dim = static_cast<std::size_t>(amplitudes.size());
  if (dim == 0 || !std::has_single_bit(dim)) throw InvalidSize("amplitude count must be a power of two");
  const double nrm = amplitudes.norm();
  if (nrm == 0.0) throw Error("zero state");
  DenseState st;
  st.n_sites = std::countr_zero(dim);
  if (st.n_sites > max_lanczos_sites) throw InvalidSize("state too large");
  Sector sec;
  sec.basis.resize(dim);
  for (std::size_t b = 0; b < dim; ++b) sec.basis[b] = static_cast<std::uint32_t>(b);
  sec.vectors = amplitudes / nrm;
  sec.energies = Eigen::VectorXd::Zero(1);
  sec.weights = Eigen::VectorXd::Ones(1);
  st.sectors.push_back(std::move(sec));
  return st;
}

DenseState ground_state(const ModelSpec& model) {
  const auto s = structure_of(model, max_lanczos_sites);
  const auto blocks = split_sectors(s);
  const auto pos = block_positions(s, blocks);

  double e0 = std::numeric_limits<double>::infinity(), e1 = e0;
  Sector best;
  auto record = [&](double e) {
    if (e < e0) {
      e1 = e0;
      e0 = e;
    } else if (e < e1) {
      e1 = e;
    }
  };
  for (const auto& blk : blocks) {
    Eigen::VectorXd vec;
    double e;
    if (static_cast<int>(blk.size()) <= max_dense_block) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_block(s, blk, pos));
      e = es.eigenvalues()[0];
      if (blk.size() > 1) record(es.eigenvalues()[1]);
      vec = es.eigenvectors().col(0);
    } else {
      auto r = lanczos(s, blk, pos);
      e = r.energy;
      vec = std::move(r.vector);
    }
    const bool lower = e < e0;
    record(e);
    if (lower) {
      best.basis = blk;
      best.vectors = vec;
    }
  }
  DenseState st;
  st.n_sites = s.n;
  st.kind = StateKind::pure;
  st.x_frame = s.x_frame;
  st.ground_energy = e0;
  st.degenerate = std::abs(e1 - e0) < 1e-8 * std::max(1.0, std::abs(e0));
  best.energies = Eigen::VectorXd::Constant(1, e0);
  best.weights = Eigen::VectorXd::Ones(1);
  st.sectors.push_back(std::move(best));
  return st;
}

DenseState thermal_state(const ModelSpec& model, double beta, double cutoff) {
  if (beta < 0) throw ConfigError("beta must be >= 0");
  const auto s = structure_of(model, max_thermal_sites);
  const auto blocks = split_sectors(s);
  const auto pos = block_positions(s, blocks);

  DenseState st;
  st.n_sites = s.n;
  st.kind = StateKind::thermal;
  st.x_frame = s.x_frame;
  st.ground_energy = std::numeric_limits<double>::infinity();
  for (const auto& blk : blocks) {
    if (static_cast<int>(blk.size()) > max_dense_block) throw InvalidSize("symmetry block too large for dense thermal state");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_block(s, blk, pos));
    // Keep only levels that can matter relative to this block's minimum; the
    // global filter below trims further.
    const Eigen::VectorXd& ev = es.eigenvalues();
    int keep = 0;
    while (keep < ev.size() && std::exp(-beta * (ev[keep] - ev[0])) > cutoff) ++keep;
    Sector sec;
    sec.basis = blk;
    sec.energies = ev.head(keep);
    sec.vectors = es.eigenvectors().leftCols(keep);
    st.ground_energy = std::min(st.ground_energy, ev[0]);
    st.sectors.push_back(std::move(sec));
  }
  std::vector<Sector> kept;
  for (auto& sec : st.sectors) {
    int keep = 0;
    while (keep < sec.energies.size() && std::exp(-beta * (sec.energies[keep] - st.ground_energy)) > cutoff) ++keep;
    if (keep == 0) continue;
    sec.energies.conservativeResize(keep);
    sec.vectors.conservativeResize(Eigen::NoChange, keep);
    sec.weights = (-beta * (sec.energies.array() - st.ground_energy)).exp();
    kept.push_back(std::move(sec));
  }
  st.sectors = std::move(kept);
  return st;
}

double energy(const DenseState& st) {
  double num = 0.0;
  for (const auto& sec : st.sectors) num += sec.partition() * sec.weights.dot(sec.energies);
  return num / st.norm();
}

double pauli_sq(const DenseState& st, const PauliString& s) {
  const auto [z, x] = frame_masks(st, s);
  const Lookup look(st);
  double acc = 0.0;
  for (std::size_t a = 0; a < st.sectors.size(); ++a) {
    const auto& sec = st.sectors[a];
    const Eigen::MatrixXd weighted = sec.vectors * sec.weights.asDiagonal();
    double tr = 0.0;
    for (std::size_t k = 0; k < sec.basis.size(); ++k) {
      const std::uint32_t partner = sec.basis[k] ^ x;
      if (look.sector[partner] != static_cast<int>(a)) continue;
      const double sign = (std::popcount(z & partner) & 1) ? -1.0 : 1.0;
      tr += sign * weighted.row(k).dot(sec.vectors.row(look.pos[partner]));
    }
    acc += tr * tr;
  }
  return acc / st.norm();
}

std::vector<Eigen::MatrixXd> reduced_blocks(const DenseState& st, const std::vector<int>& sites) {
  std::vector<int> rest;
  for (int i = 0; i < st.n_sites; ++i)
    if (std::find(sites.begin(), sites.end(), i) == sites.end()) rest.push_back(i);
  const int da = 1 << sites.size(), dr = 1 << rest.size();
  std::vector<Eigen::MatrixXd> out;
  Eigen::MatrixXd m(da, dr);
  for (const auto& sec : st.sectors) {
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(da, da);
    std::vector<std::uint32_t> ia(sec.basis.size()), ir(sec.basis.size());
    for (std::size_t k = 0; k < sec.basis.size(); ++k) {
      ia[k] = gather(sec.basis[k], sites);
      ir[k] = gather(sec.basis[k], rest);
    }
    for (Eigen::Index n = 0; n < sec.vectors.cols(); ++n) {
      m.setZero();
      for (std::size_t k = 0; k < sec.basis.size(); ++k) m(ia[k], ir[k]) = sec.vectors(k, n);
      rho.noalias() += sec.weights[n] * m * m.transpose();
    }
    out.push_back(std::move(rho));
  }
  return out;
}

double exact_purity(const DenseState& st, const Region& region) {
  check_region(st, region);
  double acc = 0.0;
  for (const auto& rho : reduced_blocks(st, region.sites)) acc += rho.squaredNorm();
  return acc / st.norm();
}

std::size_t bell_index(const BellConfig& cfg) {
  const std::size_t n = cfg.size();
  if (n > static_cast<std::size_t>(max_bell_sites)) throw InvalidSize("too many sites for a Bell index");
  const std::size_t z = cfg.rz().words().empty() ? 0 : cfg.rz().words()[0];
  const std::size_t x = cfg.rx().words().empty() ? 0 : cfg.rx().words()[0];
  return z | (x << n);
}

std::vector<double> bell_distribution(const DenseState& st, Resolution resolution) {
  const int n = st.n_sites;
  if (n > max_bell_sites) throw InvalidSize("Bell distribution limited to " + std::to_string(max_bell_sites) + " sites");
  const std::size_t dim = std::size_t{1} << n;
  std::vector<Eigen::MatrixXd> rhos;
  double norm = 0.0;
  if (resolution == Resolution::sectors) {
    for (const auto& sec : st.sectors) rhos.push_back(block_density(st, sec));
    norm = st.norm();
  } else {
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(dim, dim);
    double z = 0.0;
    for (const auto& sec : st.sectors) {
      rho += block_density(st, sec);
      z += sec.partition();
    }
    rhos.push_back(std::move(rho));
    norm = z * z;
  }
  std::vector<double> frame_p(dim * dim, 0.0), c(dim);
  for (const auto& rho : rhos) {
    for (std::size_t x = 0; x < dim; ++x) {
      for (std::size_t d = 0; d < dim; ++d) {
        double acc = 0.0;
        for (std::size_t i = 0; i < dim; ++i) acc += rho(i, i ^ d) * rho(i ^ d ^ x, i ^ x);
        c[d] = acc;
      }
      walsh_hadamard(c);
      for (std::size_t z = 0; z < dim; ++z) frame_p[z | (x << n)] += c[z];
    }
  }
  std::vector<double> p(dim * dim);
  const double scale = 1.0 / (static_cast<double>(dim) * norm);
  for (std::size_t z = 0; z < dim; ++z)
    for (std::size_t x = 0; x < dim; ++x) {
      const std::size_t engine = st.x_frame ? (x | (z << n)) : (z | (x << n));
      p[engine] = frame_p[z | (x << n)] * scale;
    }
  return p;
}

std::vector<double> thermal_bell_distribution(const ModelSpec& model, double beta, Resolution resolution) {
  return bell_distribution(thermal_state(model, beta), resolution);
}

std::vector<double> pauli_weight_spectrum(const DenseState& st, const Region& region) {
  check_region(st, region);
  const int na = static_cast<int>(region.size());
  if (na > max_pauli_region) throw InvalidSize("region too large for the Pauli sum");
  std::vector<int> rest;
  for (int i = 0; i < st.n_sites; ++i)
    if (std::find(region.sites.begin(), region.sites.end(), i) == region.sites.end()) rest.push_back(i);
  const std::size_t da = std::size_t{1} << na, dr = std::size_t{1} << rest.size();
  // The two replicas see Tr(P rho_a P rho_a) = sum_nm w_n w_m <m|P|n>^2, and
  // <m|P|n> = Tr(P M_n M_m^T) with M the A x rest reshaping of a level.
  std::vector<double> q(na + 1, 0.0), f(da);
  for (const auto& sec : st.sectors) {
    const Eigen::Index levels = sec.vectors.cols();
    if (levels == 0) continue;
    const double wmax = sec.weights.maxCoeff();
    std::vector<Eigen::MatrixXd> m(levels, Eigen::MatrixXd::Zero(da, dr));
    for (std::size_t k = 0; k < sec.basis.size(); ++k) {
      const auto ia = gather(sec.basis[k], region.sites), ir = gather(sec.basis[k], rest);
      for (Eigen::Index n = 0; n < levels; ++n) m[n](ia, ir) = sec.vectors(k, n);
    }
    for (Eigen::Index n = 0; n < levels; ++n)
      for (Eigen::Index l = n; l < levels; ++l) {
        const double w = sec.weights[n] * sec.weights[l] * (l == n ? 1.0 : 2.0);
        if (w < 1e-16 * wmax * wmax) continue;
        const Eigen::MatrixXd c = m[n] * m[l].transpose();
        for (std::size_t x = 0; x < da; ++x) {
          for (std::size_t j = 0; j < da; ++j) f[j] = c(j, j ^ x);
          walsh_hadamard(f);
          for (std::size_t z = 0; z < da; ++z) q[std::popcount(z | x)] += w * f[z] * f[z];
        }
      }
  }
  const double q0 = q[0];
  for (auto& v : q) v /= q0;
  return q;
}

double exact_q_lambda(const DenseState& st, const Region& region, double lambda) {
  const auto q = pauli_weight_spectrum(st, region);
  double acc = 0.0;
  for (std::size_t w = q.size(); w-- > 0;) acc = acc * lambda + q[w];
  return acc;
}

double exact_q_lambda_subsets(const DenseState& st, const Region& region, double lambda) {
  check_region(st, region);
  const int na = static_cast<int>(region.size());
  if (na > max_pauli_region) throw InvalidSize("region too large for the subset sum");
  // Summing Tr(P rho P rho) over all strings on B leaves 2^{N_B} times the
  // purity of the complement of B (the purity of B itself for a pure state).
  // The empty subset gives the normalization sum_a Tr rho_a^2.
  double acc = 0.0, empty = 0.0;
  for (std::uint32_t subset = 0; subset < (1u << na); ++subset) {
    std::vector<int> in_b, outside;
    for (int k = 0; k < na; ++k)
      if (subset >> k & 1) in_b.push_back(region.sites[k]);
    for (int i = 0; i < st.n_sites; ++i)
      if (std::find(in_b.begin(), in_b.end(), i) == in_b.end()) outside.push_back(i);
    const auto& kept = st.kind == StateKind::pure && in_b.size() < outside.size() ? in_b : outside;
    double purity = 0.0;
    for (const auto& rho : reduced_blocks(st, kept)) purity += rho.squaredNorm();
    const int nb = static_cast<int>(in_b.size());
    if (subset == 0) empty = purity;
    acc += std::pow(lambda, nb) * std::pow(1.0 - lambda, na - nb) * std::ldexp(purity, nb);
  }
  return acc / empty;
}

double exact_dlogq(const DenseState& st, const Region& region, double lambda) {
  const auto q = pauli_weight_spectrum(st, region);
  double value = 0.0, slope = 0.0;
  for (std::size_t w = q.size(); w-- > 0;) {
    slope = slope * lambda + value;
    value = value * lambda + q[w];
  }
  return slope / value;
}

}  // namespace bellqmc::ed
