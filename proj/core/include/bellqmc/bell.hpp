#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bellqmc/lattice.hpp"

namespace bellqmc {

/// Fixed-length packed bit vector. Bit i lives in word i / 64 at position
/// i % 64 (least significant first); unused high bits of the last word are 0.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }
  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v) {
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= m;
    else
      words_[i >> 6] &= ~m;
  }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
  void flip_all();
  void clear();
  bool any() const;
  int popcount() const;
  bool parity() const { return popcount() & 1; }

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Parity of popcount(a & b & c) over packed words of equal length.
inline bool and_parity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  std::uint64_t acc = 0;
  for (std::size_t w = 0; w < a.size(); ++w) acc ^= a[w] & b[w];
  return std::popcount(acc) & 1;
}

inline bool and_parity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                       std::span<const std::uint64_t> c) {
  std::uint64_t acc = 0;
  for (std::size_t w = 0; w < a.size(); ++w) acc ^= a[w] & b[w] & c[w];
  return std::popcount(acc) & 1;
}

/// Which half of a Bell label (r^z or r^x).
enum class Channel : std::uint8_t { z, x };

inline Channel other(Channel c) { return c == Channel::z ? Channel::x : Channel::z; }

/// Sampled Bell state |r^z, r^x>, identified with the unsigned Pauli string
/// sigma_r = prod_i sigma_{r^z_i r^x_i}, sigma_00 = I, sigma_01 = X,
/// sigma_10 = Z, sigma_11 = iY.
class BellConfig {
 public:
  BellConfig() = default;
  explicit BellConfig(std::size_t n) : rz_(n), rx_(n) {}

  std::size_t size() const { return rz_.size(); }
  const BitVector& rz() const { return rz_; }
  const BitVector& rx() const { return rx_; }
  BitVector& rz() { return rz_; }
  BitVector& rx() { return rx_; }
  const BitVector& bits(Channel c) const { return c == Channel::z ? rz_ : rx_; }
  BitVector& bits(Channel c) { return c == Channel::z ? rz_ : rx_; }

  /// Two characters per site, "<rz><rx>", e.g. "0010" for |0,0>|1,0>.
  std::string to_string() const;
  static BellConfig from_string(std::string_view text);

  friend bool operator==(const BellConfig&, const BellConfig&) = default;

 private:
  BitVector rz_;
  BitVector rx_;
};

/// Unsigned Pauli string with the same (s^z, s^x) labelling as BellConfig.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::size_t n) : sz_(n), sx_(n) {}

  /// One character per site from "IXYZ".
  static PauliString parse(std::string_view ops);
  /// Sparse form, e.g. {{0, 'X'}, {1, 'X'}}.
  static PauliString from_terms(std::size_t n, std::span<const std::pair<int, char>> terms);
  static PauliString x_string(std::size_t n, std::span<const int> sites);
  static PauliString z_string(std::size_t n, std::span<const int> sites);

  std::size_t size() const { return sz_.size(); }
  const BitVector& sz() const { return sz_; }
  const BitVector& sx() const { return sx_; }
  BitVector& sz() { return sz_; }
  BitVector& sx() { return sx_; }
  char op(std::size_t i) const;
  void set_op(std::size_t i, char op);
  int weight() const;
  std::string to_string() const;

 private:
  BitVector sz_;
  BitVector sx_;
};

/// Precomputed packed membership mask of a region.
class SiteMask {
 public:
  SiteMask() = default;
  SiteMask(std::size_t n, std::span<const int> sites);
  SiteMask(std::size_t n, const Region& region) : SiteMask(n, region.sites) {}
  const BitVector& bits() const { return bits_; }
  std::size_t count() const { return count_; }

 private:
  BitVector bits_;
  std::size_t count_ = 0;
};

// Two-copy operator actions. Each returns whether the matrix element is
// nonzero; on success the configuration is updated, otherwise it is left
// untouched. Indices are checked and IndexError is thrown when out of range.

/// X-type single-site term: <r| X_i |r'> = delta(r^z_i, 0), flips r^x_i.
bool try_apply_site_x(BellConfig& cfg, int i);
/// ZZ bond term: delta(r^x_i xor r^x_j, 0), flips r^z_i and r^z_j.
bool try_apply_bond_zz(BellConfig& cfg, int i, int j);
/// Plaquette X term: delta(xor of r^z over the links, 0), flips r^x on all links.
bool try_apply_plaquette_x(BellConfig& cfg, const std::array<int, 4>& links);
/// Z-type single-site term: delta(r^x_i, 0), flips r^z_i.
bool try_apply_site_z(BellConfig& cfg, int i);

/// prod_i (-1)^(s^x_i r^z_i - s^z_i r^x_i): Bell-basis eigenvalue of
/// sigma_s (x) sigma_s.
int pauli_sign(const BellConfig& cfg, const PauliString& s);

/// prod_{i in A} (-1)^(r^x_i r^z_i): eigenvalue of the swap on A.
int swap_sign(const BellConfig& cfg, const Region& region);
int swap_sign(const BellConfig& cfg, const SiteMask& mask);

/// xor of all r^z bits.
bool parity_z(const BellConfig& cfg);

/// Number of sites in the mask whose Bell label is not |0,0>.
int weight_in(const BellConfig& cfg, const SiteMask& mask);

}  // namespace bellqmc
