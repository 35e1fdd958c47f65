#include "bellqmc/bell.hpp"

#include "bellqmc/errors.hpp"

namespace bellqmc {

namespace {

void check_index(const BellConfig& cfg, int i) {
  if (i < 0 || static_cast<std::size_t>(i) >= cfg.size())
    throw IndexError("site " + std::to_string(i) + " outside [0, " + std::to_string(cfg.size()) +
                     ")");
}

}  // namespace

void BitVector::flip_all() {
  for (auto& w : words_) w = ~w;
  if (n_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;
}

void BitVector::clear() {
  for (auto& w : words_) w = 0;
}

bool BitVector::any() const {
  for (auto w : words_)
    if (w) return true;
  return false;
}

int BitVector::popcount() const {
  int c = 0;
  for (auto w : words_) c += std::popcount(w);
  return c;
}

std::string BellConfig::to_string() const {
  std::string out;
  out.reserve(2 * size());
  for (std::size_t i = 0; i < size(); ++i) {
    out.push_back(rz_.get(i) ? '1' : '0');
    out.push_back(rx_.get(i) ? '1' : '0');
  }
  return out;
}

BellConfig BellConfig::from_string(std::string_view text) {
  if (text.size() % 2 != 0) throw Error("Bell config text must have two characters per site");
  BellConfig cfg(text.size() / 2);
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const char a = text[2 * i], b = text[2 * i + 1];
    if ((a != '0' && a != '1') || (b != '0' && b != '1'))
      throw Error("Bell config text must only contain 0 and 1");
    cfg.rz_.set(i, a == '1');
    cfg.rx_.set(i, b == '1');
  }
  return cfg;
}

PauliString PauliString::parse(std::string_view ops) {
  PauliString p(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) p.set_op(i, ops[i]);
  return p;
}

PauliString PauliString::from_terms(std::size_t n, std::span<const std::pair<int, char>> terms) {
  PauliString p(n);
  for (const auto& [site, op] : terms) {
    if (site < 0 || static_cast<std::size_t>(site) >= n)
      throw IndexError("Pauli term on site " + std::to_string(site) + " out of range");
    p.set_op(site, op);
  }
  return p;
}

PauliString PauliString::x_string(std::size_t n, std::span<const int> sites) {
  PauliString p(n);
  for (int s : sites) p.set_op(s, 'X');
  return p;
}

PauliString PauliString::z_string(std::size_t n, std::span<const int> sites) {
  PauliString p(n);
  for (int s : sites) p.set_op(s, 'Z');
  return p;
}

char PauliString::op(std::size_t i) const {
  static constexpr char table[2][2] = {{'I', 'X'}, {'Z', 'Y'}};
  return table[sz_.get(i)][sx_.get(i)];
}

void PauliString::set_op(std::size_t i, char op) {
  if (i >= size()) throw IndexError("Pauli site out of range");
  switch (op) {
    case 'I': sz_.set(i, false); sx_.set(i, false); break;
    case 'X': sz_.set(i, false); sx_.set(i, true); break;
    case 'Z': sz_.set(i, true); sx_.set(i, false); break;
    case 'Y': sz_.set(i, true); sx_.set(i, true); break;
    default: throw Error(std::string("unknown Pauli letter '") + op + "'");
  }
}

int PauliString::weight() const {
  int w = 0;
  auto z = sz_.words();
  auto x = sx_.words();
  for (std::size_t k = 0; k < z.size(); ++k) w += std::popcount(z[k] | x[k]);
  return w;
}

std::string PauliString::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(op(i));
  return out;
}

SiteMask::SiteMask(std::size_t n, std::span<const int> sites) : bits_(n) {
  for (int s : sites) {
    if (s < 0 || static_cast<std::size_t>(s) >= n) throw IndexError("mask site out of range");
    if (!bits_.get(s)) ++count_;
    bits_.set(s, true);
  }
}

bool try_apply_site_x(BellConfig& cfg, int i) {
  check_index(cfg, i);
  if (cfg.rz().get(i)) return false;
  cfg.rx().flip(i);
  return true;
}

bool try_apply_bond_zz(BellConfig& cfg, int i, int j) {
  check_index(cfg, i);
  check_index(cfg, j);
  if (i == j) throw IndexError("bond needs two distinct sites");
  if (cfg.rx().get(i) != cfg.rx().get(j)) return false;
  cfg.rz().flip(i);
  cfg.rz().flip(j);
  return true;
}

bool try_apply_plaquette_x(BellConfig& cfg, const std::array<int, 4>& links) {
  bool parity = false;
  for (std::size_t a = 0; a < 4; ++a) {
    check_index(cfg, links[a]);
    for (std::size_t b = 0; b < a; ++b)
      if (links[a] == links[b]) throw IndexError("plaquette links must be distinct");
    parity ^= cfg.rz().get(links[a]);
  }
  if (parity) return false;
  for (int l : links) cfg.rx().flip(l);
  return true;
}

bool try_apply_site_z(BellConfig& cfg, int i) {
  check_index(cfg, i);
  if (cfg.rx().get(i)) return false;
  cfg.rz().flip(i);
  return true;
}

int pauli_sign(const BellConfig& cfg, const PauliString& s) {
  if (cfg.size() != s.size())
    throw InvalidSize("pauli_sign: string has " + std::to_string(s.size()) + " sites, config has " +
                std::to_string(cfg.size()));
  // Subtraction and addition agree mod 2.
  const bool odd = and_parity(s.sx().words(), cfg.rz().words()) ^
                   and_parity(s.sz().words(), cfg.rx().words());
  return odd ? -1 : 1;
}

int swap_sign(const BellConfig& cfg, const Region& region) {
  bool odd = false;
  for (int s : region.sites) {
    if (s < 0 || static_cast<std::size_t>(s) >= cfg.size()) throw IndexError("region site out of range");
    odd ^= cfg.rz().get(s) && cfg.rx().get(s);
  }
  return odd ? -1 : 1;
}

int swap_sign(const BellConfig& cfg, const SiteMask& mask) {
  return and_parity(cfg.rz().words(), cfg.rx().words(), mask.bits().words()) ? -1 : 1;
}

bool parity_z(const BellConfig& cfg) { return cfg.rz().parity(); }

int weight_in(const BellConfig& cfg, const SiteMask& mask) {
  auto z = cfg.rz().words();
  auto x = cfg.rx().words();
  auto m = mask.bits().words();
  int w = 0;
  for (std::size_t k = 0; k < z.size(); ++k) w += std::popcount((z[k] | x[k]) & m[k]);
  return w;
}

}  // namespace bellqmc
