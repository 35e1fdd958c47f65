#pragma once

#include <array>
#include <string>
#include <vector>

namespace bellqmc {

enum class Boundary { open, periodic };
enum class Geometry { chain, torus_links };

/// Sites, bonds, plaquettes and vertex stars of a lattice. Immutable once built.
///
/// Torus link indexing: the unit cell at (x, y) owns two links, the horizontal
/// link 2*(y*L + x) joining vertex (x, y) to (x+1, y) and the vertical link
/// 2*(y*L + x) + 1 joining (x, y) to (x, y+1). Cells are row-major.
struct Lattice {
  Geometry geometry = Geometry::chain;
  Boundary boundary = Boundary::open;
  int linear_size = 0;
  int n_sites = 0;
  std::vector<std::array<int, 2>> bonds;
  std::vector<std::array<int, 4>> plaquettes;    // bottom, right, top, left
  std::vector<std::array<int, 4>> vertex_stars;  // right, left, up, down

  int horizontal_link(int x, int y) const;
  int vertical_link(int x, int y) const;
};

struct Region {
  std::vector<int> sites;  // sorted, unique
  std::string label;

  std::size_t size() const { return sites.size(); }
  bool empty() const { return sites.empty(); }
};

Lattice build_chain(int L, Boundary boundary);
Lattice build_torus_links(int L);

/// Validates indices against the lattice, sorts and deduplicates.
/// Throws IndexError for out-of-range sites and for duplicates.
Region make_region(const Lattice& lat, std::vector<int> sites, std::string label);

Region complement(const Lattice& lat, const Region& region);
Region region_union(const Region& a, const Region& b, std::string label);

/// Sites {L/2 - ell/2, ..., L/2 + ell/2 - 1} (0-based) of a chain.
Region mid_chain_region(const Lattice& lat, int ell);

/// Contiguous block [first, first + length) of a chain.
Region chain_block(const Lattice& lat, int first, int length, std::string label);

struct SquareRegion {
  Region interior;  // A
  Region boundary;  // dA, subset of A
};

/// Region made of the stars of an m x m block of vertices with lower-left
/// vertex (x0, y0). dA holds the links of A touching a vertex outside the
/// block, i.e. a vertex whose star is not contained in A. |dA| = 4m.
SquareRegion star_block_region(const Lattice& lat, int x0, int y0, int m);

/// L/2 x L/2 star block anchored at the origin; requires even L. |dA| = 2L.
SquareRegion square_region(const Lattice& lat, int L);

/// Links on the boundary of a w x h rectangle of plaquettes with lower-left
/// cell (x0, y0); perimeter 2(w + h).
Region wilson_loop(const Lattice& lat, int x0, int y0, int w, int h);

}  // namespace bellqmc
