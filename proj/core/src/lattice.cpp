#include "bellqmc/lattice.hpp"

#include <algorithm>
#include <set>

#include "bellqmc/errors.hpp"

namespace bellqmc {

namespace {

int wrap(int v, int L) { return ((v % L) + L) % L; }

void require_torus(const Lattice& lat, const char* what) {
  if (lat.geometry != Geometry::torus_links)
    throw UnsupportedGeometry(std::string(what) + " requires the torus_links geometry");
}

}  // namespace

int Lattice::horizontal_link(int x, int y) const {
  const int L = linear_size;
  return 2 * (wrap(y, L) * L + wrap(x, L));
}

int Lattice::vertical_link(int x, int y) const { return horizontal_link(x, y) + 1; }

Lattice build_chain(int L, Boundary boundary) {
  if (L < 2) throw InvalidSize("chain length must be >= 2, got " + std::to_string(L));
  if (boundary == Boundary::periodic && L < 3)
    throw InvalidSize("a periodic chain needs L >= 3 to have distinct bonds");
  Lattice lat;
  lat.geometry = Geometry::chain;
  lat.boundary = boundary;
  lat.linear_size = L;
  lat.n_sites = L;
  for (int i = 0; i + 1 < L; ++i) lat.bonds.push_back({i, i + 1});
  if (boundary == Boundary::periodic) lat.bonds.push_back({L - 1, 0});
  return lat;
}

Lattice build_torus_links(int L) {
  if (L < 2) throw InvalidSize("torus size must be >= 2, got " + std::to_string(L));
  Lattice lat;
  lat.geometry = Geometry::torus_links;
  lat.boundary = Boundary::periodic;
  lat.linear_size = L;
  lat.n_sites = 2 * L * L;
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) {
      lat.plaquettes.push_back({lat.horizontal_link(x, y), lat.vertical_link(x + 1, y),
                                lat.horizontal_link(x, y + 1), lat.vertical_link(x, y)});
      lat.vertex_stars.push_back({lat.horizontal_link(x, y), lat.horizontal_link(x - 1, y),
                                  lat.vertical_link(x, y), lat.vertical_link(x, y - 1)});
    }
  }
  return lat;
}

Region make_region(const Lattice& lat, std::vector<int> sites, std::string label) {
  for (int s : sites)
    if (s < 0 || s >= lat.n_sites)
      throw IndexError("region site " + std::to_string(s) + " outside [0, " +
                       std::to_string(lat.n_sites) + ")");
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end())
    throw IndexError("region '" + label + "' has duplicate sites");
  return Region{std::move(sites), std::move(label)};
}

Region complement(const Lattice& lat, const Region& region) {
  std::vector<int> out;
  std::size_t k = 0;
  for (int s = 0; s < lat.n_sites; ++s) {
    if (k < region.sites.size() && region.sites[k] == s) {
      ++k;
      continue;
    }
    out.push_back(s);
  }
  return Region{std::move(out), region.label + "^c"};
}

Region region_union(const Region& a, const Region& b, std::string label) {
  std::vector<int> out;
  std::set_union(a.sites.begin(), a.sites.end(), b.sites.begin(), b.sites.end(),
                 std::back_inserter(out));
  return Region{std::move(out), std::move(label)};
}

Region mid_chain_region(const Lattice& lat, int ell) {
  if (lat.geometry != Geometry::chain) throw UnsupportedGeometry("mid_chain_region needs a chain");
  const int L = lat.n_sites;
  if (ell < 0 || ell > L || ell % 2 != 0)
    throw InvalidSize("mid-chain region size must be even and <= L, got " + std::to_string(ell));
  return chain_block(lat, L / 2 - ell / 2, ell, "mid" + std::to_string(ell));
}

Region chain_block(const Lattice& lat, int first, int length, std::string label) {
  std::vector<int> sites;
  for (int i = 0; i < length; ++i) sites.push_back(first + i);
  return make_region(lat, std::move(sites), std::move(label));
}

SquareRegion star_block_region(const Lattice& lat, int x0, int y0, int m) {
  require_torus(lat, "star_block_region");
  const int L = lat.linear_size;
  if (m < 1 || m >= L) throw InvalidSize("star block size must be in [1, L)");
  auto inside = [&](int x, int y) {
    const int dx = wrap(x - x0, L), dy = wrap(y - y0, L);
    return dx < m && dy < m;
  };
  std::set<int> interior, boundary;
  for (int dy = 0; dy < m; ++dy) {
    for (int dx = 0; dx < m; ++dx) {
      const int x = x0 + dx, y = y0 + dy;
      // link and the vertex at its far end
      const std::array<std::pair<int, std::array<int, 2>>, 4> star = {{
          {lat.horizontal_link(x, y), {x + 1, y}},
          {lat.horizontal_link(x - 1, y), {x - 1, y}},
          {lat.vertical_link(x, y), {x, y + 1}},
          {lat.vertical_link(x, y - 1), {x, y - 1}},
      }};
      for (const auto& [link, far] : star) {
        interior.insert(link);
        if (!inside(far[0], far[1])) boundary.insert(link);
      }
    }
  }
  const std::string tag = "block" + std::to_string(m) + "@" + std::to_string(wrap(x0, L)) + "," +
                          std::to_string(wrap(y0, L));
  return SquareRegion{Region{{interior.begin(), interior.end()}, tag},
                      Region{{boundary.begin(), boundary.end()}, tag + ":boundary"}};
}

SquareRegion square_region(const Lattice& lat, int L) {
  require_torus(lat, "square_region");
  if (L != lat.linear_size) throw InvalidSize("square_region: L does not match the lattice");
  if (L % 2 != 0) throw InvalidSize("square_region needs an even linear size");
  return star_block_region(lat, 0, 0, L / 2);
}

Region wilson_loop(const Lattice& lat, int x0, int y0, int w, int h) {
  require_torus(lat, "wilson_loop");
  const int L = lat.linear_size;
  if (w < 1 || h < 1 || w >= L || h >= L) throw InvalidSize("wilson loop must fit in the torus");
  std::vector<int> links;
  for (int dx = 0; dx < w; ++dx) {
    links.push_back(lat.horizontal_link(x0 + dx, y0));
    links.push_back(lat.horizontal_link(x0 + dx, y0 + h));
  }
  for (int dy = 0; dy < h; ++dy) {
    links.push_back(lat.vertical_link(x0, y0 + dy));
    links.push_back(lat.vertical_link(x0 + w, y0 + dy));
  }
  return make_region(lat, std::move(links),
                     "W" + std::to_string(w) + "x" + std::to_string(h) + "@" +
                         std::to_string(wrap(x0, L)) + "," + std::to_string(wrap(y0, L)));
}

}  // namespace bellqmc
