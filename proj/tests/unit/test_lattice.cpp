#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "bellqmc/errors.hpp"
#include "bellqmc/lattice.hpp"

using namespace bellqmc;

TEST(Chain, OpenChainHasLMinusOneBonds) {
  const auto lat = build_chain(4, Boundary::open);
  EXPECT_EQ(lat.n_sites, 4);
  ASSERT_EQ(lat.bonds.size(), 3u);
  EXPECT_EQ(lat.bonds[2], (std::array<int, 2>{2, 3}));
}

TEST(Chain, PeriodicChainClosesTheRing) {
  const auto lat = build_chain(4, Boundary::periodic);
  ASSERT_EQ(lat.bonds.size(), 4u);
  EXPECT_EQ(lat.bonds.back(), (std::array<int, 2>{3, 0}));
}

TEST(Chain, RejectsTooSmall) {
  EXPECT_THROW(build_chain(1, Boundary::open), InvalidSize);
  EXPECT_THROW(build_chain(2, Boundary::periodic), InvalidSize);
  EXPECT_NO_THROW(build_chain(2, Boundary::open));
}

TEST(Torus, CountsForThreeByThree) {
  const auto lat = build_torus_links(3);
  EXPECT_EQ(lat.n_sites, 18);
  EXPECT_EQ(lat.plaquettes.size(), 9u);
  EXPECT_EQ(lat.vertex_stars.size(), 9u);
}

TEST(Torus, EveryLinkInTwoPlaquettesAndTwoStars) {
  for (int L : {2, 3, 4}) {
    const auto lat = build_torus_links(L);
    std::vector<int> in_plaq(lat.n_sites), in_star(lat.n_sites);
    for (const auto& p : lat.plaquettes) {
      EXPECT_EQ(std::set<int>(p.begin(), p.end()).size(), 4u);
      for (int l : p) ++in_plaq[l];
    }
    for (const auto& s : lat.vertex_stars)
      for (int l : s) ++in_star[l];
    for (int l = 0; l < lat.n_sites; ++l) {
      EXPECT_EQ(in_plaq[l], 2) << "L=" << L << " link " << l;
      EXPECT_EQ(in_star[l], 2) << "L=" << L << " link " << l;
    }
  }
}

TEST(Torus, PlaquettesAndStarsOverlapEvenly) {
  // X on a plaquette commutes with Z on a star iff they share an even number of links.
  const auto lat = build_torus_links(4);
  for (const auto& p : lat.plaquettes)
    for (const auto& s : lat.vertex_stars) {
      int shared = 0;
      for (int a : p) shared += std::count(s.begin(), s.end(), a);
      EXPECT_EQ(shared % 2, 0);
    }
}

TEST(Region, SortsAndValidates) {
  const auto lat = build_chain(6, Boundary::open);
  const auto r = make_region(lat, {4, 1, 2}, "A");
  EXPECT_EQ(r.sites, (std::vector<int>{1, 2, 4}));
  EXPECT_THROW(make_region(lat, {1, 1}, "dup"), IndexError);
  EXPECT_THROW(make_region(lat, {6}, "out"), IndexError);
  EXPECT_THROW(make_region(lat, {-1}, "neg"), IndexError);
}

TEST(Region, ComplementAndUnion) {
  const auto lat = build_chain(5, Boundary::open);
  const auto a = make_region(lat, {0, 3}, "a");
  EXPECT_EQ(complement(lat, a).sites, (std::vector<int>{1, 2, 4}));
  const auto b = make_region(lat, {3, 4}, "b");
  EXPECT_EQ(region_union(a, b, "ab").sites, (std::vector<int>{0, 3, 4}));
}

TEST(Region, MidChainIsCentred) {
  const auto lat = build_chain(12, Boundary::open);
  EXPECT_EQ(mid_chain_region(lat, 6).sites, (std::vector<int>{3, 4, 5, 6, 7, 8}));
  EXPECT_TRUE(mid_chain_region(lat, 0).empty());
  EXPECT_THROW(mid_chain_region(lat, 3), InvalidSize);
  EXPECT_THROW(mid_chain_region(build_torus_links(2), 2), UnsupportedGeometry);
}

TEST(Region, SquareRegionSizes) {
  for (int L : {2, 4, 6, 8}) {
    const auto lat = build_torus_links(L);
    const auto sq = square_region(lat, L);
    const int m = L / 2;
    EXPECT_EQ(sq.interior.size(), static_cast<std::size_t>(2 * m * m + 2 * m)) << L;
    EXPECT_EQ(sq.boundary.size(), static_cast<std::size_t>(2 * L)) << L;
    EXPECT_TRUE(std::includes(sq.interior.sites.begin(), sq.interior.sites.end(), sq.boundary.sites.begin(),
                              sq.boundary.sites.end()));
  }
  EXPECT_THROW(square_region(build_torus_links(3), 3), InvalidSize);
}

TEST(Region, StarBlockBoundaryLinksLeaveTheBlock) {
  // A link is on the boundary iff exactly one of its stars is in the block.
  const auto lat = build_torus_links(5);
  const auto blk = star_block_region(lat, 1, 2, 2);
  std::map<int, int> stars_in_block;
  for (int y = 2; y < 4; ++y)
    for (int x = 1; x < 3; ++x)
      for (int l : lat.vertex_stars[y * 5 + x]) ++stars_in_block[l];
  std::vector<int> expected;
  for (auto [l, c] : stars_in_block)
    if (c == 1) expected.push_back(l);
  EXPECT_EQ(blk.boundary.sites, expected);
  EXPECT_EQ(blk.interior.size(), stars_in_block.size());
}

TEST(WilsonLoop, IsTheBoundaryOfItsPlaquettes) {
  const auto lat = build_torus_links(5);
  for (auto [w, h] : {std::pair{1, 1}, {2, 1}, {2, 3}, {3, 3}}) {
    const auto loop = wilson_loop(lat, 1, 0, w, h);
    EXPECT_EQ(loop.size(), static_cast<std::size_t>(2 * (w + h)));
    std::map<int, int> count;
    for (int y = 0; y < h; ++y)
      for (int x = 1; x < 1 + w; ++x)
        for (int l : lat.plaquettes[y * 5 + x]) ++count[l];
    std::vector<int> odd;
    for (auto [l, c] : count)
      if (c % 2) odd.push_back(l);
    EXPECT_EQ(loop.sites, odd);
  }
  EXPECT_THROW(wilson_loop(lat, 0, 0, 5, 1), InvalidSize);
}
