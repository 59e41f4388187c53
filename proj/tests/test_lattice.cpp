#include <gtest/gtest.h>

#include <set>

#include "mtsr/lattice.hpp"
#include "oracles.hpp"

using namespace mtsr;

TEST(Lattice, SiteIndexing) {
  Lattice lat({4});
  EXPECT_EQ(lat.sites(), 52);
  EXPECT_EQ(Lattice::site(3, 2), 29);
  EXPECT_EQ(Lattice::column(29), 3);
  EXPECT_EQ(Lattice::row(29), 2);
}

TEST(Lattice, RejectsEmptyLength) { EXPECT_THROW(Lattice({0}), std::invalid_argument); }

TEST(Lattice, SingleRowHasOnlyRingNeighbors) {
  Lattice lat({1});
  for (int s = 0; s < lat.sites(); ++s) {
    const auto nb = lat.neighbors(s);
    ASSERT_EQ(nb.size(), 2u);
    EXPECT_EQ(nb[0].dir, Direction::LowerEast);
    EXPECT_EQ(nb[1].dir, Direction::UpperWest);
    EXPECT_EQ(nb[0].site, (s + 1) % 13);
    EXPECT_EQ(nb[1].site, (s + 12) % 13);
  }
}

TEST(Lattice, InteriorSitesHaveSixDistinctNeighbors) {
  Lattice lat({6});
  for (int s = 13; s < lat.sites() - 13; ++s) {
    const auto nb = lat.neighbors(s);
    ASSERT_EQ(nb.size(), 6u);
    std::set<int> distinct;
    for (const auto& n : nb) distinct.insert(n.site);
    EXPECT_EQ(distinct.size(), 6u);
    EXPECT_EQ(distinct.count(s), 0u);
  }
}

TEST(Lattice, EndRowsHaveFourNeighbors) {
  Lattice lat({5});
  for (int c = 0; c < 13; ++c) {
    EXPECT_EQ(lat.neighbors(Lattice::site(c, 0)).size(), 4u);
    EXPECT_EQ(lat.neighbors(Lattice::site(c, 4)).size(), 4u);
  }
  // north and upper-east bonds stop at the open ends, lower-east bonds stay in a row
  EXPECT_EQ(lat.edge_count(), static_cast<std::size_t>(13 * 4 + 13 * 5 + 13 * 4));
}

TEST(Lattice, AdjacencyIsSymmetricWithOppositeDirections) {
  Lattice lat({7});
  for (int s = 0; s < lat.sites(); ++s) {
    for (const auto& n : lat.neighbors(s)) {
      EXPECT_EQ(lat.neighbor(n.site, opposite(n.dir)), s);
    }
  }
}

TEST(Lattice, MatchesIndependentNeighborFormula) {
  for (int L : {1, 2, 3, 9}) {
    Lattice lat({L});
    for (int s = 0; s < lat.sites(); ++s)
      for (Direction d : kAllDirections) EXPECT_EQ(lat.neighbor(s, d), oracle::neighbor(s, d, L));
  }
}

TEST(Lattice, WrapsAroundTheSeam) {
  Lattice lat({3});
  EXPECT_EQ(lat.neighbor(Lattice::site(12, 1), Direction::LowerEast), Lattice::site(0, 1));
  EXPECT_EQ(lat.neighbor(Lattice::site(12, 1), Direction::UpperEast), Lattice::site(0, 2));
  EXPECT_EQ(lat.neighbor(Lattice::site(0, 1), Direction::LowerWest), Lattice::site(12, 0));
  EXPECT_EQ(lat.neighbor(Lattice::site(0, 1), Direction::UpperWest), Lattice::site(12, 1));
}

TEST(Couplings, NorthMatrixFromDistances) {
  const auto t = compute_coupling_table(GeometryParams{});
  const auto& n = t[Direction::North];
  EXPECT_NEAR(n[0][0], 1.0 / 8.0, 1e-15);
  EXPECT_NEAR(n[0][1], 1.0 / 4.0, 1e-15);
  EXPECT_NEAR(n[1][0], 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(n[1][1], 1.0 / 8.0, 1e-15);
}

TEST(Couplings, OppositeDirectionsAreTransposes) {
  const auto t = compute_coupling_table(GeometryParams{});
  EXPECT_TRUE(t.opposite_symmetric(1e-15));
  const auto u = coupling_table_from(t[Direction::North], t[Direction::UpperEast], t[Direction::LowerEast]);
  for (Direction d : kAllDirections)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) EXPECT_NEAR(u[d][a][b], t[d][a][b], 1e-15);
}

TEST(Couplings, IsingConstantsOfDefaultGeometry) {
  const auto s = spin_couplings(compute_coupling_table(GeometryParams{}), 0.1);
  EXPECT_NEAR(s[Direction::North], 0.0833, 0.0833 * 0.03);
  EXPECT_NEAR(s[Direction::South], 0.0833, 0.0833 * 0.03);
  EXPECT_NEAR(s[Direction::UpperEast], 0.0091, 0.0091 * 0.03);
  EXPECT_NEAR(s[Direction::LowerWest], 0.0091, 0.0091 * 0.03);
  EXPECT_NEAR(s[Direction::LowerEast], -0.0280, 0.0280 * 0.03);
  EXPECT_NEAR(s[Direction::UpperWest], -0.0280, 0.0280 * 0.03);
  EXPECT_NEAR(s.b_z, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.b_x, 0.2);
  EXPECT_EQ(s.b_y, 0.0);
}

TEST(Couplings, DeltaVRatio) {
  const auto t = compute_coupling_table(GeometryParams{});
  EXPECT_NEAR(delta_v_ratio(t), 0.19, 0.02);
  EXPECT_EQ(delta_v_ratio(symmetrize(t)), 0.0);
}

TEST(Couplings, ExplicitTableBypassesGeometry) {
  Matrix2 m{{{0.2, 0.3}, {0.1, 0.2}}};
  const auto t = coupling_table_from(m, m, m);
  EXPECT_EQ(t.at(Direction::South, Position::Alpha, Position::Beta), 0.1);
  EXPECT_THROW(coupling_table_from(Matrix2{{{0.0, 1.0}, {1.0, 1.0}}}, m, m), std::invalid_argument);
}

TEST(Couplings, GeometryValidation) {
  GeometryParams g;
  g.separation = 9.0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = GeometryParams{};
  g.pitch_up = 6.0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = GeometryParams{};
  g.a_trans = -1.0;
  EXPECT_THROW(compute_coupling_table(g), std::invalid_argument);
}

TEST(Couplings, BulkMeanFieldIsPositionIndependent) {
  const auto t = compute_coupling_table(GeometryParams{});
  EXPECT_NEAR(bulk_mean_field(t, Position::Alpha), bulk_mean_field(t, Position::Beta), 1e-14);
  Lattice lat({3});
  const int mid = Lattice::site(5, 1);
  EXPECT_NEAR(site_mean_field(t, lat, mid, Position::Alpha), bulk_mean_field(t, Position::Alpha), 1e-14);
  // the open ends lose neighbors and the two positions no longer agree
  EXPECT_GT(std::abs(site_mean_field(t, lat, 0, Position::Alpha) - site_mean_field(t, lat, 0, Position::Beta)),
            1e-3);
}
