#include "xxz/sym_space.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "xxz/combinatorics.hpp"
#include "xxz/graph.hpp"

namespace xxz {
namespace {

BaseGraph path(int L) { return build_lattice_window("path", {L}); }

TEST(Combinatorics, BinomialExactAndOverflow) {
  EXPECT_EQ(binomial(0, 0), 1u);
  EXPECT_EQ(binomial(4, 2), 6u);
  EXPECT_EQ(binomial(40, 4), 91390u);
  EXPECT_EQ(binomial(52, 5), 2598960u);
  EXPECT_EQ(binomial(5, 7), 0u);
  EXPECT_THROW(binomial(500, 250), std::overflow_error);

  BinomialTable table(10, 4);
  EXPECT_EQ(table(10, 4), 210u);
  EXPECT_EQ(table(3, 0), 1u);
  EXPECT_EQ(table(2, 3), 0u);   // j > k_max handled as zero
  EXPECT_EQ(table(-1, 1), 0u);  // negative v
  EXPECT_THROW(table(11, 2), std::out_of_range);
}

TEST(Combinatorics, ColexRankUnrank) {
  BinomialTable binom(8, 3);
  // n=4, N=2 colex order: {0,1},{0,2},{1,2},{0,3},{1,3},{2,3}
  EXPECT_EQ(colex_rank({0, 1}, binom), 0u);
  EXPECT_EQ(colex_rank({0, 2}, binom), 1u);
  EXPECT_EQ(colex_rank({1, 2}, binom), 2u);
  EXPECT_EQ(colex_rank({2, 3}, binom), 5u);
  EXPECT_EQ(colex_unrank(5, 4, 2, binom), (Configuration{2, 3}));

  // Full round trip over C(8,3) = 56.
  Configuration x{0, 1, 2};
  std::uint64_t r = 0;
  do {
    EXPECT_EQ(colex_rank(x, binom), r);
    EXPECT_EQ(colex_unrank(r, 8, 3, binom), x);
    ++r;
  } while (next_configuration(x, 8));
  EXPECT_EQ(r, 56u);
}

TEST(Combinatorics, NextConfigurationOrder) {
  Configuration x{0, 1};
  std::vector<Configuration> seen{x};
  while (next_configuration(x, 4)) seen.push_back(x);
  std::vector<Configuration> want{{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}};
  EXPECT_EQ(seen, want);
}

TEST(Combinatorics, ValidateConfiguration) {
  EXPECT_NO_THROW(validate_configuration({0, 2, 5}, 6));
  EXPECT_THROW(validate_configuration({0, 2, 6}, 6), std::invalid_argument);
  EXPECT_THROW(validate_configuration({-1, 2}, 6), std::invalid_argument);
  EXPECT_THROW(validate_configuration({2, 2}, 6), std::invalid_argument);
  EXPECT_THROW(validate_configuration({3, 2}, 6), std::invalid_argument);
}

TEST(SymSpace, IndexConfigRoundTrip) {
  SymSpace space(path(4), 2);
  EXPECT_EQ(space.dimension(), 6u);
  for (std::uint64_t r = 0; r < space.dimension(); ++r)
    EXPECT_EQ(space.index(space.config(r)), r);
  EXPECT_EQ(space.index({0, 1}), 0u);
  EXPECT_EQ(space.config(5), (Configuration{2, 3}));
  EXPECT_THROW(space.index({0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(space.config(6), std::out_of_range);
}

TEST(SymSpace, NeighborsOrderedAndSorted) {
  SymSpace space(path(4), 2);
  std::vector<Configuration> nb = space.neighbors({1, 2});
  std::vector<Configuration> want{{0, 2}, {1, 3}};
  EXPECT_EQ(nb, want);

  // Neighbors of the packed block {0,1}: only the trailing particle moves.
  EXPECT_EQ(space.neighbors({0, 1}), (std::vector<Configuration>{{0, 2}}));

  // Complete graph, all sites filled: no moves.
  BaseGraph k3(3, {{0, 1}, {1, 2}, {0, 2}});
  SymSpace full(k3, 3);
  EXPECT_EQ(full.dimension(), 1u);
  EXPECT_TRUE(full.neighbors({0, 1, 2}).empty());

  // Every emitted neighbor is a valid sorted configuration.
  SymSpace big(build_lattice_window("grid2d", {3, 3}), 3);
  for (std::uint64_t r = 0; r < big.dimension(); ++r)
    for (const Configuration& y : big.neighbors(big.config(r))) {
      EXPECT_NO_THROW(validate_configuration(y, 9));
      EXPECT_TRUE(std::is_sorted(y.begin(), y.end()));
    }
}

TEST(SymSpace, AdjacencyMatchesNeighbors) {
  SymSpace space(build_lattice_window("strip", {2, 3}), 2);
  const std::uint64_t dim = space.dimension();
  // Column r of A = indicator sums over neighbors of r (A is symmetric).
  for (std::uint64_t r = 0; r < dim; ++r) {
    std::vector<double> in(dim, 0.0), out(dim, 0.0);
    in[r] = 1.0;
    space.apply_adjacency(in.data(), out.data());
    std::vector<std::uint64_t> ranks;
    space.neighbor_ranks(space.config(r), ranks);
    std::vector<double> want(dim, 0.0);
    for (std::uint64_t q : ranks) want[q] = 1.0;
    EXPECT_EQ(out, want) << "column " << r;
  }
}

TEST(SymSpace, AdjacencyWorkerInvariance) {
  SymSpace space(path(7), 3);
  const std::uint64_t dim = space.dimension();
  std::vector<double> in(dim), out1(dim), out4(dim);
  for (std::uint64_t r = 0; r < dim; ++r)
    in[r] = std::sin(static_cast<double>(r) + 0.5);
  space.apply_adjacency(in.data(), out1.data(), 1);
  space.apply_adjacency(in.data(), out4.data(), 4);
  EXPECT_EQ(out1, out4);  // bitwise identical by construction
}

TEST(SymSpace, SurfaceValuesMatchConfigMeasures) {
  BaseGraph g = path(6);
  SymSpace space(g, 2);
  std::vector<int> win = space.surface_values(SurfaceMode::window());
  std::vector<int> bulk = space.surface_values(SurfaceMode::bulk(2));
  for (std::uint64_t r = 0; r < space.dimension(); ++r) {
    ConfigMeasures m = config_measures(g, space.config(r));
    EXPECT_EQ(win[r], m.surface);
    EXPECT_EQ(bulk[r], 2 * 2 - 2 * m.interaction);
  }
  // Window vs bulk disagree exactly on wall-touching configurations.
  EXPECT_EQ(win[space.index({0, 1})], 1);
  EXPECT_EQ(bulk[space.index({0, 1})], 2);
  EXPECT_EQ(win[space.index({2, 3})], 2);
  EXPECT_EQ(bulk[space.index({2, 3})], 2);

  std::vector<double> dbl = space.surface_vector(SurfaceMode::window());
  for (std::uint64_t r = 0; r < space.dimension(); ++r)
    EXPECT_DOUBLE_EQ(dbl[r], static_cast<double>(win[r]));
}

TEST(SymSpace, DistancesAndBfs) {
  SymSpace space(path(6), 2);
  EXPECT_EQ(bfs_distance(space, {0, 1}, {2, 3}), 4);
  EXPECT_EQ(bfs_distance(space, {0, 1}, {0, 1}), 0);
  EXPECT_EQ(bfs_distance(space, {0, 1}, {0, 2}), 1);

  std::vector<std::int32_t> d =
      distances_from(space, {space.index({0, 1}), space.index({4, 5})});
  EXPECT_EQ(d[space.index({0, 1})], 0);
  EXPECT_EQ(d[space.index({4, 5})], 0);
  EXPECT_EQ(d[space.index({2, 3})], 4);  // equidistant from both sources
  EXPECT_EQ(d[space.index({3, 5})], 1);

  EXPECT_THROW(distances_from(space, {}), std::invalid_argument);
  EXPECT_THROW(distances_from(space, {space.dimension()}), std::out_of_range);
}

TEST(SymSpace, AssignmentDistanceEqualsBfs) {
  // Token-sliding distance on the product graph equals the optimal-transport
  // assignment over base-graph distances.
  BaseGraph p5 = path(5);
  SymSpace sp5(p5, 2);
  for (std::uint64_t a = 0; a < sp5.dimension(); ++a)
    for (std::uint64_t b = 0; b < sp5.dimension(); ++b) {
      Configuration x = sp5.config(a), y = sp5.config(b);
      EXPECT_EQ(assignment_distance(p5, x, y), bfs_distance(sp5, x, y));
    }
  BaseGraph s = build_lattice_window("strip", {2, 3});
  SymSpace ss(s, 2);
  for (std::uint64_t a = 0; a < ss.dimension(); ++a)
    for (std::uint64_t b = 0; b < ss.dimension(); ++b) {
      Configuration x = ss.config(a), y = ss.config(b);
      EXPECT_EQ(assignment_distance(s, x, y), bfs_distance(ss, x, y));
    }
  EXPECT_THROW(assignment_distance(p5, {0, 1}, {2}), std::invalid_argument);
}

TEST(SymSpace, CapsAndEdgeCases) {
  EXPECT_THROW(SymSpace(path(30), 15, 1000), std::length_error);
  EXPECT_THROW(SymSpace(path(4), 5), std::invalid_argument);
  EXPECT_THROW(SymSpace(path(4), -1), std::invalid_argument);
  SymSpace empty(path(4), 0);
  EXPECT_EQ(empty.dimension(), 1u);
}

}  // namespace
}  // namespace xxz
