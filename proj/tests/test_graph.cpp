#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "corpus.hpp"
#include "oracles.hpp"
#include "relembed/graph.hpp"

namespace {

using namespace relembed;

std::vector<Edge> edges_of(const DiGraph& g) { return g.edges(); }

relembed::testing::Dense dense(const DiGraph& g) {
  relembed::testing::Dense d(g.size(), std::vector<double>(g.size(), 0.0));
  for (const auto& [u, v] : g.edges()) d[u][v] = 1.0;
  return d;
}

template <typename F>
void expect_code(Errc code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(DiGraph, RejectsOutOfRangeAndDuplicates) {
  expect_code(Errc::InvalidParams, [] { DiGraph(2, {{0, 2}}); });
  expect_code(Errc::InvalidParams, [] { DiGraph(2, {{0, 1}, {0, 1}}); });
}

TEST(DiGraph, DegreesAndEdgesSorted) {
  const DiGraph g(3, {{2, 0}, {0, 1}, {0, 0}, {1, 0}});
  EXPECT_EQ(edges_of(g), (std::vector<Edge>{{0, 0}, {0, 1}, {1, 0}, {2, 0}}));
  EXPECT_EQ(g.out_degree(0), 2u);
  EXPECT_EQ(g.in_degree(0), 3u);
  EXPECT_EQ(g.max_out_degree(), 2u);
  EXPECT_EQ(g.max_in_degree(), 3u);
  EXPECT_TRUE(g.has_edge(2, 0));
  EXPECT_FALSE(g.has_edge(0, 2));
}

TEST(DiGraph, RelabelAndRemove) {
  const DiGraph g(3, {{0, 1}, {1, 2}});
  const DiGraph r = g.relabeled({2, 0, 1});
  EXPECT_EQ(edges_of(r), (std::vector<Edge>{{0, 1}, {2, 0}}));
  EXPECT_EQ(g.without_edge({0, 1}).edge_count(), 1u);
}

TEST(UndirectedGraph, ForgetsDirectionAndLoops) {
  const UndirectedGraph u = undirected_version(DiGraph(3, {{0, 0}, {0, 1}, {1, 0}, {2, 1}}));
  EXPECT_EQ(u.edges(), (std::vector<Edge>{{0, 1}, {1, 2}}));
  EXPECT_EQ(u.degree(1), 2u);
  EXPECT_EQ(u.max_degree(), 2u);
  EXPECT_THROW(UndirectedGraph(2, {{1, 1}}), Error);
}

TEST(Generate, PathThree) {
  EXPECT_EQ(edges_of(generate(Family::Path, {.n = 3})), (std::vector<Edge>{{0, 1}, {1, 2}}));
}

TEST(Generate, CycleOfOneIsEmpty) {
  const DiGraph g = generate(Family::Cycle, {.n = 1});
  EXPECT_EQ(g.size(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(Generate, BidirectedCompleteWithLoopsTwo) {
  EXPECT_EQ(generate(Family::BidirectedCompleteWithLoops, {.n = 2}).edge_count(), 4u);
}

TEST(Generate, EdgeCountFormulas) {
  for (std::size_t n = 1; n <= 12; ++n) {
    EXPECT_EQ(generate(Family::Path, {.n = n}).edge_count(), n - 1);
    if (n >= 2) {
      EXPECT_EQ(generate(Family::Cycle, {.n = n}).edge_count(), n);
    }
    EXPECT_EQ(generate(Family::BidirectedCompleteWithLoops, {.n = n}).edge_count(), n * n);
    EXPECT_EQ(generate(Family::CompleteBipartite, {.n = n, .n2 = 3}).edge_count(), 3 * n);
    EXPECT_EQ(generate(Family::CompleteBipartite, {.n = n, .bidirected = true}).edge_count(), 2 * n * n);
  }
}

TEST(Generate, RandomFamiliesAreSeeded) {
  for (Family f : {Family::RandomGnp, Family::RandomDag, Family::BoundedDegree}) {
    const GenParams p{.n = 15, .p = 0.3};
    EXPECT_EQ(generate(f, p, 9), generate(f, p, 9)) << to_string(f);
    EXPECT_FALSE(generate(f, p, 9) == generate(f, p, 10)) << to_string(f);
  }
}

TEST(Generate, GnpHasNoLoopsAndRoughDensity) {
  const DiGraph g = generate(Family::RandomGnp, {.n = 60, .p = 0.25}, 4);
  for (const auto& [u, v] : g.edges()) EXPECT_NE(u, v);
  const double frac = static_cast<double>(g.edge_count()) / (60.0 * 59.0);
  EXPECT_NEAR(frac, 0.25, 0.03);
}

TEST(Generate, DagOrientsLowToHigh) {
  const DiGraph g = generate(Family::RandomDag, {.n = 25, .p = 0.5}, 2);
  for (const auto& [u, v] : g.edges()) EXPECT_LT(u, v);
}

TEST(Generate, BoundedDegreeRespectsBound) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t bound = 1 + seed % 4;
    const DiGraph g = generate(Family::BoundedDegree, {.n = 20, .p = 0.3, .degree_bound = bound}, seed);
    EXPECT_LE(g.max_out_degree(), bound);
    EXPECT_LE(g.max_in_degree(), bound);
  }
}

TEST(Generate, ParameterErrors) {
  expect_code(Errc::InvalidParams, [] { generate(Family::Path, {.n = 0}); });
  expect_code(Errc::InvalidParams, [] { generate(Family::RandomGnp, {.n = 3, .p = 1.5}); });
  expect_code(Errc::UnknownFamily, [] { generate("hypercube", {.n = 3}); });
  EXPECT_EQ(generate("path", {.n = 4}), generate(Family::Path, {.n = 4}));
}

TEST(SignSet, SortedAndDeduplicated) {
  const SignSet s = SignSet::parse({"+-", "-+", "+-"});
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.n_coords(), 2u);
  EXPECT_TRUE(s.contains({true, false}));
  expect_code(Errc::ParseError, [] { SignSet::parse({"+0"}); });
  expect_code(Errc::InvalidParams, [] { SignSet(2, {{true}}); });
}

TEST(KmDistance, SinglePlus) {
  const DiGraph g = km_distance_graph(SignSet::parse({"+"}));
  EXPECT_EQ(g.size(), 3u);
  EXPECT_EQ(edges_of(g), (std::vector<Edge>{{0, 2}}));
}

TEST(KmDistance, PlusMinus) {
  // a0=0, a1=1, b0=2, b1=3, c=4.
  EXPECT_EQ(edges_of(km_distance_graph(SignSet::parse({"+-"}))), (std::vector<Edge>{{0, 4}, {3, 4}}));
}

TEST(KmDistance, BothSingletons) {
  // Sorted order puts "-" (false) before "+" (true): c_minus = 2, c_plus = 3.
  const DiGraph g = km_distance_graph(SignSet::parse({"+", "-"}));
  EXPECT_EQ(edges_of(g), (std::vector<Edge>{{0, 3}, {1, 2}}));
  EXPECT_EQ(g.edge_count(), 1u * 2u);
}

TEST(KmSimilarity, Examples) {
  EXPECT_EQ(km_similarity_graph(SignSet::parse({"+"})).edge_count(), 1u);
  EXPECT_EQ(km_similarity_graph(SignSet::parse({"-"})).edge_count(), 0u);
  // Sorted: "-+" (c = 2) before "++" (c = 3).
  EXPECT_EQ(edges_of(km_similarity_graph(SignSet::parse({"++", "-+"}))),
            (std::vector<Edge>{{0, 3}, {1, 2}, {1, 3}}));
}

TEST(KmGraphs, EmptySetRejected) {
  expect_code(Errc::EmptySignSet, [] { km_distance_graph(SignSet(2, {})); });
  expect_code(Errc::EmptySignSet, [] { km_similarity_graph(SignSet(2, {})); });
}

TEST(RealizableSignSet, OneHyperplaneGivesBothSides) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SignSet s = realizable_sign_set(1, 1, 4, seed);
    EXPECT_EQ(s.size(), 2u);
    EXPECT_TRUE(s.contains({true}));
    EXPECT_TRUE(s.contains({false}));
  }
}

TEST(RealizableSignSet, ContainsBothExtremes) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t m = 1 + seed % 6;
    const SignSet s = realizable_sign_set(m, 1 + seed % 3, 30, seed);
    EXPECT_TRUE(s.contains(SignSet::Signs(m, true))) << seed;
    EXPECT_TRUE(s.contains(SignSet::Signs(m, false))) << seed;
  }
}

TEST(RealizableSignSet, VectorsHaveRequestedLength) {
  const SignSet s = realizable_sign_set(2, 2, 50, 7);
  for (const auto& v : s.vectors()) EXPECT_EQ(v.size(), 2u);
  EXPECT_LE(s.size(), 4u);
}

TEST(RealizableSignSet, ThreeLinesInPlaneCutAtMostSevenCells) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) EXPECT_LE(realizable_sign_set(3, 2, 200, seed).size(), 7u);
}

TEST(RealizableSignSet, OnALineCellsAreAtMostHyperplanesPlusOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_LE(realizable_sign_set(5, 1, 300, seed).size(), 6u);
}

TEST(Spectrum, AllOnesThree) {
  const Spectrum s = spectrum(generate(Family::BidirectedCompleteWithLoops, {.n = 3}));
  EXPECT_EQ(s.rank, 1u);
  EXPECT_NEAR(s.sigma1, 3.0, 1e-12);
}

TEST(Spectrum, EmptyGraph) {
  const Spectrum s = spectrum(DiGraph(4));
  EXPECT_EQ(s.rank, 0u);
  EXPECT_EQ(s.sigma1, 0.0);
}

TEST(Spectrum, CycleThreeIsPermutation) {
  const Spectrum s = spectrum(generate(Family::Cycle, {.n = 3}));
  EXPECT_EQ(s.rank, 3u);
  EXPECT_NEAR(s.sigma1, 1.0, 1e-12);
}

TEST(Spectrum, MatchesIndependentOraclesOnCorpus) {
  for (const auto& [name, g] : relembed::testing::corpus()) {
    const Spectrum s = spectrum(g);
    EXPECT_NEAR(s.sigma1, relembed::testing::power_sigma1(dense(g)), 1e-6) << name;
    EXPECT_EQ(s.rank, relembed::testing::elimination_rank(dense(g))) << name;
  }
}

TEST(Spectrum, InvariantUnderRelabeling) {
  for (const auto& [name, g] : relembed::testing::corpus()) {
    const auto perm = relembed::testing::permutation(g.size(), g.size() * 31 + g.edge_count());
    const Spectrum a = spectrum(g);
    const Spectrum b = spectrum(g.relabeled(perm));
    EXPECT_EQ(a.rank, b.rank) << name;
    EXPECT_NEAR(a.sigma1, b.sigma1, 1e-9) << name;
  }
}

TEST(Spectrum, DegreeBound) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t bound = 1 + seed % 5;
    const DiGraph g = generate(Family::BoundedDegree, {.n = 10 + seed % 20, .p = 0.2, .degree_bound = bound}, seed);
    EXPECT_LE(spectrum(g).sigma1,
              std::sqrt(static_cast<double>(g.max_out_degree() * g.max_in_degree())) + 1e-9);
  }
}

TEST(EdgeList, RoundTrip) {
  const DiGraph g = generate(Family::RandomGnp, {.n = 9, .p = 0.4}, 1);
  std::stringstream ss;
  write_edge_list(ss, g);
  EXPECT_EQ(read_edge_list(ss), g);
}

TEST(EdgeList, CommentsAndBlankLines) {
  std::istringstream in("# header\n\nn 3\n  # inner\n0 1\r\n2 2\n");
  EXPECT_EQ(edges_of(read_edge_list(in)), (std::vector<Edge>{{0, 1}, {2, 2}}));
}

TEST(EdgeList, ParseErrors) {
  for (const char* text : {"", "0 1\n", "n 2\n0 2\n", "n 2\n0 1\n0 1\n", "n 2\n0\n", "n 2\n0 1 5\n", "n -1\n"}) {
    std::istringstream in(text);
    expect_code(Errc::ParseError, [&] { read_edge_list(in); });
  }
}

TEST(EdgeList, MissingFile) {
  expect_code(Errc::IoError, [] { load_edge_list("/nonexistent/dir/g.el"); });
}

}  // namespace
