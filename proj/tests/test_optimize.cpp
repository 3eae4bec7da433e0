#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "corpus.hpp"
#include "relembed/optimize.hpp"

namespace {

using namespace relembed;

const DiGraph kLoopy2(2, {{0, 0}, {0, 1}, {1, 1}});
const DiGraph kSelf2(2, {{0, 0}, {1, 1}});

/// Best similarity robustness with one edge (or one non-edge) on two nodes:
/// four unit vectors on a circle, the three non-edge gaps equal at g, the edge
/// gap 2 pi - 3g; maximizing cos 3g - cos g gives cos g = -1/sqrt 3.
const double kOneEdgeSimilarity = 8.0 / (3.0 * std::sqrt(3.0));

template <typename F>
void expect_code(Errc code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

DiGraph two_node(int mask) {
  std::vector<Edge> e;
  for (int b = 0; b < 4; ++b)
    if (mask >> b & 1) e.emplace_back(b / 2, b % 2);
  return DiGraph(2, e);
}

int popcount4(int mask) { return __builtin_popcount(static_cast<unsigned>(mask)); }

/// Hand-derived optima for every two-node graph.
double expected_distance(int mask) { return popcount4(mask) == 3 ? 8.0 : kInf; }

double expected_similarity(int mask) {
  switch (popcount4(mask)) {
    case 0:
    case 4: return kInf;
    case 2: return 2.0;
    default: return kOneEdgeSimilarity;
  }
}

DiGraph drop_node(const DiGraph& g, Node x) {
  std::vector<Edge> e;
  for (const auto& [u, v] : g.edges())
    if (u != x && v != x) e.emplace_back(u - (u > x ? 1 : 0), v - (v > x ? 1 : 0));
  return DiGraph(g.size() - 1, e);
}

bool near_relative(double got, double want, double rel) {
  if (std::isinf(want)) return std::isinf(got);
  return std::abs(got - want) <= rel * std::abs(want);
}

// ---------------------------------------------------------------------------

TEST(SolverConfig, DefaultsAndDerivedValues) {
  const SolverConfig c;
  EXPECT_EQ(c.rank_for(5), 10u);
  EXPECT_EQ(c.cap_for(5), 100.0);
  SolverConfig d;
  d.max_rank = 3;
  d.delta_cap = 7.0;
  EXPECT_EQ(d.rank_for(5), 3u);
  EXPECT_EQ(d.cap_for(5), 7.0);
}

TEST(SolverConfig, ReadsKeyValueLines) {
  std::istringstream in("# solver\nmax_rank = 4\nbisection_tolerance=1e-3  # tight\n\nrestarts = 2\nseed = 99\n"
                        "max_iterations = 50\ndelta_cap = 10\n");
  SolverConfig c;
  c.read(in);
  EXPECT_EQ(c.max_rank, 4u);
  EXPECT_EQ(c.bisection_tolerance, 1e-3);
  EXPECT_EQ(c.restarts, 2);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.max_iterations, 50);
  EXPECT_EQ(c.delta_cap, 10.0);
}

TEST(SolverConfig, RejectsBadInput) {
  SolverConfig c;
  expect_code(Errc::InvalidParams, [&] { c.set("max_rank", "0"); });
  expect_code(Errc::InvalidParams, [&] { c.set("bisection_tolerance", "-1"); });
  expect_code(Errc::InvalidParams, [&] { c.set("restarts", "two"); });
  expect_code(Errc::InvalidParams, [&] { c.set("colour", "red"); });
  expect_code(Errc::InvalidParams, [&] { c.set("seed", "12x"); });
  std::istringstream in("max_rank 4\n");
  expect_code(Errc::ParseError, [&] { c.read(in); });
}

// ---------------------------------------------------------------------------

TEST(TinyOracle, MatchesHandDerivedOptima) {
  for (int mask = 0; mask < 16; ++mask) {
    const DiGraph g = two_node(mask);
    EXPECT_TRUE(near_relative(oracle_robustness_tiny(g, RobustnessKind::Distance), expected_distance(mask), 1e-3))
        << mask;
    EXPECT_TRUE(
        near_relative(oracle_robustness_tiny(g, RobustnessKind::Similarity), expected_similarity(mask), 1e-3))
        << mask;
  }
}

TEST(TinyOracle, SingleNode) {
  EXPECT_EQ(oracle_robustness_tiny(DiGraph(1), RobustnessKind::Distance), kInf);
  EXPECT_EQ(oracle_robustness_tiny(DiGraph(1, {{0, 0}}), RobustnessKind::Similarity), kInf);
}

TEST(TinyOracle, RejectsLargerGraphs) {
  expect_code(Errc::TooLarge, [] { oracle_robustness_tiny(DiGraph(3), RobustnessKind::Distance); });
}

// ---------------------------------------------------------------------------

TEST(MaxDistanceRobustness, Loopy2) {
  const SolveResult r = max_distance_robustness(kLoopy2);
  EXPECT_NEAR(r.delta, 8.0, 0.4);
  EXPECT_NE(r.status, SolveStatus::Unbounded);
  const auto& e = std::get<DistanceEmbedding>(r.embedding);
  EXPECT_EQ(measure_distance_robustness(kLoopy2, e).delta, r.delta);
}

TEST(MaxDistanceRobustness, NoNonEdgesIsUnbounded) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const SolveResult r = max_distance_robustness(generate(Family::BidirectedCompleteWithLoops, {.n = n}));
    EXPECT_EQ(r.status, SolveStatus::Unbounded);
    EXPECT_EQ(r.delta, kInf);
  }
}

TEST(MaxDistanceRobustness, CycleThreeUnbounded) {
  const DiGraph c3 = generate(Family::Cycle, {.n = 3});
  const SolveResult r = max_distance_robustness(c3);
  EXPECT_EQ(r.status, SolveStatus::Unbounded);
  const auto& e = std::get<DistanceEmbedding>(r.embedding);
  EXPECT_TRUE(verify_distance(c3, e).ok);
  EXPECT_GE(measure_distance_robustness(c3, e).delta, SolverConfig{}.cap_for(3));
}

TEST(MaxDistanceRobustness, SingleEdgeUnbounded) {
  EXPECT_EQ(max_distance_robustness(DiGraph(2, {{0, 1}})).delta, kInf);
}

TEST(MaxSimilarityRobustness, Self2) {
  const SolveResult r = max_similarity_robustness(kSelf2);
  EXPECT_NEAR(r.delta, 2.0, 0.04);
  const auto& e = std::get<SimilarityEmbedding>(r.embedding);
  EXPECT_EQ(measure_similarity_robustness(kSelf2, e).delta, r.delta);
}

TEST(MaxSimilarityRobustness, CycleThree) {
  const SolverConfig cfg;
  EXPECT_GE(max_similarity_robustness(generate(Family::Cycle, {.n = 3}), cfg).delta,
            1.0 - cfg.bisection_tolerance);
}

TEST(MaxSimilarityRobustness, NoNonEdgesIsInfinite) {
  const SolveResult r = max_similarity_robustness(generate(Family::BidirectedCompleteWithLoops, {.n = 2}));
  EXPECT_EQ(r.delta, kInf);
  EXPECT_EQ(r.status, SolveStatus::Unbounded);
}

TEST(Solvers, AgreeWithOracleOnAllTwoNodeGraphs) {
  for (int mask = 0; mask < 16; ++mask) {
    const DiGraph g = two_node(mask);
    EXPECT_TRUE(near_relative(max_distance_robustness(g).delta, expected_distance(mask), 0.05)) << mask;
    EXPECT_TRUE(near_relative(max_similarity_robustness(g).delta, expected_similarity(mask), 0.05)) << mask;
  }
}

TEST(Solvers, ReportedDeltaIsMeasured) {
  for (const auto& [name, g] : relembed::testing::corpus()) {
    if (g.size() > 12) continue;
    const SolveResult d = max_distance_robustness(g);
    const RobustnessResult md = measure_distance_robustness(g, std::get<DistanceEmbedding>(d.embedding));
    EXPECT_TRUE(md.valid) << name;
    EXPECT_EQ(md.delta, d.delta) << name;

    const SolveResult s = max_similarity_robustness(g);
    const RobustnessResult ms = measure_similarity_robustness(g, std::get<SimilarityEmbedding>(s.embedding));
    EXPECT_TRUE(ms.valid) << name;
    EXPECT_EQ(ms.delta, s.delta) << name;
    if (s.status == SolveStatus::Optimal || s.status == SolveStatus::Feasible) {
      EXPECT_LE(s.residual, SolverConfig{}.bisection_tolerance) << name;
    }
  }
}

TEST(Solvers, AtLeastSpectralBoundOnSmallCorpusGraphs) {
  for (const auto& [name, g] : relembed::testing::corpus()) {
    if (g.size() > 12 || g.edge_count() == 0) continue;
    const double bound = 1.0 / spectrum(g).sigma1;
    const SolveResult d = max_distance_robustness(g);
    if (d.status != SolveStatus::Unbounded) {
      EXPECT_GE(d.delta, bound - 1e-3) << name;
    }
    EXPECT_GE(max_similarity_robustness(g).delta, bound - 1e-3) << name;
  }
}

TEST(Solvers, DistanceNeverExceedsHopBound) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DiGraph g = generate(Family::RandomGnp, {.n = 6, .p = 0.4}, seed);
    const detail::ClosenessGraph c(g);
    const SolveResult r = max_distance_robustness(g);
    if (const auto hb = detail::hop_bound(g, c)) {
      EXPECT_LE(r.delta, *hb + 1e-9) << seed;
    } else {
      EXPECT_EQ(r.status, SolveStatus::Unbounded) << seed;
    }
  }
}

TEST(Solvers, DeterministicForFixedSeed) {
  const DiGraph g = generate(Family::RandomGnp, {.n = 8, .p = 0.4}, 3);
  SolverConfig cfg;
  cfg.seed = 17;
  const SolveResult a = max_distance_robustness(g, cfg), b = max_distance_robustness(g, cfg);
  EXPECT_EQ(a.delta, b.delta);
  EXPECT_EQ(std::get<DistanceEmbedding>(a.embedding).phi_out, std::get<DistanceEmbedding>(b.embedding).phi_out);
  const SolveResult c = max_similarity_robustness(g, cfg), d = max_similarity_robustness(g, cfg);
  EXPECT_EQ(c.delta, d.delta);
  EXPECT_EQ(std::get<SimilarityEmbedding>(c.embedding).phi_l, std::get<SimilarityEmbedding>(d.embedding).phi_l);
}

// Deleting a node drops constraints only, so robustness can only go up.
TEST(Solvers, InducedSubgraphsAreAtLeastAsRobust) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const DiGraph g = generate(Family::RandomGnp, {.n = 4 + seed % 4, .p = 0.35}, 50 + seed);
    const double gd = max_distance_robustness(g).delta;
    const double gs = max_similarity_robustness(g).delta;
    for (Node x = 0; x < g.size(); x += 2) {
      const DiGraph h = drop_node(g, x);
      const double hd = max_distance_robustness(h).delta;
      const double hs = max_similarity_robustness(h).delta;
      EXPECT_LE(gd, hd * (1 + 1e-3) + 1e-3) << seed << " drop " << x;
      EXPECT_LE(gs, hs * (1 + 1e-3) + 1e-3) << seed << " drop " << x;
    }
  }
}

// Removing an edge turns one edge constraint into a non-edge constraint, which
// is not monotone: the exact two-node optima already go up.
TEST(Solvers, EdgeRemovalCanRaiseRobustness) {
  EXPECT_LT(oracle_robustness_tiny(kLoopy2, RobustnessKind::Similarity),
            oracle_robustness_tiny(kSelf2, RobustnessKind::Similarity));
  // Three nodes, closeness components unchanged by dropping (0,0): reaching 8
  // on the full graph would force y1 onto y0 and violate non-edge (2,1).
  const DiGraph g(3, {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {2, 0}});
  const DiGraph h = g.without_edge({0, 0});
  EXPECT_GE(max_distance_robustness(h).delta, 8.0 * 0.95);
  EXPECT_LT(max_distance_robustness(g).delta, 8.0 * 0.95);
}

// ---------------------------------------------------------------------------

TEST(FitTranslational, PathFour) {
  const DiGraph p4 = generate(Family::Path, {.n = 4});
  const auto e = fit_translational(p4);
  ASSERT_TRUE(e);
  EXPECT_TRUE(verify_translational(p4, *e).ok);
}

TEST(FitTranslational, CycleThreeNoneOverFiftyRestarts) {
  SolverConfig cfg;
  cfg.restarts = 50;
  EXPECT_FALSE(fit_translational(generate(Family::Cycle, {.n = 3}), cfg));
}

TEST(FitTranslational, SingleNode) {
  const auto e = fit_translational(DiGraph(1));
  ASSERT_TRUE(e);
  EXPECT_TRUE(verify_translational(DiGraph(1), *e).ok);
}

TEST(FitTranslational, ObstructionImpliesFailure) {
  SolverConfig cfg;
  cfg.restarts = 5;
  int obstructed = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const DiGraph g = generate(Family::RandomGnp, {.n = 7, .p = 0.25}, 900 + seed);
    if (!translational_obstruction(g)) continue;
    ++obstructed;
    EXPECT_FALSE(fit_translational(g, cfg)) << seed;
  }
  EXPECT_GT(obstructed, 0);
}

TEST(FitTranslational, SucceedsOnDags) {
  for (const DiGraph& g : relembed::testing::dag_suite(100)) {
    const auto e = fit_translational(g);
    ASSERT_TRUE(e);
    EXPECT_TRUE(verify_translational(g, *e).ok);
  }
}

// ---------------------------------------------------------------------------

TEST(Lbfgs, MinimizesQuadratic) {
  const detail::Objective f = [](const Vector& x, Vector& g) {
    g[0] = 2 * (x[0] - 3);
    g[1] = 20 * (x[1] + 1);
    return (x[0] - 3) * (x[0] - 3) + 10 * (x[1] + 1) * (x[1] + 1);
  };
  Vector x{0.0, 0.0};
  detail::LbfgsOptions opt;
  opt.target = 1e-18;
  detail::lbfgs_minimize(f, x, opt);
  EXPECT_NEAR(x[0], 3.0, 1e-6);
  EXPECT_NEAR(x[1], -1.0, 1e-6);
}

TEST(Lbfgs, Rosenbrock) {
  const detail::Objective f = [](const Vector& x, Vector& g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  Vector x{-1.2, 1.0};
  detail::LbfgsOptions opt;
  opt.max_iterations = 2000;
  opt.target = 1e-14;
  detail::lbfgs_minimize(f, x, opt);
  EXPECT_NEAR(x[0], 1.0, 1e-4);
  EXPECT_NEAR(x[1], 1.0, 1e-4);
}

}  // namespace
