#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relembed/error.hpp"
#include "relembed/linalg.hpp"
#include "relembed/rng.hpp"

namespace relembed {

using Node = std::size_t;
using Edge = std::pair<Node, Node>;

/// Directed graph on nodes 0..n-1. Self-loops are allowed, parallel edges are
/// not. Immutable once built; edges are kept in lexicographic order.
class DiGraph {
 public:
  DiGraph() = default;

  explicit DiGraph(std::size_t n, std::vector<Edge> edges = {}) : n_(n), adj_(n * n, 0) {
    for (const auto& [u, v] : edges) {
      if (u >= n || v >= n)
        throw Error(Errc::InvalidParams, "edge (" + std::to_string(u) + "," + std::to_string(v) +
                                             ") out of range for n=" + std::to_string(n));
      if (adj_[u * n + v])
        throw Error(Errc::InvalidParams,
                    "duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
      adj_[u * n + v] = 1;
    }
    edges_ = std::move(edges);
    std::sort(edges_.begin(), edges_.end());
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool has_edge(Node u, Node v) const noexcept { return adj_[u * n_ + v] != 0; }

  std::size_t out_degree(Node u) const {
    std::size_t d = 0;
    for (Node v = 0; v < n_; ++v) d += adj_[u * n_ + v];
    return d;
  }
  std::size_t in_degree(Node v) const {
    std::size_t d = 0;
    for (Node u = 0; u < n_; ++u) d += adj_[u * n_ + v];
    return d;
  }
  std::size_t max_out_degree() const {
    std::size_t d = 0;
    for (Node u = 0; u < n_; ++u) d = std::max(d, out_degree(u));
    return d;
  }
  std::size_t max_in_degree() const {
    std::size_t d = 0;
    for (Node v = 0; v < n_; ++v) d = std::max(d, in_degree(v));
    return d;
  }

  Matrix adjacency() const {
    Matrix a(n_, n_);
    for (const auto& [u, v] : edges_) a(u, v) = 1.0;
    return a;
  }

  /// Graph with node u renamed to perm[u].
  DiGraph relabeled(const std::vector<Node>& perm) const {
    std::vector<Edge> e;
    e.reserve(edges_.size());
    for (const auto& [u, v] : edges_) e.emplace_back(perm.at(u), perm.at(v));
    return DiGraph(n_, std::move(e));
  }

  /// Same nodes, one edge removed.
  DiGraph without_edge(Edge drop) const {
    std::vector<Edge> e;
    for (const auto& edge : edges_)
      if (edge != drop) e.push_back(edge);
    return DiGraph(n_, std::move(e));
  }

  friend bool operator==(const DiGraph& a, const DiGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<unsigned char> adj_;
};

/// Simple undirected graph; edges stored as (i, j) with i < j.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  explicit UndirectedGraph(std::size_t n, const std::vector<Edge>& edges = {})
      : n_(n), adj_(n * n, 0) {
    for (auto [a, b] : edges) {
      if (a >= n || b >= n || a == b)
        throw Error(Errc::InvalidParams, "undirected edge must join two distinct nodes < n");
      if (a > b) std::swap(a, b);
      if (adj_[a * n + b]) continue;
      adj_[a * n + b] = adj_[b * n + a] = 1;
      edges_.emplace_back(a, b);
    }
    std::sort(edges_.begin(), edges_.end());
  }

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool adjacent(Node a, Node b) const noexcept { return adj_[a * n_ + b] != 0; }
  std::size_t degree(Node a) const {
    std::size_t d = 0;
    for (Node b = 0; b < n_; ++b) d += adj_[a * n_ + b];
    return d;
  }
  std::size_t max_degree() const {
    std::size_t d = 0;
    for (Node a = 0; a < n_; ++a) d = std::max(d, degree(a));
    return d;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<unsigned char> adj_;
};

/// Forgets direction and drops self-loops.
inline UndirectedGraph undirected_version(const DiGraph& g) {
  std::vector<Edge> e;
  for (const auto& [u, v] : g.edges())
    if (u != v) e.emplace_back(u, v);
  return UndirectedGraph(g.size(), e);
}

// ---------------------------------------------------------------------------
// Sign sets and the hyperplane-arrangement reduction graphs
// ---------------------------------------------------------------------------

/// Set of sign vectors in {+,-}^n_coords; `true` encodes '+'. Sorted and
/// duplicate-free.
class SignSet {
 public:
  using Signs = std::vector<bool>;

  SignSet(std::size_t n_coords, std::vector<Signs> vectors) : n_coords_(n_coords) {
    for (const auto& s : vectors)
      if (s.size() != n_coords)
        throw Error(Errc::InvalidParams, "sign vector length differs from n_coords");
    std::sort(vectors.begin(), vectors.end());
    vectors.erase(std::unique(vectors.begin(), vectors.end()), vectors.end());
    vectors_ = std::move(vectors);
  }

  /// Parses strings such as "+-+".
  static SignSet parse(const std::vector<std::string>& rows) {
    const std::size_t len = rows.empty() ? 0 : rows.front().size();
    std::vector<Signs> v;
    for (const auto& r : rows) {
      Signs s;
      for (char c : r) {
        if (c != '+' && c != '-') throw Error(Errc::ParseError, "sign must be '+' or '-'");
        s.push_back(c == '+');
      }
      v.push_back(std::move(s));
    }
    return SignSet(len, std::move(v));
  }

  std::size_t n_coords() const noexcept { return n_coords_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool empty() const noexcept { return vectors_.empty(); }
  const std::vector<Signs>& vectors() const noexcept { return vectors_; }

  bool contains(const Signs& s) const {
    return std::binary_search(vectors_.begin(), vectors_.end(), s);
  }

 private:
  std::size_t n_coords_ = 0;
  std::vector<Signs> vectors_;
};

/// Nodes: a_0..a_{m-1}, b_0..b_{m-1}, then one c per sign vector (in the
/// set's sorted order). a_i -> c iff sign i is '+', b_i -> c iff it is '-'.
inline DiGraph km_distance_graph(const SignSet& s) {
  if (s.empty()) throw Error(Errc::EmptySignSet, "sign set is empty");
  const std::size_t m = s.n_coords();
  std::vector<Edge> e;
  for (std::size_t c = 0; c < s.size(); ++c) {
    const Node cnode = 2 * m + c;
    for (std::size_t i = 0; i < m; ++i)
      e.emplace_back(s.vectors()[c][i] ? i : m + i, cnode);
  }
  return DiGraph(2 * m + s.size(), std::move(e));
}

/// Nodes: a_0..a_{m-1}, then one c per sign vector; a_i -> c iff sign i is '+'.
inline DiGraph km_similarity_graph(const SignSet& s) {
  if (s.empty()) throw Error(Errc::EmptySignSet, "sign set is empty");
  const std::size_t m = s.n_coords();
  std::vector<Edge> e;
  for (std::size_t c = 0; c < s.size(); ++c)
    for (std::size_t i = 0; i < m; ++i)
      if (s.vectors()[c][i]) e.emplace_back(i, m + c);
  return DiGraph(m + s.size(), std::move(e));
}

namespace detail {

inline Vector random_unit(Rng& rng, std::size_t k) {
  for (;;) {
    Vector v(k);
    for (auto& x : v) x = rng.normal();
    const double len = norm(v);
    if (len > 1e-12) return scaled(v, 1.0 / len);
  }
}

inline Vector random_in_ball(Rng& rng, std::size_t k) {
  Vector dir = random_unit(rng, k);
  const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(k));
  return scaled(dir, radius);
}

}  // namespace detail

/// Sign vectors of random points in the unit k-ball against a random oriented
/// arrangement of `n_hyperplanes` hyperplanes. Two anchor points are placed on
/// the all-positive and all-negative sides so both extreme vectors are present.
inline SignSet realizable_sign_set(std::size_t n_hyperplanes, std::size_t k, std::size_t n_points,
                                   std::uint64_t seed) {
  if (n_hyperplanes < 1 || k < 1 || n_points < 2)
    throw Error(Errc::InvalidParams, "need n_hyperplanes >= 1, k >= 1, n_points >= 2");
  constexpr int kMaxRetries = 1000;
  Rng rng(seed);

  const Vector plus = detail::random_in_ball(rng, k);
  Vector minus;
  for (int tries = 0;; ++tries) {
    if (tries == kMaxRetries) throw Error(Errc::SamplingFailed, "could not separate anchors");
    minus = detail::random_in_ball(rng, k);
    if (distance(plus, minus) > 1e-3) break;
  }

  std::vector<Vector> normals;
  std::vector<double> offsets;
  for (std::size_t h = 0; h < n_hyperplanes; ++h) {
    for (int tries = 0;; ++tries) {
      if (tries == kMaxRetries) throw Error(Errc::SamplingFailed, "degenerate hyperplane draws");
      Vector w = detail::random_unit(rng, k);
      double hi = dot(w, plus), lo = dot(w, minus);
      if (std::abs(hi - lo) < 1e-6) continue;
      if (hi < lo) {
        for (auto& x : w) x = -x;
        hi = -hi;
        lo = -lo;
      }
      // Offset strictly between the anchors' projections.
      const double b = lo + (hi - lo) * rng.uniform(0.05, 0.95);
      normals.push_back(std::move(w));
      offsets.push_back(b);
      break;
    }
  }

  auto sign_of = [&](const Vector& p) -> std::optional<SignSet::Signs> {
    SignSet::Signs s(n_hyperplanes);
    for (std::size_t h = 0; h < n_hyperplanes; ++h) {
      const double side = dot(normals[h], p) - offsets[h];
      if (std::abs(side) < 1e-12) return std::nullopt;
      s[h] = side > 0.0;
    }
    return s;
  };

  std::vector<SignSet::Signs> out;
  out.push_back(*sign_of(plus));
  out.push_back(*sign_of(minus));
  for (std::size_t i = 2; i < n_points; ++i) {
    for (int tries = 0;; ++tries) {
      if (tries == kMaxRetries) throw Error(Errc::SamplingFailed, "points keep landing on hyperplanes");
      if (auto s = sign_of(detail::random_in_ball(rng, k))) {
        out.push_back(std::move(*s));
        break;
      }
    }
  }
  return SignSet(n_hyperplanes, std::move(out));
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

enum class Family {
  Path,
  Cycle,
  CompleteBipartite,
  BidirectedCompleteWithLoops,
  RandomGnp,
  RandomDag,
  BoundedDegree,
  KmDistance,
  KmSimilarity,
};

inline constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::Path: return "path";
    case Family::Cycle: return "cycle";
    case Family::CompleteBipartite: return "complete_bipartite";
    case Family::BidirectedCompleteWithLoops: return "bidirected_complete_with_loops";
    case Family::RandomGnp: return "random_gnp";
    case Family::RandomDag: return "random_dag";
    case Family::BoundedDegree: return "bounded_degree";
    case Family::KmDistance: return "km_distance";
    case Family::KmSimilarity: return "km_similarity";
  }
  return "";
}

inline Family parse_family(std::string_view name) {
  for (Family f : {Family::Path, Family::Cycle, Family::CompleteBipartite,
                   Family::BidirectedCompleteWithLoops, Family::RandomGnp, Family::RandomDag,
                   Family::BoundedDegree, Family::KmDistance, Family::KmSimilarity})
    if (to_string(f) == name) return f;
  throw Error(Errc::UnknownFamily, std::string(name));
}

/// Union of the parameters used by the generator families; each family reads
/// only the fields it needs.
struct GenParams {
  std::size_t n = 0;
  double p = 0.5;
  /// Degree cap for bounded_degree.
  std::size_t degree_bound = 3;
  /// Second side of complete_bipartite (0 means "same as n").
  std::size_t n2 = 0;
  /// complete_bipartite: also add the reverse of every cross edge.
  bool bidirected = false;
  // km_* families: parameters of realizable_sign_set.
  std::size_t n_hyperplanes = 3;
  std::size_t k = 2;
  std::size_t n_points = 20;
};

namespace detail {

inline constexpr int kBoundedDegreeRetryCap = 10'000;

/// Out-neighbourhoods are sampled node by node; a row that would push any
/// in- or out-degree past the bound is rejected and redrawn.
inline DiGraph bounded_degree_graph(std::size_t n, double p, std::size_t bound, Rng& rng) {
  std::vector<Edge> edges;
  std::vector<std::size_t> indeg(n, 0);
  int retries = 0;
  for (Node u = 0; u < n; ++u) {
    for (;;) {
      std::vector<Node> row;
      for (Node v = 0; v < n; ++v)
        if (v != u && rng.bernoulli(p)) row.push_back(v);
      const bool ok = row.size() <= bound &&
                      std::all_of(row.begin(), row.end(), [&](Node v) { return indeg[v] < bound; });
      if (ok) {
        for (Node v : row) {
          ++indeg[v];
          edges.emplace_back(u, v);
        }
        break;
      }
      if (++retries > kBoundedDegreeRetryCap)
        throw Error(Errc::SamplingFailed, "bounded_degree retry cap reached; lower p");
    }
  }
  return DiGraph(n, std::move(edges));
}

}  // namespace detail

inline DiGraph generate(Family family, const GenParams& params, std::uint64_t seed = 0) {
  const std::size_t n = params.n;
  auto need_n = [&] {
    if (n < 1) throw Error(Errc::InvalidParams, "n must be >= 1");
  };
  auto need_p = [&] {
    if (!(params.p >= 0.0 && params.p <= 1.0))
      throw Error(Errc::InvalidParams, "p must lie in [0, 1]");
  };
  Rng rng(seed);
  std::vector<Edge> e;

  switch (family) {
    case Family::Path:
      need_n();
      for (Node i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
      return DiGraph(n, std::move(e));
    case Family::Cycle:
      need_n();
      if (n == 1) return DiGraph(1);
      for (Node i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
      return DiGraph(n, std::move(e));
    case Family::CompleteBipartite: {
      need_n();
      const std::size_t n2 = params.n2 == 0 ? n : params.n2;
      for (Node a = 0; a < n; ++a)
        for (Node b = n; b < n + n2; ++b) {
          e.emplace_back(a, b);
          if (params.bidirected) e.emplace_back(b, a);
        }
      return DiGraph(n + n2, std::move(e));
    }
    case Family::BidirectedCompleteWithLoops:
      need_n();
      for (Node u = 0; u < n; ++u)
        for (Node v = 0; v < n; ++v) e.emplace_back(u, v);
      return DiGraph(n, std::move(e));
    case Family::RandomGnp:
      need_n();
      need_p();
      for (Node u = 0; u < n; ++u)
        for (Node v = 0; v < n; ++v)
          if (u != v && rng.bernoulli(params.p)) e.emplace_back(u, v);
      return DiGraph(n, std::move(e));
    case Family::RandomDag:
      need_n();
      need_p();
      for (Node u = 0; u < n; ++u)
        for (Node v = u + 1; v < n; ++v)
          if (rng.bernoulli(params.p)) e.emplace_back(u, v);
      return DiGraph(n, std::move(e));
    case Family::BoundedDegree:
      need_n();
      need_p();
      return detail::bounded_degree_graph(n, params.p, params.degree_bound, rng);
    case Family::KmDistance:
      return km_distance_graph(
          realizable_sign_set(params.n_hyperplanes, params.k, params.n_points, seed));
    case Family::KmSimilarity:
      return km_similarity_graph(
          realizable_sign_set(params.n_hyperplanes, params.k, params.n_points, seed));
  }
  throw Error(Errc::UnknownFamily, "unhandled family");
}

inline DiGraph generate(std::string_view family, const GenParams& params, std::uint64_t seed = 0) {
  return generate(parse_family(family), params, seed);
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

struct Spectrum {
  std::size_t rank = 0;
  double sigma1 = 0.0;
};

inline constexpr double kRankTolerance = 1e-9;

inline Spectrum spectrum(const DiGraph& g) {
  if (g.size() == 0 || g.edge_count() == 0) return {};
  const Svd s = svd(g.adjacency());
  return {numerical_rank(s.sigma, kRankTolerance), s.sigma.front()};
}

// ---------------------------------------------------------------------------
// Edge-list text format
//   # comment
//   n <N>
//   u v
// ---------------------------------------------------------------------------

inline DiGraph read_edge_list(std::istream& in) {
  std::string line;
  std::optional<std::size_t> n;
  std::vector<Edge> edges;
  std::set<Edge> seen;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    if (!n) {
      std::string tag;
      long long count = -1;
      if (!(ss >> tag >> count) || tag != "n" || count < 0) fail("expected 'n <N>' header");
      n = static_cast<std::size_t>(count);
    } else {
      long long u = -1, v = -1;
      if (!(ss >> u >> v)) fail("expected 'u v'");
      if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= *n || static_cast<std::size_t>(v) >= *n)
        fail("node index out of range");
      const Edge e{static_cast<Node>(u), static_cast<Node>(v)};
      if (!seen.insert(e).second) fail("duplicate edge");
      edges.push_back(e);
    }
    std::string rest;
    if (ss >> rest) fail("trailing tokens");
  }
  if (!n) throw Error(Errc::ParseError, "missing 'n <N>' header");
  return DiGraph(*n, std::move(edges));
}

inline void write_edge_list(std::ostream& out, const DiGraph& g) {
  out << "n " << g.size() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

inline DiGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  return read_edge_list(in);
}

inline void save_edge_list(const std::string& path, const DiGraph& g) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  write_edge_list(out, g);
}

}  // namespace relembed
