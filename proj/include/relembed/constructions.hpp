#pragma once

// Constructive embeddings and conversions between embedding types, each with
// the robustness it is guaranteed to reach.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "relembed/embeddings.hpp"
#include "relembed/error.hpp"
#include "relembed/graph.hpp"
#include "relembed/linalg.hpp"

namespace relembed {

namespace detail {

inline Vector unit_axis(std::size_t dim, std::size_t axis) {
  Vector v(dim, 0.0);
  v[axis] = 1.0;
  return v;
}

/// Row i of (factor * diag(sqrt(sigma))) truncated to `rank`, padded to `dim`.
inline Vector weighted_row(const Matrix& factor, const Vector& sigma, std::size_t i,
                           std::size_t rank, std::size_t dim) {
  Vector v(dim, 0.0);
  for (std::size_t k = 0; k < rank; ++k) v[k] = factor(i, k) * std::sqrt(sigma[k]);
  return v;
}

inline void normalize(Vector& v) {
  const double len = norm(v);
  for (auto& x : v) x /= len;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spectral construction
// ---------------------------------------------------------------------------

/// The spectral embedding read both ways: as a spherical distance embedding
/// and, with the same vectors, as a spherical similarity embedding.
struct SpectralEmbedding {
  DistanceEmbedding distance;
  SimilarityEmbedding similarity;
  Spectrum spectrum;
  /// Auxiliary axes added for nodes with no out- or no in-edges (0..2).
  std::size_t auxiliary_axes = 0;
};

/// Factor A = (U sqrt(S)) (V sqrt(S))^T, keep the rank-k part, and normalize
/// rows to the unit sphere. Edges then have dot >= 1/sigma1 and non-edges dot
/// exactly 0. Nodes whose row (column) of A is zero get their out (in) vector
/// on a dedicated extra axis, one axis per side.
inline SpectralEmbedding svd_construct(const DiGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) throw Error(Errc::EmptyGraph, "graph has no nodes");

  SpectralEmbedding out;
  if (g.edge_count() == 0) {
    // Out-vectors on one axis, in-vectors on another: every dot is 0 and every
    // distance sqrt(2), so threshold 1 admits no pair.
    out.auxiliary_axes = 2;
    auto& d = out.distance;
    d.dim = 2;
    d.phi_out.assign(n, detail::unit_axis(2, 0));
    d.phi_in.assign(n, detail::unit_axis(2, 1));
    d.threshold = 1.0;
    out.similarity = {2, d.phi_out, d.phi_in, 1.0};
    return out;
  }

  const Svd s = svd(g.adjacency());
  const double sigma1 = s.sigma.front();
  const std::size_t rank = numerical_rank(s.sigma, kRankTolerance);
  out.spectrum = {rank, sigma1};
  if (sigma1 < 1.0 - 1e-9)
    throw Error(Errc::InvalidParams, "sigma1 < 1 for a nonempty 0/1 matrix");

  bool need_out_axis = false, need_in_axis = false;
  for (Node u = 0; u < n; ++u) {
    need_out_axis = need_out_axis || g.out_degree(u) == 0;
    need_in_axis = need_in_axis || g.in_degree(u) == 0;
  }
  const std::size_t dim = rank + (need_out_axis ? 1 : 0) + (need_in_axis ? 1 : 0);
  const std::size_t out_axis = rank;
  const std::size_t in_axis = rank + (need_out_axis ? 1 : 0);
  out.auxiliary_axes = dim - rank;

  VectorFamily phi_out, phi_in;
  for (Node u = 0; u < n; ++u) {
    if (g.out_degree(u) == 0) {
      phi_out.push_back(detail::unit_axis(dim, out_axis));
    } else {
      phi_out.push_back(detail::weighted_row(s.u, s.sigma, u, rank, dim));
      detail::normalize(phi_out.back());
    }
    if (g.in_degree(u) == 0) {
      phi_in.push_back(detail::unit_axis(dim, in_axis));
    } else {
      phi_in.push_back(detail::weighted_row(s.v, s.sigma, u, rank, dim));
      detail::normalize(phi_in.back());
    }
  }

  // sigma1 == 1 forces every edge dot to 1 (coincident vectors): threshold 0.
  const double t = sigma1 <= 1.0 + 1e-9 ? 0.0 : std::sqrt(2.0 * (1.0 - 1.0 / sigma1));
  out.distance = {dim, phi_out, phi_in, t};
  out.similarity = {dim, std::move(phi_out), std::move(phi_in), 1.0 / sigma1};
  return out;
}

// ---------------------------------------------------------------------------
// Constant-norm undirected embedding with two distance levels
// ---------------------------------------------------------------------------

/// psi with ||psi(i)||^2 = Delta, edges at squared distance 2(Delta-1) and
/// non-edges at 2 Delta.
struct FMEmbedding {
  std::size_t dim = 0;
  VectorFamily psi;
  double delta = 1.0;
};

/// One coordinate per edge (1 on both endpoints) plus a private coordinate per
/// vertex holding sqrt(Delta - deg(i)), with Delta = max(max degree, 1).
inline FMEmbedding fm_embed(const UndirectedGraph& gu) {
  const std::size_t n = gu.size();
  const std::size_t m = gu.edges().size();
  FMEmbedding fm;
  fm.delta = static_cast<double>(std::max<std::size_t>(gu.max_degree(), 1));
  fm.dim = m + n;
  fm.psi.assign(n, Vector(fm.dim, 0.0));
  for (std::size_t e = 0; e < m; ++e) {
    const auto [a, b] = gu.edges()[e];
    fm.psi[a][e] = 1.0;
    fm.psi[b][e] = 1.0;
  }
  for (Node i = 0; i < n; ++i)
    fm.psi[i][m + i] = std::sqrt(fm.delta - static_cast<double>(gu.degree(i)));
  return fm;
}

// ---------------------------------------------------------------------------
// DAG translational embedding
// ---------------------------------------------------------------------------

/// Kahn's algorithm, smallest ready index first. Throws CyclicGraph on any
/// self-loop or directed cycle.
inline std::vector<Node> topological_order(const DiGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<Node>> next(n);
  for (const auto& [u, v] : g.edges()) {
    if (u == v) throw Error(Errc::CyclicGraph, "self-loop at node " + std::to_string(u));
    next[u].push_back(v);
    ++indeg[v];
  }
  std::priority_queue<Node, std::vector<Node>, std::greater<>> ready;
  for (Node u = 0; u < n; ++u)
    if (indeg[u] == 0) ready.push(u);
  std::vector<Node> order;
  while (!ready.empty()) {
    const Node u = ready.top();
    ready.pop();
    order.push_back(u);
    for (Node v : next[u])
      if (--indeg[v] == 0) ready.push(v);
  }
  if (order.size() != n) throw Error(Errc::CyclicGraph, "graph contains a directed cycle");
  return order;
}

/// phi(i) = (rank(i) / (n-1), psi(i)) with z = e_1 and uniform threshold
/// sqrt(2 Delta - 1), where psi is fm_embed of the undirected version.
inline TranslationalEmbedding dag_translational(const DiGraph& g) {
  const std::size_t n = g.size();
  const std::vector<Node> order = topological_order(g);
  std::vector<std::size_t> rank(n);
  for (std::size_t k = 0; k < n; ++k) rank[order[k]] = k;

  const FMEmbedding fm = fm_embed(undirected_version(g));
  const double step = n > 1 ? 1.0 / static_cast<double>(n - 1) : 1.0;

  TranslationalEmbedding e;
  e.dim = fm.dim + 1;
  e.z = detail::unit_axis(e.dim, 0);
  e.thresholds.assign(n, std::sqrt(2.0 * fm.delta - 1.0));
  for (Node i = 0; i < n; ++i) {
    Vector v{static_cast<double>(rank[i]) * step};
    v.insert(v.end(), fm.psi[i].begin(), fm.psi[i].end());
    e.phi.push_back(std::move(v));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Similarity -> spherical distance (threshold-shift factorization)
// ---------------------------------------------------------------------------

namespace detail {

inline void require_verified(const Verdict& v, const char* what) {
  if (!v.ok)
    throw Error(Errc::Unverified, std::string(what) + " does not embed the graph; first bad pair (" +
                                      std::to_string(v.witness->first) + "," +
                                      std::to_string(v.witness->second) + ")");
}

}  // namespace detail

/// Factors M - tJ (M_ij = phi_L(i).phi_R(j), J all-ones) at its numerical rank
/// r <= d+1 and normalizes the factor rows. Edges become exactly the pairs with
/// nonnegative dot, i.e. squared distance <= 2, so the threshold is sqrt(2).
inline DistanceEmbedding similarity_to_spherical_distance(const DiGraph& g,
                                                          const SimilarityEmbedding& e) {
  detail::require_verified(verify_similarity(g, e), "similarity embedding");
  const std::size_t n = g.size();
  if (n == 0) throw Error(Errc::EmptyGraph, "graph has no nodes");

  double max_non = -kInf;
  for (Node u = 0; u < n; ++u)
    for (Node v = 0; v < n; ++v)
      if (!g.has_edge(u, v)) max_non = std::max(max_non, dot(e.phi_l[u], e.phi_r[v]));

  auto attempt = [&](double shift) -> std::optional<DistanceEmbedding> {
    Matrix m(n, n);
    for (Node u = 0; u < n; ++u)
      for (Node v = 0; v < n; ++v) m(u, v) = dot(e.phi_l[u], e.phi_r[v]) - shift;
    const Svd s = svd(m);
    const std::size_t r = numerical_rank(s.sigma, kRankTolerance);
    if (r == 0) return std::nullopt;
    const double zero_row = 1e-12 * std::sqrt(std::max(1.0, s.sigma.front()));
    DistanceEmbedding d;
    d.dim = r;
    d.threshold = std::sqrt(2.0);
    for (Node u = 0; u < n; ++u) {
      Vector a = detail::weighted_row(s.u, s.sigma, u, r, r);
      Vector b = detail::weighted_row(s.v, s.sigma, u, r, r);
      if (norm(a) <= zero_row || norm(b) <= zero_row) return std::nullopt;
      detail::normalize(a);
      detail::normalize(b);
      d.phi_out.push_back(std::move(a));
      d.phi_in.push_back(std::move(b));
    }
    return d;
  };

  if (auto d = attempt(e.threshold)) return *d;
  // A zero row means some node's dots all sit exactly on the threshold. Lower
  // the threshold slightly, staying above every non-edge dot.
  double shift = 1e-7 * (1.0 + std::abs(e.threshold));
  if (max_non > -kInf) shift = std::min(shift, 0.5 * (e.threshold - max_non));
  if (auto d = attempt(e.threshold - shift)) {
    if (verify_distance(g, *d)) return *d;
  }
  throw Error(Errc::ZeroColumn, "threshold-shifted matrix has a zero factor row");
}

// ---------------------------------------------------------------------------
// Distance -> similarity (lift onto the sphere along a fresh axis)
// ---------------------------------------------------------------------------

struct DistanceToSimilarity {
  SimilarityEmbedding embedding;
  /// max(B/t, 1) of the input.
  double scaled_diameter = 1.0;
  /// Lift factor c = sqrt(delta / (3 Delta^4)).
  double lift = 0.0;
  /// delta^2 / (18 Delta^4).
  double guaranteed_delta = 0.0;
};

inline double distance_to_similarity_bound(double delta, double scaled_diameter) {
  return delta * delta / (18.0 * std::pow(scaled_diameter, 4));
}

/// Rescales to t = 1, then maps v -> (c v, 1) / sqrt(1 + c^2 ||v||^2) with
/// c = sqrt(delta / (3 Delta^4)). Edge dots stay >= 1 - c^2/2, non-edge dots
/// drop to <= 1 - (c^2/2)(1 + delta/3).
inline DistanceToSimilarity distance_to_similarity(const DiGraph& g, const DistanceEmbedding& e,
                                                   double delta) {
  const double t = e.uniform_threshold();
  if (!(t > 0.0)) throw Error(Errc::ZeroThreshold, "cannot rescale a t = 0 embedding to t = 1");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw Error(Errc::InvalidParams, "delta must be positive and finite");
  const RobustnessResult r = measure_distance_robustness(g, e);
  if (!r.valid || r.delta < delta - kTolerance * std::max(1.0, delta))
    throw Error(Errc::NotRobust, "input is not " + std::to_string(delta) + "-robust");

  double b = 0.0;
  for (Node u = 0; u < e.size(); ++u)
    b = std::max({b, norm(e.phi_out[u]) / t, norm(e.phi_in[u]) / t});

  DistanceToSimilarity out;
  out.scaled_diameter = std::max(b, 1.0);
  out.lift = std::sqrt(delta / (3.0 * std::pow(out.scaled_diameter, 4)));
  out.guaranteed_delta = distance_to_similarity_bound(delta, out.scaled_diameter);

  const double c = out.lift;
  auto lift = [&](const Vector& v) {
    Vector w = scaled(v, c / t);
    w.push_back(1.0);
    detail::normalize(w);
    return w;
  };
  auto& s = out.embedding;
  s.dim = e.dim + 1;
  s.threshold = 1.0 - c * c / 2.0;
  for (Node u = 0; u < e.size(); ++u) {
    s.phi_l.push_back(lift(e.phi_out[u]));
    s.phi_r.push_back(lift(e.phi_in[u]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Similarity -> spherical distance by unit completion
// ---------------------------------------------------------------------------

struct SimilarityToDistance {
  DistanceEmbedding embedding;
  /// Similarity threshold after scaling all norms to <= 1 (clamped to [-1, 1]).
  double rescaled_threshold = 0.0;
  /// delta / 2.
  double guaranteed_delta = 0.0;
};

/// Scales so every norm is <= 1, then completes L-vectors along fresh axis e
/// and R-vectors along fresh axis f to unit length. Dots are unchanged, so the
/// edges are exactly the pairs within sqrt(2 - 2t') of each other.
inline SimilarityToDistance similarity_to_distance(const DiGraph& g, const SimilarityEmbedding& e,
                                                   double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw Error(Errc::InvalidParams, "delta must be positive and finite");
  const RobustnessResult r = measure_similarity_robustness(g, e);
  if (!r.valid || r.delta < delta - kTolerance * std::max(1.0, delta))
    throw Error(Errc::NotRobust, "input is not " + std::to_string(delta) + "-robust");

  const std::size_t n = e.size();
  double scale2 = 0.0;
  for (Node w = 0; w < n; ++w)
    scale2 = std::max({scale2, squared_norm(e.phi_l[w]), squared_norm(e.phi_r[w])});
  if (scale2 == 0.0) throw Error(Errc::ZeroEmbedding, "all vectors are zero");
  const double inv = 1.0 / std::sqrt(scale2);

  double t = e.threshold / scale2;
  double guaranteed = delta / 2.0;
  if (t < -1.0) {
    // Every dot is >= -1, so raising the threshold keeps all edges and widens
    // the non-edge margin.
    t = -1.0;
  } else if (t > 1.0) {
    // Only possible without edges. Lowering to 1 keeps the margin only while
    // every non-edge dot stays below 1.
    double max_non = -1.0;
    for (Node u = 0; u < n; ++u)
      for (Node v = 0; v < n; ++v)
        max_non = std::max(max_non, dot(e.phi_l[u], e.phi_r[v]) / scale2);
    if (max_non >= 1.0 - kTolerance)
      throw Error(Errc::NotRobust, "a non-edge pair coincides on the sphere");
    t = 1.0;
    guaranteed = std::min(delta, 1.0 - max_non) / 2.0;
  }

  SimilarityToDistance out;
  out.rescaled_threshold = t;
  out.guaranteed_delta = guaranteed;
  auto& d = out.embedding;
  d.dim = e.dim + 2;
  d.threshold = std::sqrt(std::max(0.0, 2.0 - 2.0 * t));
  for (Node u = 0; u < n; ++u) {
    const Vector l = scaled(e.phi_l[u], inv);
    const Vector rr = scaled(e.phi_r[u], inv);
    d.phi_out.push_back(appended(l, {std::sqrt(std::max(0.0, 1.0 - squared_norm(l))), 0.0}));
    d.phi_in.push_back(appended(rr, {0.0, std::sqrt(std::max(0.0, 1.0 - squared_norm(rr)))}));
  }
  return out;
}

}  // namespace relembed
