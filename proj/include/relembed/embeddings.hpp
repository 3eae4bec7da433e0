#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "relembed/error.hpp"
#include "relembed/graph.hpp"
#include "relembed/linalg.hpp"

namespace relembed {

/// Sentinel for unbounded robustness; serialized as "inf".
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Absolute slack applied to squared distances and dot products when
/// comparing against a threshold.
inline constexpr double kTolerance = 1e-9;

/// Unit-norm slack for spherical embeddings and the translation direction.
inline constexpr double kUnitTolerance = 1e-9;

using VectorFamily = std::vector<Vector>;

namespace detail {

inline void check_family(const VectorFamily& f, std::size_t n, std::size_t dim, const char* name) {
  if (f.size() != n)
    throw Error(Errc::SizeMismatch, std::string(name) + " has " + std::to_string(f.size()) +
                                        " vectors, expected " + std::to_string(n));
  for (const auto& v : f)
    if (v.size() != dim)
      throw Error(Errc::SizeMismatch, std::string(name) + " vector length differs from dim " +
                                          std::to_string(dim));
}

inline bool all_unit(const VectorFamily& f) {
  return std::all_of(f.begin(), f.end(),
                     [](const Vector& v) { return std::abs(norm(v) - 1.0) <= kUnitTolerance; });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Embedding types
// ---------------------------------------------------------------------------

/// Edge (u,v) iff ||phi_out(u) - phi_in(v)|| <= t, or <= t_u when the
/// thresholds are per source node.
struct DistanceEmbedding {
  using Threshold = std::variant<double, std::vector<double>>;

  std::size_t dim = 0;
  VectorFamily phi_out;
  VectorFamily phi_in;
  Threshold threshold = 0.0;

  std::size_t size() const noexcept { return phi_out.size(); }
  bool uniform() const noexcept { return std::holds_alternative<double>(threshold); }

  double threshold_of(Node u) const {
    if (const double* t = std::get_if<double>(&threshold)) return *t;
    return std::get<std::vector<double>>(threshold).at(u);
  }

  double uniform_threshold() const {
    if (const double* t = std::get_if<double>(&threshold)) return *t;
    throw Error(Errc::PerSourceUnsupported, "per-source thresholds; uniformize first");
  }

  void validate() const {
    detail::check_family(phi_out, phi_out.size(), dim, "phi_out");
    detail::check_family(phi_in, phi_out.size(), dim, "phi_in");
    if (const auto* ts = std::get_if<std::vector<double>>(&threshold)) {
      if (ts->size() != size()) throw Error(Errc::SizeMismatch, "per-source threshold count");
      for (double t : *ts)
        if (!(t >= 0.0)) throw Error(Errc::InvalidParams, "thresholds must be non-negative");
    } else if (!(std::get<double>(threshold) >= 0.0)) {
      throw Error(Errc::InvalidParams, "threshold must be non-negative");
    }
  }

  bool spherical() const { return detail::all_unit(phi_out) && detail::all_unit(phi_in); }
};

/// Edge (u,v) iff phi_L(u) . phi_R(v) >= t.
struct SimilarityEmbedding {
  std::size_t dim = 0;
  VectorFamily phi_l;
  VectorFamily phi_r;
  double threshold = 0.0;

  std::size_t size() const noexcept { return phi_l.size(); }

  void validate() const {
    detail::check_family(phi_l, phi_l.size(), dim, "phi_L");
    detail::check_family(phi_r, phi_l.size(), dim, "phi_R");
    if (!std::isfinite(threshold)) throw Error(Errc::InvalidParams, "threshold must be finite");
  }

  bool spherical() const { return detail::all_unit(phi_l) && detail::all_unit(phi_r); }
};

/// Edge (u,v), u != v, iff ||phi(v) - (phi(u) + z)|| <= t_u, with z a unit vector.
struct TranslationalEmbedding {
  std::size_t dim = 0;
  VectorFamily phi;
  Vector z;
  std::vector<double> thresholds;

  std::size_t size() const noexcept { return phi.size(); }

  bool uniform() const {
    return std::adjacent_find(thresholds.begin(), thresholds.end(), std::not_equal_to<>()) ==
           thresholds.end();
  }

  void validate() const {
    detail::check_family(phi, phi.size(), dim, "phi");
    if (z.size() != dim) throw Error(Errc::SizeMismatch, "z length differs from dim");
    if (std::abs(norm(z) - 1.0) > kUnitTolerance)
      throw Error(Errc::InvalidParams, "z must be a unit vector");
    if (thresholds.size() != phi.size()) throw Error(Errc::SizeMismatch, "threshold count");
    for (double t : thresholds)
      if (!(t >= 0.0)) throw Error(Errc::InvalidParams, "thresholds must be non-negative");
  }
};

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Outcome of checking an embedding against a graph. On failure `witness` is
/// the lexicographically least ordered pair whose verdict disagrees.
struct Verdict {
  bool ok = true;
  std::optional<Edge> witness;

  explicit operator bool() const noexcept { return ok; }
};

namespace detail {

inline void check_size(const DiGraph& g, std::size_t n) {
  if (g.size() != n)
    throw Error(Errc::SizeMismatch, "embedding has " + std::to_string(n) +
                                        " nodes, graph has " + std::to_string(g.size()));
}

/// Runs `predicate(u, v)` over ordered pairs and compares with the edge set.
template <typename Pred>
Verdict verify_pairs(const DiGraph& g, bool skip_self, Pred&& predicate) {
  const std::size_t n = g.size();
  for (Node u = 0; u < n; ++u)
    for (Node v = 0; v < n; ++v) {
      if (skip_self && u == v) continue;
      if (predicate(u, v) != g.has_edge(u, v)) return {false, Edge{u, v}};
    }
  return {};
}

}  // namespace detail

/// Checks every ordered pair, self-pairs included.
inline Verdict verify_distance(const DiGraph& g, const DistanceEmbedding& e) {
  e.validate();
  detail::check_size(g, e.size());
  return detail::verify_pairs(g, false, [&](Node u, Node v) {
    const double t = e.threshold_of(u);
    return squared_distance(e.phi_out[u], e.phi_in[v]) <= t * t + kTolerance;
  });
}

/// Checks every ordered pair, self-pairs included.
inline Verdict verify_similarity(const DiGraph& g, const SimilarityEmbedding& e) {
  e.validate();
  detail::check_size(g, e.size());
  return detail::verify_pairs(g, false, [&](Node u, Node v) {
    return dot(e.phi_l[u], e.phi_r[v]) >= e.threshold - kTolerance;
  });
}

/// Checks ordered pairs with u != v; self-pairs carry no constraint.
inline Verdict verify_translational(const DiGraph& g, const TranslationalEmbedding& e) {
  e.validate();
  detail::check_size(g, e.size());
  Vector shifted(e.dim);
  return detail::verify_pairs(g, true, [&](Node u, Node v) {
    for (std::size_t i = 0; i < e.dim; ++i) shifted[i] = e.phi[u][i] + e.z[i];
    const double t = e.thresholds[u];
    return squared_distance(e.phi[v], shifted) <= t * t + kTolerance;
  });
}

// ---------------------------------------------------------------------------
// Robustness
// ---------------------------------------------------------------------------

/// `delta` is measured at the embedding's own threshold. The effective pair
/// reports the best threshold for the same vectors (largest edge distance for
/// distance embeddings, smallest edge dot for similarity embeddings) and the
/// robustness it yields.
struct RobustnessResult {
  bool valid = true;
  double delta = kInf;
  std::optional<Edge> witness;
  double effective_threshold = 0.0;
  double effective_delta = kInf;
};

namespace detail {

/// Squared edge distances at or below this count as exactly zero.
inline constexpr double kZeroSquaredDistance = 1e-18;

/// Multiplicative margin min_non / t2 - 1, with the t -> 0 limit.
inline double distance_margin(double min_non, double t2) {
  if (min_non == kInf) return kInf;
  if (t2 <= kZeroSquaredDistance) return min_non > kTolerance ? kInf : 0.0;
  return std::max(0.0, min_non / t2 - 1.0);
}

}  // namespace detail

inline RobustnessResult measure_distance_robustness(const DiGraph& g, const DistanceEmbedding& e) {
  const double t = e.uniform_threshold();
  const Verdict verdict = verify_distance(g, e);

  double max_edge = 0.0;
  double min_non = kInf;
  const std::size_t n = g.size();
  for (Node u = 0; u < n; ++u)
    for (Node v = 0; v < n; ++v) {
      const double d2 = squared_distance(e.phi_out[u], e.phi_in[v]);
      if (g.has_edge(u, v))
        max_edge = std::max(max_edge, d2);
      else
        min_non = std::min(min_non, d2);
    }

  RobustnessResult r;
  r.valid = verdict.ok;
  r.witness = verdict.witness;
  r.delta = r.valid ? detail::distance_margin(min_non, t * t) : 0.0;
  r.effective_threshold = std::sqrt(max_edge);
  r.effective_delta = min_non > max_edge + kTolerance || min_non == kInf
                          ? detail::distance_margin(min_non, max_edge)
                          : 0.0;
  return r;
}

inline RobustnessResult measure_similarity_robustness(const DiGraph& g,
                                                      const SimilarityEmbedding& e) {
  const Verdict verdict = verify_similarity(g, e);
  const std::size_t n = g.size();

  double scale = 0.0;
  for (Node w = 0; w < n; ++w)
    scale = std::max({scale, squared_norm(e.phi_l[w]), squared_norm(e.phi_r[w])});

  double min_edge = kInf;
  double max_non = -kInf;
  for (Node u = 0; u < n; ++u)
    for (Node v = 0; v < n; ++v) {
      const double s = dot(e.phi_l[u], e.phi_r[v]);
      if (g.has_edge(u, v))
        min_edge = std::min(min_edge, s);
      else
        max_non = std::max(max_non, s);
    }

  const bool has_non = max_non > -kInf;
  if (has_non && scale == 0.0)
    throw Error(Errc::ZeroEmbedding, "all vectors are zero; robustness undefined");

  RobustnessResult r;
  r.valid = verdict.ok;
  r.witness = verdict.witness;
  if (!has_non) {
    r.delta = kInf;
    r.effective_delta = kInf;
  } else {
    r.delta = r.valid ? std::max(0.0, (e.threshold - max_non) / scale) : 0.0;
    r.effective_delta = min_edge == kInf ? kInf : std::max(0.0, (min_edge - max_non) / scale);
  }
  r.effective_threshold = min_edge;
  return r;
}

// ---------------------------------------------------------------------------
// Diameter statistics
// ---------------------------------------------------------------------------

struct DiameterStats {
  double diameter = 0.0;
  double diameter_ratio = 0.0;
  /// Largest vector norm B.
  double max_norm = 0.0;
  /// max(B / t, 1).
  double scaled_diameter = 1.0;
};

inline DiameterStats diameter_stats(const DistanceEmbedding& e) {
  const double t = e.uniform_threshold();
  if (!(t > 0.0)) throw Error(Errc::ZeroThreshold, "diameter ratio needs t > 0");
  VectorFamily all = e.phi_out;
  all.insert(all.end(), e.phi_in.begin(), e.phi_in.end());

  double diam2 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    b2 = std::max(b2, squared_norm(all[i]));
    for (std::size_t j = i + 1; j < all.size(); ++j)
      diam2 = std::max(diam2, squared_distance(all[i], all[j]));
  }
  DiameterStats s;
  s.diameter = std::sqrt(diam2);
  s.diameter_ratio = s.diameter / t;
  s.max_norm = std::sqrt(b2);
  s.scaled_diameter = std::max(s.max_norm / t, 1.0);
  return s;
}

// ---------------------------------------------------------------------------
// Threshold uniformization
// ---------------------------------------------------------------------------

/// Folds per-source thresholds t_u into one extra coordinate:
/// out(u) -> (out(u), sqrt(t^2 - t_u^2)), in(v) -> (in(v), 0), t = max t_u.
/// A uniform embedding is returned unchanged.
inline DistanceEmbedding uniformize_thresholds(const DistanceEmbedding& e) {
  e.validate();
  if (e.uniform()) return e;
  const auto& ts = std::get<std::vector<double>>(e.threshold);
  const double t = ts.empty() ? 0.0 : *std::max_element(ts.begin(), ts.end());

  DistanceEmbedding out;
  out.dim = e.dim + 1;
  out.threshold = t;
  for (Node u = 0; u < e.size(); ++u) {
    out.phi_out.push_back(appended(e.phi_out[u], {std::sqrt(std::max(0.0, t * t - ts[u] * ts[u]))}));
    out.phi_in.push_back(appended(e.phi_in[u], {0.0}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Translational obstruction
// ---------------------------------------------------------------------------

/// Looks for a directed cycle (length >= 2) made only of one-way edges, i.e.
/// edges (x,y) with (y,x) absent. Such a cycle rules out any translational
/// embedding; finding none proves nothing.
inline std::optional<std::vector<Node>> translational_obstruction(const DiGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<Node>> next(n);
  for (const auto& [x, y] : g.edges())
    if (x != y && !g.has_edge(y, x)) next[x].push_back(y);

  enum class Mark : unsigned char { White, Grey, Black };
  std::vector<Mark> mark(n, Mark::White);
  std::vector<Node> stack;
  std::vector<std::size_t> cursor(n, 0);

  for (Node root = 0; root < n; ++root) {
    if (mark[root] != Mark::White) continue;
    stack.push_back(root);
    mark[root] = Mark::Grey;
    while (!stack.empty()) {
      const Node x = stack.back();
      if (cursor[x] == next[x].size()) {
        mark[x] = Mark::Black;
        stack.pop_back();
        continue;
      }
      const Node y = next[x][cursor[x]++];
      if (mark[y] == Mark::Grey) {
        auto it = std::find(stack.begin(), stack.end(), y);
        return std::vector<Node>(it, stack.end());
      }
      if (mark[y] == Mark::White) {
        mark[y] = Mark::Grey;
        stack.push_back(y);
      }
    }
  }
  return std::nullopt;
}

}  // namespace relembed
