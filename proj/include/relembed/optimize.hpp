#pragma once

// Robustness maximization over low-rank factorizations: bisection on delta,
// each level a squared-hinge feasibility problem solved with L-BFGS. Every
// reported delta is measured on the returned embedding.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "relembed/constructions.hpp"
#include "relembed/detail/lbfgs.hpp"
#include "relembed/embeddings.hpp"
#include "relembed/error.hpp"
#include "relembed/graph.hpp"
#include "relembed/linalg.hpp"
#include "relembed/rng.hpp"

namespace relembed {

struct SolverConfig {
  /// Factorization width; 0 means 2n.
  std::size_t max_rank = 0;
  double bisection_tolerance = 1e-4;
  /// L-BFGS iterations per restart.
  int max_iterations = 500;
  int restarts = 3;
  std::uint64_t seed = 0;
  /// Robustness treated as unbounded; 0 means (2n)^2.
  double delta_cap = 0.0;

  std::size_t rank_for(std::size_t n) const { return max_rank > 0 ? max_rank : std::max<std::size_t>(2 * n, 1); }
  double cap_for(std::size_t n) const {
    const double nn = 2.0 * static_cast<double>(std::max<std::size_t>(n, 1));
    return delta_cap > 0.0 ? delta_cap : nn * nn;
  }

  void validate() const {
    if (!(bisection_tolerance > 0.0)) throw Error(Errc::InvalidParams, "bisection_tolerance must be > 0");
    if (max_iterations < 1) throw Error(Errc::InvalidParams, "max_iterations must be >= 1");
    if (restarts < 1) throw Error(Errc::InvalidParams, "restarts must be >= 1");
    if (delta_cap < 0.0) throw Error(Errc::InvalidParams, "delta_cap must be >= 0");
  }

  /// Sets one field from its name; unknown keys and bad values throw.
  void set(std::string_view key, std::string_view value) {
    const std::string v(value);
    auto fail = [&] {
      return Error(Errc::InvalidParams, "bad value '" + v + "' for " + std::string(key));
    };
    try {
      std::size_t used = 0;
      if (key == "max_rank") {
        const long long x = std::stoll(v, &used);
        if (x < 1) throw fail();
        max_rank = static_cast<std::size_t>(x);
      } else if (key == "bisection_tolerance") {
        bisection_tolerance = std::stod(v, &used);
      } else if (key == "max_iterations") {
        max_iterations = std::stoi(v, &used);
      } else if (key == "restarts") {
        restarts = std::stoi(v, &used);
      } else if (key == "seed") {
        seed = std::stoull(v, &used);
      } else if (key == "delta_cap") {
        delta_cap = std::stod(v, &used);
      } else {
        throw Error(Errc::InvalidParams, "unknown solver option '" + std::string(key) + "'");
      }
      if (used != v.size()) throw fail();
    } catch (const std::logic_error&) {
      throw fail();
    }
    validate();
  }

  /// Reads `key = value` lines; blank lines and `#` comments are skipped.
  void read(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(Errc::ParseError, "expected key=value: " + line);
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
};

/// A bisection level is abandoned once 50 L-BFGS steps cut the penalty by
/// less than this fraction.
inline constexpr double kStallFraction = 0.01;

enum class SolveStatus { Optimal, Feasible, Unbounded, Infeasible };

inline constexpr std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::Infeasible: return "Infeasible";
  }
  return "?";
}

struct SolveResult {
  double delta = 0.0;
  std::variant<DistanceEmbedding, SimilarityEmbedding> embedding;
  /// Largest constraint violation of the returned embedding at its threshold.
  double residual = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  /// Bisection levels attempted.
  int levels = 0;
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

/// Bipartite graph on out-copies x_0..x_{n-1} (ids 0..n-1) and in-copies
/// y_0..y_{n-1} (ids n..2n-1) with x_u - y_v for every edge (u, v).
struct ClosenessGraph {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> adj;
  std::vector<std::size_t> component;

  explicit ClosenessGraph(const DiGraph& g) : n(g.size()), adj(2 * g.size()), component(2 * g.size()) {
    UnionFind uf(2 * n);
    for (const auto& [u, v] : g.edges()) {
      adj[u].push_back(n + v);
      adj[n + v].push_back(u);
      uf.unite(u, n + v);
    }
    // Dense component labels in order of first appearance.
    std::vector<std::size_t> label(2 * n, SIZE_MAX);
    std::size_t next = 0;
    for (std::size_t i = 0; i < 2 * n; ++i) {
      const std::size_t r = uf.find(i);
      if (label[r] == SIZE_MAX) label[r] = next++;
      component[i] = label[r];
    }
  }

  bool same_component(Node u, Node v) const { return component[u] == component[n + v]; }

  std::vector<std::size_t> hops_from(std::size_t src) const {
    std::vector<std::size_t> dist(2 * n, SIZE_MAX);
    std::queue<std::size_t> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      const std::size_t a = q.front();
      q.pop();
      for (std::size_t b : adj[a])
        if (dist[b] == SIZE_MAX) {
          dist[b] = dist[a] + 1;
          q.push(b);
        }
    }
    return dist;
  }
};

/// Smallest (hops^2 - 1) over non-edges whose endpoints share a closeness
/// component: each hop is an edge of length <= 1, so such a non-edge sits at
/// distance <= hops. nullopt when every non-edge is cross-component.
inline std::optional<double> hop_bound(const DiGraph& g, const ClosenessGraph& c) {
  std::optional<double> best;
  for (Node u = 0; u < g.size(); ++u) {
    std::optional<std::vector<std::size_t>> dist;
    for (Node v = 0; v < g.size(); ++v) {
      if (g.has_edge(u, v) || !c.same_component(u, v)) continue;
      if (!dist) dist = c.hops_from(u);
      const double h = static_cast<double>((*dist)[c.n + v]);
      best = std::min(best.value_or(kInf), h * h - 1.0);
    }
  }
  return best;
}

/// 1-D embedding with every closeness component collapsed to one point and
/// components spaced far apart. Threshold 0: edges sit at distance 0 and every
/// non-edge is cross-component.
inline DistanceEmbedding separated_components(const ClosenessGraph& c, double cap) {
  const double spacing = std::ceil(std::sqrt(1.0 + cap)) + 1.0;
  DistanceEmbedding e;
  e.dim = 1;
  e.threshold = 0.0;
  for (Node u = 0; u < c.n; ++u) {
    e.phi_out.push_back({spacing * static_cast<double>(c.component[u])});
    e.phi_in.push_back({spacing * static_cast<double>(c.component[c.n + u])});
  }
  return e;
}

inline Vector pack(const VectorFamily& a, const VectorFamily& b, std::size_t r) {
  Vector x;
  x.reserve((a.size() + b.size()) * r);
  for (const auto* fam : {&a, &b})
    for (const auto& v : *fam)
      for (std::size_t k = 0; k < r; ++k) x.push_back(k < v.size() ? v[k] : 0.0);
  return x;
}

inline std::pair<VectorFamily, VectorFamily> unpack(const Vector& x, std::size_t n, std::size_t r) {
  VectorFamily a(n, Vector(r)), b(n, Vector(r));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < r; ++k) {
      a[i][k] = x[i * r + k];
      b[i][k] = x[(n + i) * r + k];
    }
  return {std::move(a), std::move(b)};
}

inline void perturb(Vector& x, Rng& rng, double scale) {
  for (auto& v : x) v += scale * rng.normal();
}

/// Distance embedding from packed vectors with threshold = largest edge distance.
inline DistanceEmbedding distance_from_packed(const DiGraph& g, const Vector& x, std::size_t r) {
  auto [a, b] = unpack(x, g.size(), r);
  double max_edge = 0.0;
  for (const auto& [u, v] : g.edges()) max_edge = std::max(max_edge, squared_distance(a[u], b[v]));
  return {r, std::move(a), std::move(b), std::sqrt(max_edge)};
}

/// Squared hinge over all pairs: edges want d^2 <= 1, non-edges d^2 >= 1 + level.
inline double distance_penalty(const DiGraph& g, std::size_t r, double level, const Vector& x, Vector& grad) {
  const std::size_t n = g.size();
  std::fill(grad.begin(), grad.end(), 0.0);
  double f = 0.0;
  for (Node u = 0; u < n; ++u) {
    const double* xu = &x[u * r];
    for (Node v = 0; v < n; ++v) {
      const double* yv = &x[(n + v) * r];
      double d2 = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        const double d = xu[k] - yv[k];
        d2 += d * d;
      }
      double viol;
      double sign;
      if (g.has_edge(u, v)) {
        viol = d2 - 1.0;
        sign = 1.0;
      } else {
        viol = 1.0 + level - d2;
        sign = -1.0;
      }
      if (viol <= 0.0) continue;
      f += viol * viol;
      // d(viol^2)/dx_u = 2 viol * sign * 2 (x_u - y_v)
      const double coef = 4.0 * viol * sign;
      double* gu = &grad[u * r];
      double* gv = &grad[(n + v) * r];
      for (std::size_t k = 0; k < r; ++k) {
        const double d = coef * (xu[k] - yv[k]);
        gu[k] += d;
        gv[k] -= d;
      }
    }
  }
  return f;
}

inline double distance_residual(const DiGraph& g, const DistanceEmbedding& e, double delta) {
  const double t = e.uniform_threshold();
  double worst = 0.0;
  if (!std::isfinite(delta)) delta = 0.0;
  for (Node u = 0; u < g.size(); ++u)
    for (Node v = 0; v < g.size(); ++v) {
      const double d2 = squared_distance(e.phi_out[u], e.phi_in[v]);
      worst = std::max(worst, g.has_edge(u, v) ? d2 - t * t : t * t * (1.0 + delta) - d2);
    }
  return worst;
}

inline double similarity_residual(const DiGraph& g, const SimilarityEmbedding& e, double delta) {
  double worst = 0.0;
  if (!std::isfinite(delta)) delta = 0.0;
  for (Node u = 0; u < g.size(); ++u)
    for (Node v = 0; v < g.size(); ++v) {
      const double s = dot(e.phi_l[u], e.phi_r[v]);
      worst = std::max(worst, g.has_edge(u, v) ? e.threshold - s : s - (e.threshold - delta));
    }
  return worst;
}

/// Shared bisection driver. `attempt(level, start)` tries to reach `level`
/// from the packed start point and returns the measured delta with the point
/// it reached.
template <typename Attempt>
struct Bisection {
  double lo;
  double hi;
  Vector best;
  int levels = 0;
  bool converged = false;

  void run(double tol, Attempt&& attempt, int max_levels = 60) {
    while (levels < max_levels) {
      if (hi - lo <= tol * std::max(1.0, lo)) {
        converged = true;
        return;
      }
      const double level = 0.5 * (lo + hi);
      ++levels;
      Vector point = best;
      const double reached = attempt(level, point);
      if (reached >= level) {
        lo = std::min(reached, hi);
        best = std::move(point);
      } else {
        hi = level;
      }
    }
  }
};

}  // namespace detail

/// Largest delta such that g has a delta-robust distance embedding (t = 1).
/// Unbounded instances (every non-edge cross-component in the closeness graph)
/// return delta = +inf with a collapsed-component witness. Bounded instances
/// bisect between the spectral embedding's robustness and the hop bound.
inline SolveResult max_distance_robustness(const DiGraph& g, const SolverConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = g.size();
  if (n == 0) throw Error(Errc::EmptyGraph, "graph has no nodes");
  const double cap = cfg.cap_for(n);

  const detail::ClosenessGraph close(g);
  const std::optional<double> bound = detail::hop_bound(g, close);
  SolveResult res;
  if (!bound) {
    DistanceEmbedding e = detail::separated_components(close, cap);
    res.delta = measure_distance_robustness(g, e).effective_delta;
    res.residual = detail::distance_residual(g, e, res.delta);
    res.embedding = std::move(e);
    res.status = SolveStatus::Unbounded;
    return res;
  }

  // Warm start: the spectral embedding scaled so its largest edge distance is 1.
  const DistanceEmbedding spectral = svd_construct(g).distance;
  const RobustnessResult warm = measure_distance_robustness(g, spectral);
  const double tau = warm.effective_threshold;
  const std::size_t r = std::max(cfg.rank_for(n), spectral.dim);
  Vector start = detail::pack(spectral.phi_out, spectral.phi_in, r);
  if (tau > 1e-9)
    for (auto& x : start) x /= tau;

  using Fn = std::function<double(double, Vector&)>;
  const double tol = cfg.bisection_tolerance;
  Fn attempt = [&](double level, Vector& point) {
    // Aim slightly above the level so a near-converged point still measures >= level.
    const double aim = level + 0.25 * tol * std::max(1.0, level);
    detail::LbfgsOptions opt;
    opt.max_iterations = cfg.max_iterations;
    opt.stall_fraction = kStallFraction;
    const detail::Objective f = [&](const Vector& x, Vector& grad) {
      return detail::distance_penalty(g, r, aim, x, grad);
    };
    const Vector origin = point;
    double best_delta = -1.0;
    Vector best_point = point;
    for (int k = 0; k < cfg.restarts; ++k) {
      Vector x = origin;
      if (k > 0) {
        Rng rng(split_seed(cfg.seed, static_cast<std::uint64_t>(k)));
        detail::perturb(x, rng, 0.3 / std::sqrt(static_cast<double>(k)));
      }
      detail::lbfgs_minimize(f, x, opt);
      const DistanceEmbedding e = detail::distance_from_packed(g, x, r);
      const RobustnessResult m = measure_distance_robustness(g, e);
      const double d = m.valid ? m.delta : -1.0;
      if (d > best_delta) {
        best_delta = d;
        best_point = std::move(x);
      }
      if (best_delta >= level) break;
    }
    point = std::move(best_point);
    return best_delta;
  };

  const double lo = std::min(warm.effective_delta, *bound);
  detail::Bisection<Fn&> bis{lo, std::min(*bound, cap), start};
  bis.run(tol, attempt);

  DistanceEmbedding best = detail::distance_from_packed(g, bis.best, r);
  const RobustnessResult m = measure_distance_robustness(g, best);
  // The packed warm start can lose to the spectral embedding only through
  // rescaling round-off; keep whichever measures higher.
  if (!m.valid || m.delta < warm.effective_delta) {
    best = spectral;
    best.threshold = tau;
  }
  res.delta = measure_distance_robustness(g, best).delta;
  res.residual = detail::distance_residual(g, best, res.delta);
  res.embedding = std::move(best);
  res.levels = bis.levels;
  res.status = bis.converged ? SolveStatus::Optimal : SolveStatus::Feasible;
  return res;
}

namespace detail {

/// Unit vectors x = u/||u||, threshold variable last. Edges want x.y >= t,
/// non-edges x.y <= t - level.
inline double similarity_penalty(const DiGraph& g, std::size_t r, double level, const Vector& p, Vector& grad) {
  const std::size_t n = g.size();
  const std::size_t m = 2 * n;
  std::fill(grad.begin(), grad.end(), 0.0);
  const double t = p[m * r];

  std::vector<double> len(m);
  Vector unit(m * r);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < r; ++k) s += p[i * r + k] * p[i * r + k];
    len[i] = std::max(std::sqrt(s), 1e-12);
    for (std::size_t k = 0; k < r; ++k) unit[i * r + k] = p[i * r + k] / len[i];
  }

  // Gradient w.r.t. the unit vectors first, projected back afterwards.
  Vector gu(m * r, 0.0);
  double gt = 0.0;
  double f = 0.0;
  for (Node u = 0; u < n; ++u) {
    const double* a = &unit[u * r];
    for (Node v = 0; v < n; ++v) {
      const double* b = &unit[(n + v) * r];
      double s = 0.0;
      for (std::size_t k = 0; k < r; ++k) s += a[k] * b[k];
      double viol;
      double ds;  // d viol / d s
      if (g.has_edge(u, v)) {
        viol = t - s;
        ds = -1.0;
      } else {
        viol = s - t + level;
        ds = 1.0;
      }
      if (viol <= 0.0) continue;
      f += viol * viol;
      const double c = 2.0 * viol * ds;
      gt += -c;  // d viol / d t = -ds
      for (std::size_t k = 0; k < r; ++k) {
        gu[u * r + k] += c * b[k];
        gu[(n + v) * r + k] += c * a[k];
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double radial = 0.0;
    for (std::size_t k = 0; k < r; ++k) radial += gu[i * r + k] * unit[i * r + k];
    for (std::size_t k = 0; k < r; ++k)
      grad[i * r + k] = (gu[i * r + k] - radial * unit[i * r + k]) / len[i];
  }
  grad[m * r] = gt;
  return f;
}

inline SimilarityEmbedding similarity_from_packed(const DiGraph& g, const Vector& p, std::size_t r) {
  auto [a, b] = unpack(p, g.size(), r);
  for (auto* fam : {&a, &b})
    for (auto& v : *fam) {
      if (norm(v) == 0.0) v[0] = 1.0;
      normalize(v);
    }
  double min_edge = kInf;
  for (const auto& [u, v] : g.edges()) min_edge = std::min(min_edge, dot(a[u], b[v]));
  return {r, std::move(a), std::move(b), min_edge};
}

}  // namespace detail

/// Largest delta such that g has a delta-robust spherical similarity
/// embedding, t free. delta <= 2; +inf when there are no edges or no non-edges.
inline SolveResult max_similarity_robustness(const DiGraph& g, const SolverConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = g.size();
  if (n == 0) throw Error(Errc::EmptyGraph, "graph has no nodes");
  const SimilarityEmbedding spectral = svd_construct(g).similarity;

  SolveResult res;
  const std::size_t pairs = n * n;
  if (g.edge_count() == 0 || g.edge_count() == pairs) {
    SimilarityEmbedding e = spectral;
    if (g.edge_count() == pairs) {
      // Every pair is an edge: all vectors on one point, threshold 1.
      e.dim = 1;
      e.phi_l.assign(n, Vector{1.0});
      e.phi_r.assign(n, Vector{1.0});
      e.threshold = 1.0;
    }
    res.delta = kInf;
    res.embedding = std::move(e);
    res.status = SolveStatus::Unbounded;
    return res;
  }

  const RobustnessResult warm = measure_similarity_robustness(g, spectral);
  const std::size_t r = std::max(cfg.rank_for(n), spectral.dim);
  Vector start = detail::pack(spectral.phi_l, spectral.phi_r, r);
  start.push_back(warm.effective_threshold);

  using Fn = std::function<double(double, Vector&)>;
  const double tol = cfg.bisection_tolerance;
  Fn attempt = [&](double level, Vector& point) {
    const double aim = level + 0.25 * tol * std::max(1.0, level);
    detail::LbfgsOptions opt;
    opt.max_iterations = cfg.max_iterations;
    opt.stall_fraction = kStallFraction;
    const detail::Objective f = [&](const Vector& x, Vector& grad) {
      return detail::similarity_penalty(g, r, aim, x, grad);
    };
    const Vector origin = point;
    double best_delta = -1.0;
    Vector best_point = point;
    for (int k = 0; k < cfg.restarts; ++k) {
      Vector x = origin;
      if (k > 0) {
        Rng rng(split_seed(cfg.seed, static_cast<std::uint64_t>(k)));
        detail::perturb(x, rng, 0.3 / std::sqrt(static_cast<double>(k)));
      }
      detail::lbfgs_minimize(f, x, opt);
      const SimilarityEmbedding e = detail::similarity_from_packed(g, x, r);
      const RobustnessResult m = measure_similarity_robustness(g, e);
      const double d = m.valid ? m.delta : -1.0;
      if (d > best_delta) {
        best_delta = d;
        best_point = std::move(x);
        best_point.back() = e.threshold;
      }
      if (best_delta >= level) break;
    }
    point = std::move(best_point);
    return best_delta;
  };

  detail::Bisection<Fn&> bis{warm.effective_delta, 2.0, start};
  bis.run(tol, attempt);

  SimilarityEmbedding best = detail::similarity_from_packed(g, bis.best, r);
  const RobustnessResult m = measure_similarity_robustness(g, best);
  if (!m.valid || m.delta < warm.effective_delta) {
    best = spectral;
    best.threshold = warm.effective_threshold;
  }
  res.delta = measure_similarity_robustness(g, best).delta;
  res.residual = detail::similarity_residual(g, best, res.delta);
  res.embedding = std::move(best);
  res.levels = bis.levels;
  res.status = bis.converged ? SolveStatus::Optimal : SolveStatus::Feasible;
  return res;
}

// ---------------------------------------------------------------------------
// Translational fitting
// ---------------------------------------------------------------------------

namespace detail {

/// Margin added on both sides of every translational constraint.
inline constexpr double kTranslationalMargin = 1e-3;

/// Layout: phi (n x d), w (d), s (n); z = w/||w||, t_u^2 = s_u^2.
inline double translational_penalty(const DiGraph& g, std::size_t d, const Vector& p, Vector& grad) {
  const std::size_t n = g.size();
  std::fill(grad.begin(), grad.end(), 0.0);
  const double* w = &p[n * d];
  const double* s = &p[n * d + d];
  double wlen = 0.0;
  for (std::size_t k = 0; k < d; ++k) wlen += w[k] * w[k];
  wlen = std::max(std::sqrt(wlen), 1e-12);
  Vector z(d);
  for (std::size_t k = 0; k < d; ++k) z[k] = w[k] / wlen;

  Vector gz(d, 0.0);
  Vector diff(d);
  double f = 0.0;
  for (Node u = 0; u < n; ++u) {
    const double tu2 = s[u] * s[u];
    for (Node v = 0; v < n; ++v) {
      if (u == v) continue;
      double d2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        diff[k] = p[v * d + k] - p[u * d + k] - z[k];
        d2 += diff[k] * diff[k];
      }
      const bool edge = g.has_edge(u, v);
      const double viol = edge ? d2 - tu2 + kTranslationalMargin : tu2 + kTranslationalMargin - d2;
      if (viol <= 0.0) continue;
      f += viol * viol;
      const double sign = edge ? 1.0 : -1.0;
      const double c = 2.0 * viol * sign;  // times d(d2)
      for (std::size_t k = 0; k < d; ++k) {
        const double gd = c * 2.0 * diff[k];
        grad[v * d + k] += gd;
        grad[u * d + k] -= gd;
        gz[k] -= gd;
      }
      grad[n * d + d + u] += -c * 2.0 * s[u];
    }
  }
  double radial = 0.0;
  for (std::size_t k = 0; k < d; ++k) radial += gz[k] * z[k];
  for (std::size_t k = 0; k < d; ++k) grad[n * d + k] = (gz[k] - radial * z[k]) / wlen;
  return f;
}

/// Node order used to seed the first restart: topological when acyclic,
/// otherwise reverse DFS finishing order.
inline std::vector<Node> seed_order(const DiGraph& g) {
  try {
    return topological_order(g);
  } catch (const Error&) {
  }
  const std::size_t n = g.size();
  std::vector<std::vector<Node>> next(n);
  for (const auto& [u, v] : g.edges())
    if (u != v) next[u].push_back(v);
  std::vector<bool> seen(n, false);
  std::vector<Node> finish;
  for (Node root = 0; root < n; ++root) {
    if (seen[root]) continue;
    std::vector<std::pair<Node, std::size_t>> stack{{root, 0}};
    seen[root] = true;
    while (!stack.empty()) {
      auto& [x, i] = stack.back();
      if (i < next[x].size()) {
        const Node y = next[x][i++];
        if (!seen[y]) {
          seen[y] = true;
          stack.push_back({y, 0});
        }
      } else {
        finish.push_back(x);
        stack.pop_back();
      }
    }
  }
  std::reverse(finish.begin(), finish.end());
  return finish;
}

}  // namespace detail

/// Seeded multi-restart search for a translational embedding in n+1
/// dimensions. Returns an embedding only when verify_translational accepts it.
inline std::optional<TranslationalEmbedding> fit_translational(const DiGraph& g,
                                                               const SolverConfig& cfg = {}) {
  cfg.validate();
  const std::size_t n = g.size();
  if (n == 0) return TranslationalEmbedding{1, {}, {1.0}, {}};
  const std::size_t d = n + 1;

  const std::vector<Node> order = detail::seed_order(g);
  std::vector<double> position(n);
  for (std::size_t k = 0; k < n; ++k) position[order[k]] = static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(n - 1, 1));

  const detail::Objective f = [&](const Vector& x, Vector& grad) {
    return detail::translational_penalty(g, d, x, grad);
  };
  detail::LbfgsOptions opt;
  opt.max_iterations = std::max(cfg.max_iterations, 1000);

  for (int k = 0; k < cfg.restarts; ++k) {
    Rng rng(split_seed(cfg.seed, static_cast<std::uint64_t>(k)));
    Vector x(n * d + d + n, 0.0);
    const double noise = k == 0 ? 0.1 : 0.5;
    for (Node u = 0; u < n; ++u) {
      x[u * d] = k == 0 ? position[u] : rng.normal();
      for (std::size_t c = 1; c < d; ++c) x[u * d + c] = noise * rng.normal();
    }
    x[n * d] = 1.0;
    if (k > 0)
      for (std::size_t c = 1; c < d; ++c) x[n * d + c] = 0.3 * rng.normal();
    for (Node u = 0; u < n; ++u) x[n * d + d + u] = 1.0;

    detail::lbfgs_minimize(f, x, opt);

    TranslationalEmbedding e;
    e.dim = d;
    for (Node u = 0; u < n; ++u) e.phi.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(u * d),
                                                    x.begin() + static_cast<std::ptrdiff_t>((u + 1) * d));
    e.z.assign(x.begin() + static_cast<std::ptrdiff_t>(n * d), x.begin() + static_cast<std::ptrdiff_t>(n * d + d));
    if (norm(e.z) == 0.0) continue;
    detail::normalize(e.z);
    for (Node u = 0; u < n; ++u) e.thresholds.push_back(std::abs(x[n * d + d + u]));
    if (verify_translational(g, e)) return e;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Exact optima for graphs on at most two nodes
// ---------------------------------------------------------------------------

enum class RobustnessKind { Distance, Similarity };

namespace detail {

/// Every edge hop contributes at most 1 to the displacement along a line.
/// Searches the hop length on a grid over [-5, 5] and returns the best
/// feasible one (|h| <= 1).
inline double best_hop_length() {
  double best = 0.0;
  for (int i = -5000; i <= 5000; ++i) {
    const double h = 1e-3 * i;
    if (std::abs(h) <= 1.0 + 1e-12) best = std::max(best, std::abs(h));
  }
  return best;
}

inline double tiny_distance_oracle(const DiGraph& g) {
  const ClosenessGraph c(g);
  double best = kInf;
  for (Node u = 0; u < g.size(); ++u)
    for (Node v = 0; v < g.size(); ++v) {
      if (g.has_edge(u, v) || !c.same_component(u, v)) continue;
      // Along a line the non-edge displacement is the sum of its hops; the
      // sum is maximized hop by hop.
      const auto hops = c.hops_from(u)[c.n + v];
      const double reach = static_cast<double>(hops) * best_hop_length();
      best = std::min(best, reach * reach - 1.0);
    }
  return best;
}

/// delta of the 2-D configuration with x_0 at angle 0 and the others at the
/// given angles (x_1, y_0, y_1).
inline double circle_delta(const DiGraph& g, const std::array<double, 3>& a) {
  const std::size_t n = g.size();
  const std::array<double, 2> xs{0.0, a[0]};
  const std::array<double, 2> ys{a[1], a[2]};
  double min_edge = kInf, max_non = -kInf;
  for (Node u = 0; u < n; ++u)
    for (Node v = 0; v < n; ++v) {
      const double s = std::cos(xs[u] - ys[v]);
      if (g.has_edge(u, v)) min_edge = std::min(min_edge, s);
      else max_non = std::max(max_non, s);
    }
  return min_edge - max_non;
}

inline double tiny_similarity_oracle(const DiGraph& g) {
  const std::size_t n = g.size();
  if (g.edge_count() == 0 || g.edge_count() == n * n) return kInf;
  constexpr double kDeg = std::numbers::pi / 180.0;
  // Unused angles (n = 1) stay at 0 through a one-point range.
  const int hi1 = n == 2 ? 360 : 1;
  const int hi2 = n == 2 ? 360 : 1;
  std::array<double, 360> cosine{};
  for (int i = 0; i < 360; ++i) cosine[static_cast<std::size_t>(i)] = std::cos(i * kDeg);
  auto coarse = [&](const std::array<int, 4>& deg) {  // x0, x1, y0, y1 in degrees
    double min_edge = kInf, max_non = -kInf;
    for (Node u = 0; u < n; ++u)
      for (Node v = 0; v < n; ++v) {
        const double s = cosine[static_cast<std::size_t>((deg[u] - deg[2 + v] + 360) % 360)];
        if (g.has_edge(u, v)) min_edge = std::min(min_edge, s);
        else max_non = std::max(max_non, s);
      }
    return min_edge - max_non;
  };
  double best = -kInf;
  std::vector<std::array<double, 3>> top;
  for (int i = 0; i < hi1; ++i)
    for (int j = 0; j < 360; ++j)
      for (int k = 0; k < hi2; ++k) {
        const std::array<double, 3> a{i * kDeg, j * kDeg, k * kDeg};
        const double d = coarse({0, i, j, k});
        if (d > best + 1e-12) {
          best = d;
          top = {a};
        } else if (d > best - 1e-12 && top.size() < 8) {
          top.push_back(a);
        }
      }
  // Refine around each coarse optimum at step 1e-3 rad within +-2 degrees.
  const int span = static_cast<int>(std::ceil(2.0 * kDeg / 1e-3));
  for (const auto& c : top) {
    const int s1 = n == 2 ? span : 0;
    for (int i = -s1; i <= s1; ++i)
      for (int j = -span; j <= span; ++j)
        for (int k = -s1; k <= s1; ++k) {
          const std::array<double, 3> a{c[0] + 1e-3 * i, c[1] + 1e-3 * j, c[2] + 1e-3 * k};
          best = std::max(best, circle_delta(g, a));
        }
  }
  return best;
}

}  // namespace detail

/// Optimal robustness for n <= 2 by case analysis and grid search; +inf when
/// the non-edge constraints are vacuous or cross-component.
inline double oracle_robustness_tiny(const DiGraph& g, RobustnessKind kind) {
  if (g.size() > 2) throw Error(Errc::TooLarge, "oracle handles at most 2 nodes");
  if (g.size() == 0) throw Error(Errc::EmptyGraph, "graph has no nodes");
  return kind == RobustnessKind::Distance ? detail::tiny_distance_oracle(g)
                                          : detail::tiny_similarity_oracle(g);
}

}  // namespace relembed
