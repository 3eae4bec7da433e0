#pragma once

// Dimension reduction that keeps robustness: Gaussian random projection for
// distance embeddings and random-halfspace bit codes for spherical similarity
// embeddings.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "relembed/embeddings.hpp"
#include "relembed/error.hpp"
#include "relembed/graph.hpp"
#include "relembed/linalg.hpp"
#include "relembed/rng.hpp"

namespace relembed {

inline constexpr int kMaxCompressionRetries = 16;

// ---------------------------------------------------------------------------
// Johnson-Lindenstrauss projection
// ---------------------------------------------------------------------------

/// m = ceil(4 ln(4 n^2) / (eps^2/2 - eps^3/3)) with eps = delta / 8: the usual
/// JL bound unioned over the 4n^2 (out, in) vector pairs.
inline std::size_t jl_target_dimension(std::size_t n, double delta) {
  if (n == 0) return 0;
  const double eps = delta / 8.0;
  const double nn = static_cast<double>(n);
  const double m = 4.0 * std::log(4.0 * nn * nn) / (eps * eps / 2.0 - eps * eps * eps / 3.0);
  return static_cast<std::size_t>(std::ceil(m));
}

struct JlProjection {
  DistanceEmbedding embedding;
  std::size_t target_dim = 0;
  bool projected = false;
  /// Retry index that produced the accepted projection.
  int attempt = 0;
  RobustnessResult robustness;
};

namespace detail {

/// y = P x / sqrt(m) where P_ij is the (i*d + j)-th normal draw of `rng`.
/// Zero input coordinates are skipped, so padded inputs cost nothing extra.
inline Vector gaussian_project(const Rng& rng, std::span<const double> x, std::size_t m) {
  const std::size_t d = x.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Vector y(m, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    if (x[j] == 0.0) continue;
    for (std::size_t i = 0; i < m; ++i) y[i] += rng.normal_at(i * d + j) * x[j];
  }
  for (auto& v : y) v *= scale;
  return y;
}

}  // namespace detail

/// Projects a delta-robust distance embedding to jl_target_dimension(n, delta)
/// dimensions and accepts the draw only if it is measured (delta/2)-robust;
/// up to 16 seeds are tried. The output threshold is the largest projected
/// edge distance (the input threshold when there are no edges). Inputs already
/// at or below the target dimension are returned unchanged.
inline JlProjection jl_project(const DiGraph& g, const DistanceEmbedding& e, double delta,
                               std::uint64_t seed) {
  const double t = e.uniform_threshold();
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw Error(Errc::InvalidParams, "delta must be positive and finite");
  const RobustnessResult input = measure_distance_robustness(g, e);
  if (!input.valid || input.delta < delta - kTolerance * std::max(1.0, delta))
    throw Error(Errc::NotRobust, "input is not " + std::to_string(delta) + "-robust");

  JlProjection out;
  out.target_dim = jl_target_dimension(e.size(), delta);
  if (out.target_dim >= e.dim) {
    out.embedding = e;
    out.robustness = input;
    return out;
  }

  const std::size_t m = out.target_dim;
  const std::size_t n = e.size();
  for (int attempt = 0; attempt < kMaxCompressionRetries; ++attempt) {
    const Rng rng(split_seed(seed, static_cast<std::uint64_t>(attempt)));
    DistanceEmbedding p;
    p.dim = m;
    for (Node u = 0; u < n; ++u) {
      p.phi_out.push_back(detail::gaussian_project(rng, e.phi_out[u], m));
      p.phi_in.push_back(detail::gaussian_project(rng, e.phi_in[u], m));
    }
    double max_edge = 0.0;
    for (const auto& [u, v] : g.edges())
      max_edge = std::max(max_edge, squared_distance(p.phi_out[u], p.phi_in[v]));
    p.threshold = g.edge_count() > 0 ? std::sqrt(max_edge) : t;

    const RobustnessResult r = measure_distance_robustness(g, p);
    if (r.valid && r.delta >= delta / 2.0 - kTolerance) {
      out.embedding = std::move(p);
      out.projected = true;
      out.attempt = attempt;
      out.robustness = r;
      return out;
    }
  }
  throw Error(Errc::RetriesExhausted, "no projection met delta/2 robustness");
}

// ---------------------------------------------------------------------------
// Hamming-cube codes
// ---------------------------------------------------------------------------

/// Fixed-length bit string packed into 64-bit words.
class BitCode {
 public:
  BitCode() = default;
  explicit BitCode(std::size_t k) : k_(k), words_((k + 63) / 64, 0) {}

  std::size_t size() const noexcept { return k_; }
  bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  void set(std::size_t i, bool bit) {
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    words_[i / 64] = bit ? (words_[i / 64] | mask) : (words_[i / 64] & ~mask);
  }
  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  friend std::size_t hamming_distance(const BitCode& a, const BitCode& b) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i)
      c += static_cast<std::size_t>(std::popcount(a.words_[i] ^ b.words_[i]));
    return c;
  }

  /// Bit 0 is the most significant bit of the first hex digit; the last digit
  /// is zero-padded.
  std::string to_hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s((k_ + 3) / 4, '0');
    for (std::size_t d = 0; d < s.size(); ++d) {
      unsigned nibble = 0;
      for (std::size_t b = 0; b < 4; ++b) {
        const std::size_t i = 4 * d + b;
        nibble = (nibble << 1) | (i < k_ && get(i) ? 1U : 0U);
      }
      s[d] = kDigits[nibble];
    }
    return s;
  }

  static BitCode from_hex(std::string_view hex, std::size_t k) {
    if (hex.size() != (k + 3) / 4) throw Error(Errc::ParseError, "hex code length mismatch");
    BitCode code(k);
    for (std::size_t d = 0; d < hex.size(); ++d) {
      const char c = hex[d];
      unsigned nibble;
      if (c >= '0' && c <= '9') nibble = static_cast<unsigned>(c - '0');
      else if (c >= 'a' && c <= 'f') nibble = static_cast<unsigned>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') nibble = static_cast<unsigned>(c - 'A' + 10);
      else throw Error(Errc::ParseError, "bad hex digit");
      for (std::size_t b = 0; b < 4; ++b) {
        const bool bit = (nibble >> (3 - b)) & 1U;
        const std::size_t i = 4 * d + b;
        if (i < k) code.set(i, bit);
        else if (bit) throw Error(Errc::ParseError, "nonzero padding bit");
      }
    }
    return code;
  }

  friend bool operator==(const BitCode&, const BitCode&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Codes h_L, h_R in {0,1}^k. Read as a distance embedding: edge iff Hamming
/// distance <= dist_threshold. Read as a similarity embedding over +-1 coded
/// bits: edge iff dot >= sim_threshold = k - 2 dist_threshold.
struct HammingEmbedding {
  std::size_t k = 0;
  std::vector<BitCode> codes_l;
  std::vector<BitCode> codes_r;
  std::size_t dist_threshold = 0;
  long long sim_threshold = 0;

  std::size_t size() const noexcept { return codes_l.size(); }

  void validate() const {
    if (codes_r.size() != codes_l.size()) throw Error(Errc::SizeMismatch, "code family sizes");
    for (const auto* fam : {&codes_l, &codes_r})
      for (const auto& c : *fam)
        if (c.size() != k) throw Error(Errc::SizeMismatch, "code length differs from k");
    if (dist_threshold > k) throw Error(Errc::InvalidParams, "dist_threshold > k");
  }
};

inline Verdict verify_hamming(const DiGraph& g, const HammingEmbedding& h) {
  h.validate();
  detail::check_size(g, h.size());
  return detail::verify_pairs(g, false, [&](Node u, Node v) {
    return hamming_distance(h.codes_l[u], h.codes_r[v]) <= h.dist_threshold;
  });
}

/// 0/1 coordinates with Euclidean threshold sqrt(dist_threshold).
inline DistanceEmbedding hamming_as_distance(const HammingEmbedding& h) {
  DistanceEmbedding d;
  d.dim = h.k;
  auto expand = [&](const BitCode& c) {
    Vector v(h.k);
    for (std::size_t i = 0; i < h.k; ++i) v[i] = c.get(i) ? 1.0 : 0.0;
    return v;
  };
  for (std::size_t u = 0; u < h.size(); ++u) {
    d.phi_out.push_back(expand(h.codes_l[u]));
    d.phi_in.push_back(expand(h.codes_r[u]));
  }
  d.threshold = std::sqrt(static_cast<double>(h.dist_threshold));
  return d;
}

/// +-1 coordinates with dot threshold k - 2 dist_threshold.
inline SimilarityEmbedding hamming_as_similarity(const HammingEmbedding& h) {
  SimilarityEmbedding s;
  s.dim = h.k;
  auto expand = [&](const BitCode& c) {
    Vector v(h.k);
    for (std::size_t i = 0; i < h.k; ++i) v[i] = c.get(i) ? 1.0 : -1.0;
    return v;
  };
  for (std::size_t u = 0; u < h.size(); ++u) {
    s.phi_l.push_back(expand(h.codes_l[u]));
    s.phi_r.push_back(expand(h.codes_r[u]));
  }
  s.threshold = static_cast<double>(h.sim_threshold);
  return s;
}

/// Default constant C in k = ceil(C ln(n+1) / delta^2).
inline constexpr double kHammingConstant = 64.0;

inline std::size_t hamming_code_length(std::size_t n, double delta,
                                       double constant = kHammingConstant) {
  return static_cast<std::size_t>(
      std::ceil(constant * std::log(static_cast<double>(n) + 1.0) / (delta * delta)));
}

/// k directions drawn uniformly from the unit sphere in R^dim.
inline std::vector<Vector> random_directions(std::size_t dim, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> dirs;
  dirs.reserve(k);
  while (dirs.size() < k) {
    Vector r(dim);
    for (auto& x : r) x = rng.normal();
    const double len = norm(r);
    if (len == 0.0) continue;
    dirs.push_back(scaled(r, 1.0 / len));
  }
  return dirs;
}

/// h_i(x) = 1 iff r_i . x >= 0.
inline BitCode halfspace_code(const std::vector<Vector>& dirs, std::span<const double> x) {
  BitCode c(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) c.set(i, dot(dirs[i], x) >= 0.0);
  return c;
}

struct HammingMargins {
  /// Edges must sit at Hamming distance <= edge_bound ...
  double edge_bound = 0.0;
  /// ... and non-edges at >= non_edge_bound.
  double non_edge_bound = 0.0;
};

/// For a spherical embedding with edges at dot >= t + delta and non-edges at
/// dot <= t: k (acos t - 2 delta/3) / pi and k (acos t - delta/3) / pi.
inline HammingMargins hamming_margins(std::size_t k, double t, double delta) {
  const double a = std::acos(std::clamp(t, -1.0, 1.0));
  const double kk = static_cast<double>(k);
  return {kk * (a - 2.0 * delta / 3.0) / std::numbers::pi, kk * (a - delta / 3.0) / std::numbers::pi};
}

struct HammingResult {
  HammingEmbedding embedding;
  HammingMargins margins;
  /// Non-edge dot level t = (embedding threshold) - delta used in the margins.
  double base_threshold = 0.0;
  int attempt = 0;
};

/// Random-halfspace codes of a spherical similarity embedding whose edges have
/// dot >= t_e and non-edges dot <= t_e - delta. A draw is accepted when every
/// pair respects its margin and the thresholded distance reproduces the edge
/// set; up to 16 seeds are tried.
inline HammingResult hamming_embed(const DiGraph& g, const SimilarityEmbedding& e, double delta,
                                   std::uint64_t seed, double constant = kHammingConstant) {
  e.validate();
  if (!e.spherical()) throw Error(Errc::NotSpherical, "hamming_embed needs unit vectors");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw Error(Errc::InvalidParams, "delta must be positive and finite");
  const RobustnessResult input = measure_similarity_robustness(g, e);
  if (!input.valid || input.delta < delta - kTolerance * std::max(1.0, delta))
    throw Error(Errc::NotRobust, "input is not " + std::to_string(delta) + "-robust");

  const std::size_t n = e.size();
  HammingResult out;
  out.base_threshold = e.threshold - delta;
  const std::size_t k = hamming_code_length(n, delta, constant);
  out.margins = hamming_margins(k, out.base_threshold, delta);
  const double a = std::acos(std::clamp(out.base_threshold, -1.0, 1.0));
  const double mid = static_cast<double>(k) * (a - delta / 2.0) / std::numbers::pi;
  const auto dist_threshold =
      static_cast<std::size_t>(std::clamp(std::round(mid), 0.0, static_cast<double>(k)));

  for (int attempt = 0; attempt < kMaxCompressionRetries; ++attempt) {
    const auto dirs = random_directions(e.dim, k, split_seed(seed, static_cast<std::uint64_t>(attempt)));
    HammingEmbedding h;
    h.k = k;
    h.dist_threshold = dist_threshold;
    h.sim_threshold = static_cast<long long>(k) - 2 * static_cast<long long>(dist_threshold);
    for (Node u = 0; u < n; ++u) {
      h.codes_l.push_back(halfspace_code(dirs, e.phi_l[u]));
      h.codes_r.push_back(halfspace_code(dirs, e.phi_r[u]));
    }
    bool ok = true;
    for (Node u = 0; u < n && ok; ++u)
      for (Node v = 0; v < n && ok; ++v) {
        const auto d = static_cast<double>(hamming_distance(h.codes_l[u], h.codes_r[v]));
        ok = g.has_edge(u, v) ? d <= out.margins.edge_bound : d >= out.margins.non_edge_bound;
      }
    if (ok && verify_hamming(g, h)) {
      out.embedding = std::move(h);
      out.attempt = attempt;
      return out;
    }
  }
  throw Error(Errc::RetriesExhausted, "no direction set met the Hamming margins");
}

/// Fraction of the k halfspace bits on which x and y disagree.
inline double disagreement_rate(std::span<const double> x, std::span<const double> y,
                                std::size_t k, std::uint64_t seed) {
  const auto dirs = random_directions(x.size(), k, seed);
  std::size_t differ = 0;
  for (const auto& r : dirs) differ += (dot(r, x) >= 0.0) != (dot(r, y) >= 0.0);
  return static_cast<double>(differ) / static_cast<double>(k);
}

}  // namespace relembed
