#pragma once

// Graph and embedding summary used by `relembed report`. Key order is fixed;
// see README.md for the schema.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "relembed/compression.hpp"
#include "relembed/constructions.hpp"
#include "relembed/embeddings.hpp"
#include "relembed/graph.hpp"
#include "relembed/io.hpp"

namespace relembed {

struct LabeledEmbedding {
  std::string source;
  AnyEmbedding embedding;
};

namespace detail {

/// Largest pairwise distance among all vectors over the largest norm; 0 for
/// an all-zero family.
inline double similarity_diameter_ratio(const SimilarityEmbedding& e) {
  VectorFamily all = e.phi_l;
  all.insert(all.end(), e.phi_r.begin(), e.phi_r.end());
  double diam2 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    b2 = std::max(b2, squared_norm(all[i]));
    for (std::size_t j = i + 1; j < all.size(); ++j) diam2 = std::max(diam2, squared_distance(all[i], all[j]));
  }
  return b2 > 0.0 ? std::sqrt(diam2 / b2) : 0.0;
}

inline Json embedding_block(const DiGraph& g, const LabeledEmbedding& le, std::size_t& d_dist,
                            std::size_t& d_sim) {
  Json b;
  b["source"] = le.source;
  b["kind"] = kind_name(le.embedding);
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, DistanceEmbedding>) {
          const DistanceEmbedding u = uniformize_thresholds(e);
          const RobustnessResult r = measure_distance_robustness(g, u);
          const double t = u.uniform_threshold();
          b["dim"] = u.dim;
          b["threshold"] = json_number(t);
          b["measured_delta"] = json_number(r.delta);
          b["diameter_ratio"] = t > 0.0 ? json_number(diameter_stats(u).diameter_ratio) : Json("inf");
          if (r.valid) d_dist = std::min(d_dist, u.dim);
        } else if constexpr (std::is_same_v<T, SimilarityEmbedding>) {
          const RobustnessResult r = measure_similarity_robustness(g, e);
          b["dim"] = e.dim;
          b["threshold"] = json_number(e.threshold);
          b["measured_delta"] = json_number(r.delta);
          b["diameter_ratio"] = json_number(similarity_diameter_ratio(e));
          if (r.valid) d_sim = std::min(d_sim, e.dim);
        } else if constexpr (std::is_same_v<T, TranslationalEmbedding>) {
          b["dim"] = e.dim;
          b["threshold"] =
              json_number(e.thresholds.empty() ? 0.0 : *std::max_element(e.thresholds.begin(), e.thresholds.end()));
          b["verified"] = verify_translational(g, e).ok;
        } else {
          const bool ok = verify_hamming(g, e).ok;
          b["dim"] = e.k;
          b["threshold"] = e.dist_threshold;
          b["verified"] = ok;
          if (ok) {
            d_dist = std::min(d_dist, e.k);
            d_sim = std::min(d_sim, e.k);
          }
        }
      },
      le.embedding);
  return b;
}

}  // namespace detail

/// Spectrum, the two spectral robustness bounds, one block per embedding
/// (the spectral construction's two readings always come first), and the
/// dimension upper bounds the verified blocks imply.
inline Json build_report(const DiGraph& g, const std::vector<LabeledEmbedding>& extra = {}) {
  const Spectrum sp = spectrum(g);
  const double dplus = static_cast<double>(std::max<std::size_t>(g.max_out_degree(), 1));
  const double dminus = static_cast<double>(std::max<std::size_t>(g.max_in_degree(), 1));

  Json j;
  j["n"] = g.size();
  j["edge_count"] = g.edge_count();
  j["max_in_degree"] = g.max_in_degree();
  j["max_out_degree"] = g.max_out_degree();
  j["rank"] = sp.rank;
  j["sigma1"] = json_number(sp.sigma1);
  j["bound_svd"] = json_number(1.0 / std::max(sp.sigma1, 1.0));
  j["bound_degree"] = json_number(std::sqrt(1.0 / (dplus * dminus)));

  std::vector<LabeledEmbedding> all;
  if (g.size() > 0) {
    const SpectralEmbedding s = svd_construct(g);
    all.push_back({"svd", s.distance});
    all.push_back({"svd", s.similarity});
  }
  all.insert(all.end(), extra.begin(), extra.end());

  std::size_t d_dist = SIZE_MAX, d_sim = SIZE_MAX;
  Json blocks = Json::array();
  for (const auto& le : all) blocks.push_back(detail::embedding_block(g, le, d_dist, d_sim));
  j["embeddings"] = std::move(blocks);

  Json dims;
  auto bound = [](std::size_t d) { return d == SIZE_MAX ? Json(nullptr) : Json(d); };
  dims["d_dist"] = bound(d_dist);
  dims["d_sim"] = bound(d_sim);
  dims["d_sign"] = d_sim == SIZE_MAX ? Json(nullptr) : Json(d_sim + 1);
  j["dimension_upper_bounds"] = std::move(dims);
  return j;
}

/// Plain-text rendering of a report built by build_report.
inline std::string report_table(const Json& r) {
  auto text = [](const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
      return std::string(buf);
    }
    return v.dump();
  };
  std::string out;
  for (const char* key : {"n", "edge_count", "max_in_degree", "max_out_degree", "rank", "sigma1",
                          "bound_svd", "bound_degree"}) {
    char line[96];
    std::snprintf(line, sizeof line, "%-16s %s\n", key, text(r.at(key)).c_str());
    out += line;
  }
  out += "\nsource        kind           dim  threshold     delta/verified  diameter_ratio\n";
  for (const auto& b : r.at("embeddings")) {
    const bool has_delta = b.contains("measured_delta");
    char line[160];
    std::snprintf(line, sizeof line, "%-13s %-13s %5s  %-12s  %-14s  %s\n", text(b.at("source")).c_str(),
                  text(b.at("kind")).c_str(), text(b.at("dim")).c_str(), text(b.at("threshold")).c_str(),
                  text(has_delta ? b.at("measured_delta") : b.at("verified")).c_str(),
                  b.contains("diameter_ratio") ? text(b.at("diameter_ratio")).c_str() : "-");
    out += line;
  }
  const Json& d = r.at("dimension_upper_bounds");
  out += "\nupper bounds    d_dist <= " + text(d.at("d_dist")) + ", d_sim <= " + text(d.at("d_sim")) +
         ", d_sign <= " + text(d.at("d_sign")) + "\n";
  return out;
}

}  // namespace relembed
