#pragma once

// Embedding files: one JSON object per file with a fixed key order.
//
//   {"kind": "distance" | "similarity" | "translational" | "hamming",
//    "n": N, "dim": d, "spherical": bool,
//    <vectors and thresholds for the kind>,
//    "metadata": {"operation": str, "seed": int | null, "measured_delta": num | "inf" | null}}
//
// Non-finite numbers are written as the strings "inf" / "-inf".

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "relembed/compression.hpp"
#include "relembed/embeddings.hpp"
#include "relembed/error.hpp"

namespace relembed {

using Json = nlohmann::ordered_json;

using AnyEmbedding =
    std::variant<DistanceEmbedding, SimilarityEmbedding, TranslationalEmbedding, HammingEmbedding>;

struct EmbeddingMetadata {
  std::string operation;
  std::optional<std::uint64_t> seed;
  std::optional<double> measured_delta;
};

struct EmbeddingFile {
  AnyEmbedding embedding;
  EmbeddingMetadata metadata;
};

inline std::string_view kind_name(const AnyEmbedding& e) {
  static constexpr std::string_view kNames[] = {"distance", "similarity", "translational", "hamming"};
  return kNames[e.index()];
}

/// Finite numbers as JSON numbers, infinities as "inf" / "-inf".
inline Json json_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return nullptr;
  return x;
}

inline double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw Error(Errc::ParseError, "expected a number or \"inf\", got " + j.dump());
}

namespace detail {

inline Json family_to_json(const VectorFamily& f) {
  Json a = Json::array();
  for (const auto& v : f) {
    Json row = Json::array();
    for (double x : v) row.push_back(json_number(x));
    a.push_back(std::move(row));
  }
  return a;
}

inline Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw Error(Errc::ParseError, "expected an array of numbers");
  Vector v;
  for (const auto& x : j) v.push_back(number_from_json(x));
  return v;
}

inline VectorFamily family_from_json(const Json& j) {
  if (!j.is_array()) throw Error(Errc::ParseError, "expected an array of vectors");
  VectorFamily f;
  for (const auto& row : j) f.push_back(vector_from_json(row));
  return f;
}

inline const Json& field(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(Errc::ParseError, std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get_as(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline Json to_json(const EmbeddingFile& file) {
  Json j;
  const AnyEmbedding& any = file.embedding;
  j["kind"] = kind_name(any);
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, DistanceEmbedding>) {
          j["n"] = e.size();
          j["dim"] = e.dim;
          j["spherical"] = e.spherical();
          if (e.uniform()) {
            j["threshold"] = json_number(e.uniform_threshold());
          } else {
            Json ts = Json::array();
            for (double t : std::get<std::vector<double>>(e.threshold)) ts.push_back(json_number(t));
            j["threshold"] = std::move(ts);
          }
          j["phi_out"] = detail::family_to_json(e.phi_out);
          j["phi_in"] = detail::family_to_json(e.phi_in);
        } else if constexpr (std::is_same_v<T, SimilarityEmbedding>) {
          j["n"] = e.size();
          j["dim"] = e.dim;
          j["spherical"] = e.spherical();
          j["threshold"] = json_number(e.threshold);
          j["phi_l"] = detail::family_to_json(e.phi_l);
          j["phi_r"] = detail::family_to_json(e.phi_r);
        } else if constexpr (std::is_same_v<T, TranslationalEmbedding>) {
          j["n"] = e.size();
          j["dim"] = e.dim;
          j["spherical"] = false;
          Json ts = Json::array();
          for (double t : e.thresholds) ts.push_back(json_number(t));
          j["thresholds"] = std::move(ts);
          Json z = Json::array();
          for (double x : e.z) z.push_back(json_number(x));
          j["z"] = std::move(z);
          j["phi"] = detail::family_to_json(e.phi);
        } else {
          j["n"] = e.size();
          j["dim"] = e.k;
          j["spherical"] = false;
          j["k"] = e.k;
          j["dist_threshold"] = e.dist_threshold;
          j["sim_threshold"] = e.sim_threshold;
          Json l = Json::array(), r = Json::array();
          for (const auto& c : e.codes_l) l.push_back(c.to_hex());
          for (const auto& c : e.codes_r) r.push_back(c.to_hex());
          j["codes_l"] = std::move(l);
          j["codes_r"] = std::move(r);
        }
      },
      any);
  Json meta;
  meta["operation"] = file.metadata.operation;
  meta["seed"] = file.metadata.seed ? Json(*file.metadata.seed) : Json(nullptr);
  meta["measured_delta"] =
      file.metadata.measured_delta ? json_number(*file.metadata.measured_delta) : Json(nullptr);
  j["metadata"] = std::move(meta);
  return j;
}

inline EmbeddingFile embedding_from_json(const Json& j) {
  using detail::field;
  using detail::get_as;
  if (!j.is_object()) throw Error(Errc::ParseError, "embedding file must hold a JSON object");
  const auto kind = get_as<std::string>(j, "kind");
  const auto n = get_as<std::size_t>(j, "n");
  const auto dim = get_as<std::size_t>(j, "dim");

  EmbeddingFile file;
  if (kind == "distance") {
    DistanceEmbedding e;
    e.dim = dim;
    e.phi_out = detail::family_from_json(field(j, "phi_out"));
    e.phi_in = detail::family_from_json(field(j, "phi_in"));
    const Json& t = field(j, "threshold");
    if (t.is_array())
      e.threshold = detail::vector_from_json(t);
    else
      e.threshold = number_from_json(t);
    e.validate();
    file.embedding = std::move(e);
  } else if (kind == "similarity") {
    SimilarityEmbedding e;
    e.dim = dim;
    e.phi_l = detail::family_from_json(field(j, "phi_l"));
    e.phi_r = detail::family_from_json(field(j, "phi_r"));
    e.threshold = number_from_json(field(j, "threshold"));
    e.validate();
    file.embedding = std::move(e);
  } else if (kind == "translational") {
    TranslationalEmbedding e;
    e.dim = dim;
    e.phi = detail::family_from_json(field(j, "phi"));
    e.z = detail::vector_from_json(field(j, "z"));
    e.thresholds = detail::vector_from_json(field(j, "thresholds"));
    e.validate();
    file.embedding = std::move(e);
  } else if (kind == "hamming") {
    HammingEmbedding e;
    e.k = get_as<std::size_t>(j, "k");
    e.dist_threshold = get_as<std::size_t>(j, "dist_threshold");
    e.sim_threshold = get_as<long long>(j, "sim_threshold");
    for (const auto* key : {"codes_l", "codes_r"}) {
      const Json& codes = field(j, key);
      if (!codes.is_array()) throw Error(Errc::ParseError, std::string(key) + " must be an array");
      auto& out = std::string_view(key) == "codes_l" ? e.codes_l : e.codes_r;
      for (const auto& c : codes) {
        if (!c.is_string()) throw Error(Errc::ParseError, "codes must be hex strings");
        out.push_back(BitCode::from_hex(c.get<std::string>(), e.k));
      }
    }
    e.validate();
    file.embedding = std::move(e);
  } else {
    throw Error(Errc::ParseError, "unknown embedding kind '" + kind + "'");
  }

  const std::size_t got = std::visit([](const auto& e) { return e.size(); }, file.embedding);
  if (got != n) throw Error(Errc::ParseError, "field 'n' disagrees with the vector count");

  if (const auto it = j.find("metadata"); it != j.end() && it->is_object()) {
    const Json& m = *it;
    if (auto op = m.find("operation"); op != m.end() && op->is_string())
      file.metadata.operation = op->get<std::string>();
    if (auto s = m.find("seed"); s != m.end() && s->is_number_unsigned())
      file.metadata.seed = s->get<std::uint64_t>();
    if (auto d = m.find("measured_delta"); d != m.end() && !d->is_null())
      file.metadata.measured_delta = number_from_json(*d);
  }
  return file;
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline EmbeddingFile read_embedding(std::istream& in) {
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  return embedding_from_json(j);
}

inline void write_embedding(std::ostream& out, const EmbeddingFile& file) {
  out << dump_json(to_json(file));
}

inline EmbeddingFile load_embedding(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  return read_embedding(in);
}

inline void save_embedding(const std::string& path, const EmbeddingFile& file) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  write_embedding(out, file);
  if (!out) throw Error(Errc::IoError, "write failed: " + path);
}

/// Dispatches to the verifier for the embedding's kind.
inline Verdict verify_any(const DiGraph& g, const AnyEmbedding& any) {
  return std::visit(
      [&](const auto& e) -> Verdict {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, DistanceEmbedding>) return verify_distance(g, e);
        else if constexpr (std::is_same_v<T, SimilarityEmbedding>) return verify_similarity(g, e);
        else if constexpr (std::is_same_v<T, TranslationalEmbedding>) return verify_translational(g, e);
        else return verify_hamming(g, e);
      },
      any);
}

}  // namespace relembed
