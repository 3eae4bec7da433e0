// relembed: generate graphs, build / convert / compress / optimize embeddings,
// verify them and print reports.
//
// Exit codes: 0 ok, 1 verification failed, 2 usage, 3 I/O or parse,
// 4 construction error. Errors print one line: `error: <Code>: <detail>`.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relembed/relembed.hpp"

namespace {

using namespace relembed;

constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitConstruction = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed: " + path);
}

void write_embedding_file(const std::string& path, const EmbeddingFile& f) {
  write_text(path, dump_json(to_json(f)));
}

template <typename T>
const T& expect_kind(const AnyEmbedding& any, const char* want, const char* op) {
  if (const T* e = std::get_if<T>(&any)) return *e;
  throw UsageError(std::string(op) + " needs a " + want + " embedding, got " + std::string(kind_name(any)));
}

/// Robustness used when --delta is omitted: the input's measured value, with
/// unbounded inputs capped at 1.
double default_delta(double measured) { return std::isfinite(measured) ? measured : 1.0; }

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string family;
  GenParams params;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen(const GenArgs& a) {
  const DiGraph g = generate(a.family, a.params, a.seed);
  std::ostringstream ss;
  write_edge_list(ss, g);
  write_text(a.out, ss.str());
  return 0;
}

struct SolverArgs {
  std::string config_file;
  std::optional<std::size_t> max_rank;
  std::optional<double> tolerance;
  std::optional<int> max_iterations;
  std::optional<int> restarts;
  std::optional<double> delta_cap;

  SolverConfig resolve(std::optional<std::uint64_t> seed) const {
    SolverConfig cfg;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw Error(Errc::IoError, "cannot open " + config_file);
      cfg.read(in);
    }
    if (max_rank) cfg.set("max_rank", std::to_string(*max_rank));
    if (tolerance) cfg.bisection_tolerance = *tolerance;
    if (max_iterations) cfg.max_iterations = *max_iterations;
    if (restarts) cfg.restarts = *restarts;
    if (delta_cap) cfg.delta_cap = *delta_cap;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

struct EmbedArgs {
  std::string method;
  std::string kind = "distance";
  std::string graph;
  std::string out;
  std::optional<std::uint64_t> seed;
  SolverArgs solver;
};

int run_embed(const EmbedArgs& a) {
  const DiGraph g = load_edge_list(a.graph);
  EmbeddingFile f;
  f.metadata.operation = "embed:" + a.method;
  if (a.method == "svd") {
    const SpectralEmbedding s = svd_construct(g);
    if (a.kind == "similarity") {
      f.metadata.measured_delta = measure_similarity_robustness(g, s.similarity).delta;
      f.embedding = s.similarity;
    } else {
      f.metadata.measured_delta = measure_distance_robustness(g, s.distance).delta;
      f.embedding = s.distance;
    }
  } else if (a.method == "dag-translational") {
    f.embedding = dag_translational(g);
  } else {
    const SolverConfig cfg = a.solver.resolve(a.seed);
    f.metadata.seed = cfg.seed;
    const SolveResult r =
        a.method == "sdp-distance" ? max_distance_robustness(g, cfg) : max_similarity_robustness(g, cfg);
    f.metadata.measured_delta = r.delta;
    std::visit([&](const auto& e) { f.embedding = e; }, r.embedding);
  }
  write_embedding_file(a.out, f);
  return 0;
}

struct ConvertArgs {
  std::string to;
  std::string graph;
  std::string embedding;
  std::string out;
  std::optional<double> delta;
};

int run_convert(const ConvertArgs& a) {
  const DiGraph g = load_edge_list(a.graph);
  const EmbeddingFile in = load_embedding(a.embedding);
  EmbeddingFile f;
  f.metadata.operation = "convert:" + a.to;
  if (a.to == "similarity") {
    const auto& d = uniformize_thresholds(expect_kind<DistanceEmbedding>(in.embedding, "distance", "convert --to similarity"));
    const double delta = a.delta.value_or(default_delta(measure_distance_robustness(g, d).delta));
    const DistanceToSimilarity r = distance_to_similarity(g, d, delta);
    f.metadata.measured_delta = measure_similarity_robustness(g, r.embedding).delta;
    f.embedding = r.embedding;
  } else if (a.to == "spherical-distance") {
    const auto& s = expect_kind<SimilarityEmbedding>(in.embedding, "similarity", "convert --to spherical-distance");
    DistanceEmbedding d = similarity_to_spherical_distance(g, s);
    f.metadata.measured_delta = measure_distance_robustness(g, d).delta;
    f.embedding = std::move(d);
  } else {
    const auto& s = expect_kind<SimilarityEmbedding>(in.embedding, "similarity", "convert --to distance");
    const double delta = a.delta.value_or(default_delta(measure_similarity_robustness(g, s).delta));
    const SimilarityToDistance r = similarity_to_distance(g, s, delta);
    f.metadata.measured_delta = measure_distance_robustness(g, r.embedding).delta;
    f.embedding = r.embedding;
  }
  write_embedding_file(a.out, f);
  return 0;
}

struct CompressArgs {
  std::string method;
  std::optional<double> delta;
  std::uint64_t seed = 0;
  double hamming_constant = kHammingConstant;
  std::string graph;
  std::string embedding;
  std::string out;
};

int run_compress(const CompressArgs& a) {
  const DiGraph g = load_edge_list(a.graph);
  const EmbeddingFile in = load_embedding(a.embedding);
  EmbeddingFile f;
  f.metadata.operation = "compress:" + a.method;
  f.metadata.seed = a.seed;
  if (a.method == "jl") {
    const DistanceEmbedding d =
        uniformize_thresholds(expect_kind<DistanceEmbedding>(in.embedding, "distance", "compress --method jl"));
    const double delta = a.delta.value_or(default_delta(measure_distance_robustness(g, d).delta));
    JlProjection p = jl_project(g, d, delta, a.seed);
    f.metadata.measured_delta = p.robustness.delta;
    f.embedding = std::move(p.embedding);
  } else {
    const auto& s = expect_kind<SimilarityEmbedding>(in.embedding, "similarity", "compress --method hamming");
    const double delta = a.delta.value_or(default_delta(measure_similarity_robustness(g, s).delta));
    HammingResult h = hamming_embed(g, s, delta, a.seed, a.hamming_constant);
    f.metadata.measured_delta = measure_distance_robustness(g, hamming_as_distance(h.embedding)).delta;
    f.embedding = std::move(h.embedding);
  }
  write_embedding_file(a.out, f);
  return 0;
}

int run_verify(const std::string& graph, const std::string& embedding) {
  const DiGraph g = load_edge_list(graph);
  const EmbeddingFile in = load_embedding(embedding);
  const Verdict v = verify_any(g, in.embedding);
  if (v.ok) {
    std::cout << "ok\n";
    return 0;
  }
  std::cout << "fail\n";
  std::cerr << "witness: " << v.witness->first << ' ' << v.witness->second << '\n';
  return kExitVerifyFailed;
}

int run_report(const std::string& graph, const std::vector<std::string>& embeddings, bool table) {
  const DiGraph g = load_edge_list(graph);
  std::vector<LabeledEmbedding> extra;
  for (const auto& path : embeddings) extra.push_back({path, load_embedding(path).embedding});
  const Json r = build_report(g, extra);
  std::cout << (table ? report_table(r) : dump_json(r));
  return 0;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ParseError:
    case Errc::IoError: return kExitIo;
    case Errc::UnknownFamily: return kExitUsage;
    default: return kExitConstruction;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embeddings of directed graphs: build, convert, compress, optimize, verify"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a graph as an edge list");
  gen_cmd->add_option("family", gen.family,
                      "path | cycle | complete_bipartite | bidirected_complete_with_loops | random_gnp | "
                      "random_dag | bounded_degree | km_distance | km_similarity")
      ->required();
  gen_cmd->add_option("--n", gen.params.n, "Number of nodes (first side for complete_bipartite)");
  gen_cmd->add_option("--p", gen.params.p, "Edge probability");
  gen_cmd->add_option("--deg", gen.params.degree_bound, "Degree bound for bounded_degree");
  gen_cmd->add_option("--n2", gen.params.n2, "Second side of complete_bipartite (default: n)");
  gen_cmd->add_flag("--bidirected", gen.params.bidirected, "complete_bipartite: add reverse edges");
  gen_cmd->add_option("--hyperplanes", gen.params.n_hyperplanes, "km_*: number of hyperplanes");
  gen_cmd->add_option("--k", gen.params.k, "km_*: ambient dimension");
  gen_cmd->add_option("--points", gen.params.n_points, "km_*: number of sample points");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("-o,--out", gen.out, "Output file (default: standard output)");

  auto add_solver_options = [](CLI::App* cmd, SolverArgs& s) {
    cmd->add_option("--config", s.config_file, "Solver key=value file");
    cmd->add_option("--max-rank", s.max_rank, "Factorization width (default 2n)");
    cmd->add_option("--tolerance", s.tolerance, "Bisection tolerance");
    cmd->add_option("--max-iterations", s.max_iterations, "L-BFGS iterations per restart");
    cmd->add_option("--restarts", s.restarts, "Restarts per bisection level");
    cmd->add_option("--delta-cap", s.delta_cap, "Robustness treated as unbounded (default (2n)^2)");
  };

  EmbedArgs embed;
  auto* embed_cmd = app.add_subcommand("embed", "Build an embedding of a graph");
  embed_cmd->add_option("--method", embed.method)
      ->required()
      ->check(CLI::IsMember({"svd", "dag-translational", "sdp-distance", "sdp-similarity"}));
  embed_cmd->add_option("--kind", embed.kind, "svd output kind")->check(CLI::IsMember({"distance", "similarity"}));
  embed_cmd->add_option("-g,--graph", embed.graph)->required();
  embed_cmd->add_option("-o,--out", embed.out);
  embed_cmd->add_option("--seed", embed.seed);
  add_solver_options(embed_cmd, embed.solver);

  ConvertArgs convert;
  auto* convert_cmd = app.add_subcommand("convert", "Convert between embedding types");
  convert_cmd->add_option("--to", convert.to)
      ->required()
      ->check(CLI::IsMember({"similarity", "spherical-distance", "distance"}));
  convert_cmd->add_option("-g,--graph", convert.graph)->required();
  convert_cmd->add_option("-e,--embedding", convert.embedding)->required();
  convert_cmd->add_option("-o,--out", convert.out);
  convert_cmd->add_option("--delta", convert.delta, "Input robustness to assume (default: measured)");

  CompressArgs compress;
  auto* compress_cmd = app.add_subcommand("compress", "Reduce embedding dimension");
  compress_cmd->add_option("--method", compress.method)->required()->check(CLI::IsMember({"jl", "hamming"}));
  compress_cmd->add_option("--delta", compress.delta, "Input robustness to assume (default: measured)");
  compress_cmd->add_option("--seed", compress.seed);
  compress_cmd->add_option("--hamming-constant", compress.hamming_constant, "C in k = ceil(C ln(n+1) / delta^2)");
  compress_cmd->add_option("-g,--graph", compress.graph)->required();
  compress_cmd->add_option("-e,--embedding", compress.embedding)->required();
  compress_cmd->add_option("-o,--out", compress.out);

  std::string verify_graph, verify_embedding;
  auto* verify_cmd = app.add_subcommand("verify", "Check an embedding against a graph");
  verify_cmd->add_option("-g,--graph", verify_graph)->required();
  verify_cmd->add_option("-e,--embedding", verify_embedding)->required();

  std::string report_graph;
  std::vector<std::string> report_embeddings;
  bool report_table_flag = false, report_json_flag = false;
  auto* report_cmd = app.add_subcommand("report", "Summarize a graph and embeddings");
  report_cmd->add_option("-g,--graph", report_graph)->required();
  report_cmd->add_option("-e,--embedding", report_embeddings);
  report_cmd->add_flag("--json", report_json_flag, "JSON output (default)");
  report_cmd->add_flag("--table", report_table_flag, "Plain-text table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: Usage: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*embed_cmd) return run_embed(embed);
    if (*convert_cmd) return run_convert(convert);
    if (*compress_cmd) return run_compress(compress);
    if (*verify_cmd) return run_verify(verify_graph, verify_embedding);
    if (*report_cmd) return run_report(report_graph, report_embeddings, report_table_flag && !report_json_flag);
  } catch (const UsageError& e) {
    std::cerr << "error: Usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.detail() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << '\n';
    return kExitConstruction;
  }
  return kExitUsage;
}
