// sciencemap: staged pipeline CLI. Each subcommand reads the previous stage's
// files from --out-dir and writes its own artifacts plus a run manifest.
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "scimap/error.hpp"
#include "scimap/pipeline.hpp"

namespace {

using Overrides = std::map<std::string, std::string>;

void add_setting(CLI::App* app, Overrides& overrides, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
}

void print_error(std::string_view kind, const std::string& message, std::optional<std::uint64_t> offset = {}) {
  scimap::Json err = {{"kind", kind}, {"message", message}};
  if (offset) err["offset"] = *offset;
  std::cerr << scimap::Json{{"error", err}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embedding-based map of science: corpus sampling, embeddings, subject centers, citation distances"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides overrides;
  std::string config_path;
  app.add_option("--config", config_path, "TOML-style settings file (key = value, [section] prefixes)");
  add_setting(&app, overrides, "--seed", "seed", "Global seed; default for every stage seed");
  add_setting(&app, overrides, "--threads", "threads", "Worker thread limit");
  add_setting(&app, overrides, "--out-dir", "out_dir", "Directory for stage inputs and outputs");
  app.add_flag_callback("--force", [&] { overrides["force"] = "true"; }, "Accept inputs produced under another config");

  auto* synth = app.add_subcommand("synth", "Generate a planted synthetic corpus and its ground-truth vectors");
  add_setting(synth, overrides, "--topics", "synth.topics", "Number of planted topics");
  add_setting(synth, overrides, "--records-per-topic", "synth.records_per_topic", "Records per topic");
  add_setting(synth, overrides, "--dim", "synth.dim", "Embedding dimension");
  add_setting(synth, overrides, "--sigma", "synth.sigma", "Noise norm relative to the unit topic anchor");
  add_setting(synth, overrides, "--tau", "synth.tau", "Citation temperature");
  add_setting(synth, overrides, "--mean-out-degree", "synth.mean_out_degree", "Expected references per record");
  add_setting(synth, overrides, "--out", "paths.out", "Corpus output path");

  auto* sample = app.add_subcommand("sample", "Bernoulli-sample a corpus");
  add_setting(sample, overrides, "--input", "paths.input", "Input JSONL corpus");
  add_setting(sample, overrides, "--sample-p", "sample.p", "Selection probability (default 0.001)");
  add_setting(sample, overrides, "--out", "paths.out", "Output JSONL path");

  auto* ingest = app.add_subcommand("ingest", "Load, optionally sample, and preprocess a corpus");
  add_setting(ingest, overrides, "--input", "paths.input", "Input JSONL corpus");
  add_setting(ingest, overrides, "--min-abstract-chars", "corpus.min_abstract_chars", "Abstracts must be longer than this");
  add_setting(ingest, overrides, "--sample-p", "sample.p", "Sample with this probability before preprocessing");
  add_setting(ingest, overrides, "--out", "paths.out", "Output JSONL path");

  auto add_embedder_flags = [&](CLI::App* cmd) {
    add_setting(cmd, overrides, "--provider", "embed.provider", "http, mock or planted");
    add_setting(cmd, overrides, "--endpoint", "embed.endpoint", "Embedding server base URL");
    add_setting(cmd, overrides, "--model", "embed.model", "Model name sent to the server");
    add_setting(cmd, overrides, "--dim", "embed.dim", "Mock embedding dimension");
  };
  auto* embed = app.add_subcommand("embed", "Embed abstracts into a vector store");
  add_embedder_flags(embed);
  add_setting(embed, overrides, "--corpus", "paths.corpus", "Preprocessed corpus");
  add_setting(embed, overrides, "--batch-size", "embed.batch_size", "Texts per request");
  add_setting(embed, overrides, "--max-in-flight", "embed.max_in_flight", "Concurrent requests");
  add_setting(embed, overrides, "--timeout-ms", "embed.timeout_ms", "Per-request timeout");
  add_setting(embed, overrides, "--retry-count", "embed.retry_count", "Retries per failed batch");
  add_setting(embed, overrides, "--planted", "paths.planted", "Planted vectors for the planted provider");
  add_setting(embed, overrides, "--store-out", "paths.out", "Output store path");

  auto* centers = app.add_subcommand("centers", "Weighted subject centers, spread and pairwise distances");
  add_setting(centers, overrides, "--store", "paths.store", "Embedding store");
  add_setting(centers, overrides, "--corpus", "paths.corpus", "Preprocessed corpus");
  add_setting(centers, overrides, "--out", "paths.out", "Centers output path");
  add_setting(centers, overrides, "--exclude", "centers.exclude", "Comma-separated subjects to ignore");
  add_setting(centers, overrides, "--outlier-quantile", "spread.outlier_quantile", "Outlier distance quantile");

  auto* graph = app.add_subcommand("graph", "Citation graph stages");
  graph->require_subcommand(1);
  auto* graph_build = graph->add_subcommand("build", "Build the corpus-internal citation graph");
  add_setting(graph_build, overrides, "--corpus", "paths.corpus", "Preprocessed corpus");
  add_setting(graph_build, overrides, "--out", "paths.out", "Graph output path");
  auto* graph_dist = graph->add_subcommand("dist", "Hop distances for sampled record pairs");
  add_setting(graph_dist, overrides, "--graph", "paths.graph", "Graph file");
  add_setting(graph_dist, overrides, "--pairs-n", "pairs.n", "Number of sampled pairs");
  add_setting(graph_dist, overrides, "--pairs-seed", "pairs.seed", "Pair sampling seed");
  add_setting(graph_dist, overrides, "--mode", "graph.mode", "undirected or directed");
  add_setting(graph_dist, overrides, "--out", "paths.out", "Output JSON path");

  auto* correlate = app.add_subcommand("correlate", "Correlate embedding and citation distances");
  add_setting(correlate, overrides, "--store", "paths.store", "Embedding store");
  add_setting(correlate, overrides, "--graph", "paths.graph", "Graph file");
  add_setting(correlate, overrides, "--pairs-n", "pairs.n", "Number of sampled pairs");
  add_setting(correlate, overrides, "--pairs-seed", "pairs.seed", "Pair sampling seed");
  add_setting(correlate, overrides, "--mode", "graph.mode", "undirected or directed");
  add_setting(correlate, overrides, "--top-k", "distant.top_k", "Distant-similarity pairs to keep");
  add_setting(correlate, overrides, "--out", "paths.out", "Report output path");

  auto* pca = app.add_subcommand("pca", "Explained-variance curve");
  add_setting(pca, overrides, "--store", "paths.store", "Embedding store");
  add_setting(pca, overrides, "--up-to", "pca.up_to", "Number of components");
  add_setting(pca, overrides, "--out", "paths.out", "Curve JSON output path");

  auto* map = app.add_subcommand("map", "2D map with subject centers and KDE contours");
  add_setting(map, overrides, "--store", "paths.store", "Embedding store");
  add_setting(map, overrides, "--corpus", "paths.corpus", "Preprocessed corpus");
  add_setting(map, overrides, "--centers", "paths.centers", "Centers file");
  add_setting(map, overrides, "--labels", "map.labels", "Number of labelled subjects");
  add_setting(map, overrides, "--kde-levels", "kde.levels", "Comma-separated mass levels");
  add_setting(map, overrides, "--grid-size", "kde.grid_size", "KDE grid resolution");
  add_setting(map, overrides, "--min-points", "kde.min_points", "Smallest subject to contour");
  add_setting(map, overrides, "--bandwidth", "kde.bandwidth", "Fixed KDE bandwidth (default: Scott's rule)");
  add_setting(map, overrides, "--max-kde-subjects", "map.max_kde_subjects", "Contour only the largest N subjects");
  add_setting(map, overrides, "--formats", "map.formats", "Comma-separated svg,json,csv");

  auto* classify = app.add_subcommand("classify", "Soft subject distribution for a text or record");
  add_embedder_flags(classify);
  add_setting(classify, overrides, "--centers", "paths.centers", "Centers file");
  add_setting(classify, overrides, "--store", "paths.store", "Embedding store (with --id)");
  add_setting(classify, overrides, "--text", "classify.text", "Text to embed and classify");
  add_setting(classify, overrides, "--id", "classify.id", "Record id to classify");
  add_setting(classify, overrides, "--temperature", "classify.temperature", "Softmax temperature");
  add_setting(classify, overrides, "--out", "paths.out", "Output JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  std::string command;
  for (auto* sub : app.get_subcommands()) {
    command = sub->get_name();
    for (auto* inner : sub->get_subcommands()) command += " " + inner->get_name();
  }

  try {
    scimap::pipeline::Settings settings;
    if (!config_path.empty()) settings.load_file(config_path);
    for (const auto& [key, value] : overrides) settings.set(key, value);
    const auto config = scimap::pipeline::resolve(settings);
    const auto manifest = scimap::pipeline::run_command(command, config);
    std::cout << manifest.dump(2) << std::endl;
  } catch (const scimap::Error& e) {
    print_error(scimap::to_string(e.kind()), e.what(), e.offset());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
