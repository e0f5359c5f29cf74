#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scimap/analysis.hpp"
#include "scimap/embedder.hpp"
#include "scimap/serialize.hpp"

namespace scimap::pipeline {

inline constexpr const char* kVersion = "0.1.0";

/// Flat dotted-key settings ("embed.provider" -> "mock"). Loaded from a
/// TOML-style file, then overridden key by key from the command line.
class Settings {
 public:
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  /// Reads `key = value` lines with optional `[section]` headers (keys become
  /// `section.key`), `#` comments, quoted strings and `[a, b]` lists.
  void load_file(const std::string& path);

 private:
  std::map<std::string, std::string> values_;
};

/// Every setting a stage may consult, with defaults applied.
struct RunConfig {
  std::string out_dir = ".";
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  bool force = false;

  std::size_t min_abstract_chars = 100;
  std::optional<double> sample_p;
  std::uint64_t sample_seed = 42;

  SynthConfig synth;
  EmbedderConfig embed;

  std::size_t pairs_n = 100'000;
  std::uint64_t pairs_seed = 42;
  PathMode path_mode = PathMode::Undirected;
  std::size_t top_k = 100;

  double outlier_quantile = 0.95;
  std::vector<std::string> excluded_subjects;
  double temperature = kDefaultTemperature;

  std::optional<std::size_t> pca_up_to;
  KdeOptions kde;
  std::size_t label_count = 25;
  std::size_t max_kde_subjects = 0;
  std::vector<MapFormat> map_formats{MapFormat::Svg, MapFormat::Json, MapFormat::Csv};

  /// Optional file overrides: input, corpus, store, planted, centers, graph, out.
  std::map<std::string, std::string> paths;
  std::optional<std::string> classify_text;
  std::optional<std::string> classify_id;
};

/// Validates and converts settings. Throws ErrorKind::Config before any work is done.
RunConfig resolve(const Settings& settings);

/// Result-affecting settings in canonical `key=value` form.
std::map<std::string, std::string> canonical_settings(const RunConfig& config);

/// 16 hex digits (FNV-1a 64 over the canonical settings).
std::string config_hash(const RunConfig& config);

inline const std::vector<std::string> kCommands = {"synth", "sample", "ingest", "embed", "centers", "graph build",
                                                   "graph dist", "correlate", "pca", "map", "classify"};

/// Runs one stage, writes its artifacts and `<out_dir>/<command>.manifest.json`,
/// and returns the manifest.
Json run_command(const std::string& command, const RunConfig& config);

}  // namespace scimap::pipeline
