#include "scimap/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "binary_io.hpp"
#include "scimap/error.hpp"
#include "scimap/rng.hpp"

namespace scimap::pipeline {

namespace fs = std::filesystem;

std::optional<std::string> Settings::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& s, std::size_t line) {
  if (s.size() < 2 || (s.front() != '"' && s.front() != '\'')) return s;
  if (s.back() != s.front()) throw Error(ErrorKind::Config, "config line " + std::to_string(line) + ": unterminated string");
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\' && s.front() == '"' && i + 2 < s.size()) ++i;
    out += s[i];
  }
  return out;
}

// Cuts a trailing `# comment` that is not inside quotes.
std::string strip_comment(std::string_view s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == '\\') ++i;
      else if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return std::string(s.substr(0, i));
    }
  }
  return std::string(s);
}

}  // namespace

void Settings::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read config file: " + path);
  std::string prefix, raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(strip_comment(raw));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw Error(ErrorKind::Config, "config line " + std::to_string(line) + ": bad section header");
      const std::string section = trim(std::string_view(text).substr(1, text.size() - 2));
      prefix = section.empty() ? "" : section + ".";
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Config, "config line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::Config, "config line " + std::to_string(line) + ": empty key");
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw Error(ErrorKind::Config, "config line " + std::to_string(line) + ": unterminated list");
      std::string joined;
      std::string_view body = std::string_view(value).substr(1, value.size() - 2);
      while (!body.empty()) {
        const auto comma = body.find(',');
        const std::string item = unquote(trim(body.substr(0, comma)), line);
        if (!item.empty()) joined += (joined.empty() ? "" : ",") + item;
        if (comma == std::string_view::npos) break;
        body.remove_prefix(comma + 1);
      }
      value = joined;
    } else {
      value = unquote(value, line);
    }
    values_[prefix + key] = value;
  }
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "out_dir", "seed", "threads", "force",
      "corpus.min_abstract_chars", "sample.p", "sample.seed",
      "synth.topics", "synth.records_per_topic", "synth.dim", "synth.sigma", "synth.tau", "synth.mean_out_degree",
      "synth.seed",
      "embed.provider", "embed.endpoint", "embed.model", "embed.batch_size", "embed.max_in_flight", "embed.timeout_ms",
      "embed.retry_count", "embed.seed", "embed.dim",
      "pairs.n", "pairs.seed", "graph.mode", "distant.top_k",
      "spread.outlier_quantile", "centers.exclude", "classify.temperature",
      "pca.up_to", "kde.levels", "kde.grid_size", "kde.min_points", "kde.bandwidth",
      "map.labels", "map.max_kde_subjects", "map.formats",
      "paths.input", "paths.corpus", "paths.store", "paths.planted", "paths.centers", "paths.graph", "paths.out",
      "classify.text", "classify.id"};
  return keys;
}

class Reader {
 public:
  explicit Reader(const Settings& s) : s_(s) {}

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const {
    auto v = s_.get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size())
      throw Error(ErrorKind::Config, key + ": expected a nonnegative integer, got '" + *v + "'");
    return out;
  }
  std::size_t size(const std::string& key, std::size_t fallback) const {
    return static_cast<std::size_t>(u64(key, fallback));
  }
  double real(const std::string& key, double fallback) const {
    auto v = s_.get(key);
    if (!v) return fallback;
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size() || !std::isfinite(out))
      throw Error(ErrorKind::Config, key + ": expected a number, got '" + *v + "'");
    return out;
  }
  std::optional<double> optional_real(const std::string& key) const {
    if (!s_.get(key)) return std::nullopt;
    return real(key, 0.0);
  }
  bool flag(const std::string& key, bool fallback) const {
    auto v = s_.get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw Error(ErrorKind::Config, key + ": expected true or false, got '" + *v + "'");
  }
  std::string text(const std::string& key, std::string fallback) const { return s_.get(key).value_or(fallback); }
  std::vector<std::string> list(const std::string& key, std::vector<std::string> fallback) const {
    auto v = s_.get(key);
    if (!v) return fallback;
    std::vector<std::string> out;
    std::string_view rest = *v;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      auto item = trim(rest.substr(0, comma));
      if (!item.empty()) out.push_back(item);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return out;
  }

 private:
  const Settings& s_;
};

void check(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::Config, message);
}

}  // namespace

RunConfig resolve(const Settings& settings) {
  for (const auto& [key, value] : settings.values())
    check(known_keys().count(key) == 1, "unknown setting '" + key + "'");
  const Reader r(settings);
  RunConfig c;
  c.out_dir = r.text("out_dir", ".");
  c.seed = r.u64("seed", 42);
  c.threads = r.size("threads", 1);
  c.force = r.flag("force", false);
  check(c.threads >= 1, "threads must be at least 1");

  c.min_abstract_chars = r.size("corpus.min_abstract_chars", 100);
  c.sample_p = r.optional_real("sample.p");
  if (c.sample_p) check(*c.sample_p >= 0.0 && *c.sample_p <= 1.0, "sample.p must lie in [0, 1]");
  c.sample_seed = r.u64("sample.seed", c.seed);

  c.synth.topic_count = r.size("synth.topics", 5);
  c.synth.records_per_topic = r.size("synth.records_per_topic", 400);
  c.synth.dim = r.size("synth.dim", 128);
  c.synth.noise_sigma = r.real("synth.sigma", 0.1);
  c.synth.edge_temperature = r.real("synth.tau", 0.2);
  c.synth.mean_out_degree = r.real("synth.mean_out_degree", 8.0);
  c.synth.seed = r.u64("synth.seed", c.seed);
  check(c.synth.topic_count >= 1, "synth.topics must be at least 1");
  check(c.synth.dim >= c.synth.topic_count, "synth.dim must be at least synth.topics");
  check(c.synth.noise_sigma >= 0.0, "synth.sigma must be nonnegative");
  check(c.synth.edge_temperature > 0.0, "synth.tau must be positive");
  check(c.synth.mean_out_degree >= 0.0, "synth.mean_out_degree must be nonnegative");

  c.embed.provider = parse_provider(r.text("embed.provider", "mock"));
  c.embed.endpoint = r.text("embed.endpoint", c.embed.endpoint);
  c.embed.model = r.text("embed.model", c.embed.model);
  c.embed.batch_size = r.size("embed.batch_size", c.embed.batch_size);
  c.embed.max_in_flight = r.size("embed.max_in_flight", c.embed.max_in_flight);
  c.embed.timeout = std::chrono::milliseconds(r.u64("embed.timeout_ms", 60'000));
  c.embed.retry_count = r.size("embed.retry_count", c.embed.retry_count);
  c.embed.seed = r.u64("embed.seed", c.seed);
  c.embed.dim = r.size("embed.dim", 1024);
  check(c.embed.batch_size >= 1, "embed.batch_size must be at least 1");
  check(c.embed.max_in_flight >= 1, "embed.max_in_flight must be at least 1");
  check(c.embed.dim >= 1, "embed.dim must be at least 1");

  c.pairs_n = r.size("pairs.n", 100'000);
  c.pairs_seed = r.u64("pairs.seed", c.seed);
  c.path_mode = parse_path_mode(r.text("graph.mode", "undirected"));
  c.top_k = r.size("distant.top_k", 100);

  c.outlier_quantile = r.real("spread.outlier_quantile", 0.95);
  check(c.outlier_quantile >= 0.0 && c.outlier_quantile <= 1.0, "spread.outlier_quantile must lie in [0, 1]");
  c.excluded_subjects = r.list("centers.exclude", {});
  c.temperature = r.real("classify.temperature", kDefaultTemperature);
  check(c.temperature > 0.0, "classify.temperature must be positive");

  if (settings.get("pca.up_to")) c.pca_up_to = r.size("pca.up_to", 0);
  if (c.pca_up_to) check(*c.pca_up_to >= 1, "pca.up_to must be at least 1");
  c.kde.levels.clear();
  for (const auto& level : r.list("kde.levels", {"0.25", "0.5", "0.75"})) {
    Settings one;
    one.set("kde.levels", level);
    const double m = Reader(one).real("kde.levels", 0.0);
    check(m > 0.0 && m < 1.0, "kde.levels entries must lie in (0, 1)");
    c.kde.levels.push_back(m);
  }
  c.kde.grid_size = r.size("kde.grid_size", 128);
  c.kde.min_points = r.size("kde.min_points", 20);
  c.kde.bandwidth = r.optional_real("kde.bandwidth");
  check(c.kde.grid_size >= 2, "kde.grid_size must be at least 2");
  if (c.kde.bandwidth) check(*c.kde.bandwidth > 0.0, "kde.bandwidth must be positive");
  c.label_count = r.size("map.labels", 25);
  c.max_kde_subjects = r.size("map.max_kde_subjects", 0);
  c.map_formats.clear();
  for (const auto& f : r.list("map.formats", {"svg", "json", "csv"})) c.map_formats.push_back(parse_map_format(f));

  for (const auto& [key, value] : settings.values())
    if (key.rfind("paths.", 0) == 0) c.paths[key.substr(6)] = value;
  if (auto t = settings.get("classify.text")) c.classify_text = *t;
  if (auto id = settings.get("classify.id")) c.classify_id = *id;
  return c;
}

std::map<std::string, std::string> canonical_settings(const RunConfig& c) {
  auto num = [](double v) { return format_number(v); };
  auto join = [](const std::vector<std::string>& items) {
    std::string out;
    for (const auto& i : items) out += (out.empty() ? "" : ",") + i;
    return out;
  };
  std::vector<std::string> levels, formats;
  for (double m : c.kde.levels) levels.push_back(num(m));
  for (auto f : c.map_formats)
    formats.push_back(f == MapFormat::Svg ? "svg" : f == MapFormat::Json ? "json" : "csv");
  // Transport-only settings (endpoint, batching, timeouts) and paths are left out:
  // they do not change any artifact.
  return {
      {"seed", std::to_string(c.seed)},
      {"corpus.min_abstract_chars", std::to_string(c.min_abstract_chars)},
      {"sample.p", c.sample_p ? num(*c.sample_p) : "unset"},
      {"sample.seed", std::to_string(c.sample_seed)},
      {"synth.topics", std::to_string(c.synth.topic_count)},
      {"synth.records_per_topic", std::to_string(c.synth.records_per_topic)},
      {"synth.dim", std::to_string(c.synth.dim)},
      {"synth.sigma", num(c.synth.noise_sigma)},
      {"synth.tau", num(c.synth.edge_temperature)},
      {"synth.mean_out_degree", num(c.synth.mean_out_degree)},
      {"synth.seed", std::to_string(c.synth.seed)},
      {"embed.provider", std::string(to_string(c.embed.provider))},
      {"embed.model", c.embed.model},
      {"embed.seed", std::to_string(c.embed.seed)},
      {"embed.dim", std::to_string(c.embed.dim)},
      {"pairs.n", std::to_string(c.pairs_n)},
      {"pairs.seed", std::to_string(c.pairs_seed)},
      {"graph.mode", std::string(to_string(c.path_mode))},
      {"distant.top_k", std::to_string(c.top_k)},
      {"spread.outlier_quantile", num(c.outlier_quantile)},
      {"centers.exclude", join(c.excluded_subjects)},
      {"classify.temperature", num(c.temperature)},
      {"pca.up_to", c.pca_up_to ? std::to_string(*c.pca_up_to) : "auto"},
      {"kde.levels", join(levels)},
      {"kde.grid_size", std::to_string(c.kde.grid_size)},
      {"kde.min_points", std::to_string(c.kde.min_points)},
      {"kde.bandwidth", c.kde.bandwidth ? num(*c.kde.bandwidth) : "scott"},
      {"map.labels", std::to_string(c.label_count)},
      {"map.max_kde_subjects", std::to_string(c.max_kde_subjects)},
      {"map.formats", join(formats)},
  };
}

std::string config_hash(const RunConfig& c) {
  std::string canonical;
  for (const auto& [k, v] : canonical_settings(c)) canonical += k + "=" + v + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
  return buf;
}

namespace {

// Which command produces each default artifact, for "run X first" errors.
const std::map<std::string, std::string>& producers() {
  static const std::map<std::string, std::string> p = {
      {"corpus.jsonl", "synth"},          {"planted.embs", "synth"},  {"corpus.preprocessed.jsonl", "ingest"},
      {"embeddings.embs", "embed"},       {"centers.embs", "centers"}, {"graph.cgr", "graph build"},
  };
  return p;
}

class Stage {
 public:
  Stage(std::string command, const RunConfig& cfg)
      : command_(std::move(command)), cfg_(cfg), hash_(config_hash(cfg)), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(cfg_.out_dir);
  }

  std::string out(const std::string& name) const { return (fs::path(cfg_.out_dir) / name).string(); }

  /// Input path: explicit override or the default artifact; must exist.
  std::string input(const std::string& path_key, const std::string& default_name) {
    auto it = cfg_.paths.find(path_key);
    const std::string path = it != cfg_.paths.end() ? it->second : out(default_name);
    if (!fs::exists(path)) {
      auto p = producers().find(default_name);
      const std::string hint =
          it == cfg_.paths.end() && p != producers().end() ? ": run `sciencemap " + p->second + "` first" : "";
      throw Error(ErrorKind::Prerequisite, "missing input " + path + hint);
    }
    Json entry = {{"path", path}};
    if (auto meta = read_meta(path); meta && meta->contains("config_hash")) {
      const auto theirs = (*meta)["config_hash"].get<std::string>();
      entry["config_hash"] = theirs;
      if (theirs != hash_ && !cfg_.force)
        throw Error(ErrorKind::ConfigMismatch, path + " was produced with config " + theirs + ", current config is " +
                                                   hash_ + " (rerun that stage or pass --force)");
    }
    inputs_.push_back(entry);
    return path;
  }

  std::string output(const std::string& default_name, bool primary = false) const {
    if (primary)
      if (auto it = cfg_.paths.find("out"); it != cfg_.paths.end()) return it->second;
    return out(default_name);
  }

  /// Records an output and stamps its sidecar with provenance. Existing sidecar
  /// fields (e.g. a store's model name) are kept when `merge` is set.
  void produced(const std::string& path, bool merge = false) {
    Json meta = Json::object();
    if (merge)
      if (auto existing = read_meta(path)) meta = std::move(*existing);
    meta["artifact"] = fs::path(path).filename().string();
    meta["command"] = command_;
    meta["config_hash"] = hash_;
    meta["seeds"] = seeds();
    detail::write_file(path + ".meta.json", meta.dump(2) + "\n");
    outputs_.push_back(path);
  }

  void count(const std::string& key, Json value) { counts_[key] = std::move(value); }

  Json finish() const {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_);
    Json settings = Json::object();
    for (const auto& [k, v] : canonical_settings(cfg_)) settings[k] = v;
    Json manifest = {{"command", command_},
                     {"version", kVersion},
                     {"config_hash", hash_},
                     {"settings", settings},
                     {"seeds", seeds()},
                     {"inputs", inputs_},
                     {"outputs", outputs_},
                     {"counts", counts_},
                     {"wall_time_ms", elapsed.count()}};
    std::string name = command_;
    std::replace(name.begin(), name.end(), ' ', '_');
    detail::write_file(out(name + ".manifest.json"), manifest.dump(2) + "\n");
    return manifest;
  }

  const RunConfig& cfg() const { return cfg_; }

 private:
  Json seeds() const {
    return Json{{"global", cfg_.seed},
                {"sample", cfg_.sample_seed},
                {"synth", cfg_.synth.seed},
                {"embed", cfg_.embed.seed},
                {"pairs", cfg_.pairs_seed}};
  }

  static std::optional<Json> read_meta(const std::string& path) {
    const std::string meta_path = path + ".meta.json";
    if (!fs::exists(meta_path)) return std::nullopt;
    try {
      return Json::parse(detail::read_file(meta_path));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::Format, "malformed sidecar " + meta_path + ": " + e.what());
    }
  }

  std::string command_;
  const RunConfig& cfg_;
  std::string hash_;
  std::chrono::steady_clock::time_point start_;
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
  Json counts_ = Json::object();
};

void write_json(const std::string& path, const Json& j) { detail::write_file(path, j.dump(1) + "\n"); }

Json cmd_synth(Stage& st) {
  const auto synth = synth_corpus(st.cfg().synth);
  const auto corpus_path = st.output("corpus.jsonl", true);
  save_corpus(synth.corpus, corpus_path);
  st.produced(corpus_path);
  const auto planted_path = st.output("planted.embs");
  save_store(planted_embed(synth), planted_path);
  st.produced(planted_path, true);
  Json truth = Json::array();
  for (std::size_t i = 0; i < synth.corpus.size(); ++i) truth.push_back({synth.corpus[i].id, synth.topic_of[i]});
  const auto truth_path = st.output("synth_truth.json");
  write_json(truth_path, Json{{"topic_of", truth}});
  st.produced(truth_path);
  std::size_t edges = 0;
  for (const auto& r : synth.corpus) edges += r.references.size();
  st.count("records", synth.corpus.size());
  st.count("references", edges);
  return st.finish();
}

Json cmd_sample(Stage& st) {
  const auto corpus = load_corpus(st.input("input", "corpus.jsonl"));
  const auto sampled = sample(corpus, {st.cfg().sample_p.value_or(1e-3), st.cfg().sample_seed});
  const auto path = st.output("corpus.sampled.jsonl", true);
  save_corpus(sampled, path);
  st.produced(path);
  st.count("input_records", corpus.size());
  st.count("sampled_records", sampled.size());
  return st.finish();
}

Json cmd_ingest(Stage& st) {
  auto corpus = load_corpus(st.input("input", "corpus.jsonl"));
  st.count("loaded_records", corpus.size());
  if (st.cfg().sample_p) {
    corpus = sample(corpus, {*st.cfg().sample_p, st.cfg().sample_seed});
    st.count("sampled_records", corpus.size());
  }
  auto [kept, report] = preprocess(corpus, st.cfg().min_abstract_chars);
  const auto corpus_path = st.output("corpus.preprocessed.jsonl", true);
  save_corpus(kept, corpus_path);
  st.produced(corpus_path);
  const auto report_path = st.output("preprocess_report.json");
  write_json(report_path, to_json(report));
  st.produced(report_path);
  st.count("kept_records", report.kept_count);
  st.count("removed_records", report.removed_count);
  return st.finish();
}

Json cmd_embed(Stage& st) {
  const auto corpus = load_corpus(st.input("corpus", "corpus.preprocessed.jsonl"));
  EmbedderConfig ecfg = st.cfg().embed;
  if (ecfg.provider == ProviderKind::Planted)
    ecfg.planted = std::make_shared<const EmbeddingStore>(load_store(st.input("planted", "planted.embs")));
  const auto texts = abstracts_of(corpus);
  const auto store = embed_texts(ecfg, texts);
  const auto path = st.output("embeddings.embs", true);
  save_store(store, path);
  st.produced(path, true);
  st.count("vectors", store.size());
  st.count("dim", store.dim());
  st.count("model", store.model());
  return st.finish();
}

Json cmd_centers(Stage& st) {
  const auto store = load_store(st.input("store", "embeddings.embs"));
  const auto corpus = load_corpus(st.input("corpus", "corpus.preprocessed.jsonl"));
  const CenterOptions options{st.cfg().excluded_subjects};
  const auto centers = subject_centers(store, corpus, options);
  const auto centers_path = st.output("centers.embs", true);
  save_centers(centers, centers_path);
  st.produced(centers_path, true);
  const auto spread_path = st.output("center_spread.json");
  write_json(spread_path, to_json(subject_spread(centers, store, corpus, st.cfg().outlier_quantile, options)));
  st.produced(spread_path);
  const auto dist_path = st.output("center_distances.json");
  write_json(dist_path, to_json(center_pairwise_distances(centers)));
  st.produced(dist_path);
  st.count("subjects", centers.subjects.size());
  st.count("omitted_subjects", centers.omitted_subjects);
  st.count("records_without_vector", centers.records_without_vector);
  return st.finish();
}

Json cmd_graph_build(Stage& st) {
  const auto corpus = load_corpus(st.input("corpus", "corpus.preprocessed.jsonl"));
  const auto graph = build_graph(corpus);
  const auto path = st.output("graph.cgr", true);
  save_graph(graph, path);
  st.produced(path);
  st.count("nodes", graph.node_count());
  st.count("edges", graph.edge_count());
  st.count("dangling_references", graph.dangling_count);
  st.count("duplicate_references", graph.duplicate_count);
  st.count("self_citations", graph.self_loop_count);
  return st.finish();
}

Json cmd_graph_dist(Stage& st) {
  const auto graph = load_graph(st.input("graph", "graph.cgr"));
  const auto sample = sample_pairs(graph.ids(), st.cfg().pairs_n, st.cfg().pairs_seed);
  const auto result = pairwise_graph_distances(graph, sample, st.cfg().path_mode, st.cfg().threads);
  const auto path = st.output("graph_distances.json", true);
  write_json(path, to_json(sample, result));
  st.produced(path);
  st.count("pairs", sample.count());
  st.count("reachable", result.reachable_count);
  st.count("unreachable", result.unreachable_count);
  return st.finish();
}

Json cmd_correlate(Stage& st) {
  const auto graph = load_graph(st.input("graph", "graph.cgr"));
  const auto store = load_store(st.input("store", "embeddings.embs"));
  const auto sample = sample_pairs(graph.ids(), st.cfg().pairs_n, st.cfg().pairs_seed);
  const auto distances = pairwise_graph_distances(graph, sample, st.cfg().path_mode, st.cfg().threads);
  const auto report = correlate_distances(store, sample, distances, st.cfg().path_mode);
  const auto report_path = st.output("correlation.json", true);
  write_json(report_path, to_json(report));
  st.produced(report_path);
  const auto csv_path = st.output("scatter.csv");
  detail::write_file(csv_path, scatter_csv(report));
  st.produced(csv_path);
  const auto distant_path = st.output("distant_pairs.json");
  write_json(distant_path, to_json(distant_similarity_pairs(store, sample, distances, st.cfg().top_k)));
  st.produced(distant_path);
  st.count("pcc", report.pcc);
  st.count("pairs_used", report.pair_count_used);
  st.count("pairs_excluded", report.pair_count_excluded);
  return st.finish();
}

Json cmd_pca(Stage& st) {
  const auto store = load_store(st.input("store", "embeddings.embs"));
  if (store.size() < 2) throw Error(ErrorKind::Validation, "pca needs at least 2 vectors");
  const std::size_t limit = std::min(store.size() - 1, store.dim());
  const std::size_t up_to = std::min(st.cfg().pca_up_to.value_or(std::min<std::size_t>(50, limit)), limit);
  const auto model = pca_fit(store, up_to);
  std::vector<double> curve;
  double acc = 0.0;
  for (double r : model.explained_variance_ratios) curve.push_back(acc += r);
  const auto json_path = st.output("pca_curve.json", true);
  write_json(json_path, pca_curve_json(model, curve));
  st.produced(json_path);
  const auto csv_path = st.output("pca_curve.csv");
  detail::write_file(csv_path, curve_csv(curve));
  st.produced(csv_path);
  st.count("components", up_to);
  st.count("cumulative_ratio", curve.back());
  return st.finish();
}

Json cmd_map(Stage& st) {
  const auto store = load_store(st.input("store", "embeddings.embs"));
  const auto corpus = load_corpus(st.input("corpus", "corpus.preprocessed.jsonl"));
  const auto centers = load_centers(st.input("centers", "centers.embs"));
  const auto model = pca_fit(store, 2);
  MapOptions options;
  options.kde = st.cfg().kde;
  options.label_count = st.cfg().label_count;
  options.max_kde_subjects = st.cfg().max_kde_subjects;
  options.centers.excluded_subjects = st.cfg().excluded_subjects;
  options.threads = st.cfg().threads;
  const auto map = build_map(model, store, corpus, centers, options);
  for (auto format : st.cfg().map_formats) {
    const char* ext = format == MapFormat::Svg ? "svg" : format == MapFormat::Json ? "json" : "csv";
    const auto path = st.output(std::string("map.") + ext);
    export_map(map, format, path);
    st.produced(path);
  }
  st.count("points", map.points.size());
  st.count("centers", map.centers.size());
  st.count("contoured_subjects", map.contours.size());
  st.count("notices", map.notices);
  return st.finish();
}

Json cmd_classify(Stage& st) {
  const auto& cfg = st.cfg();
  if (cfg.classify_text.has_value() == cfg.classify_id.has_value())
    throw Error(ErrorKind::Config, "classify needs exactly one of --text or --id");
  const auto centers = load_centers(st.input("centers", "centers.embs"));
  std::vector<float> v;
  std::string query;
  if (cfg.classify_id) {
    const auto store = load_store(st.input("store", "embeddings.embs"));
    const auto span = store.at(*cfg.classify_id);
    v.assign(span.begin(), span.end());
    query = "id:" + *cfg.classify_id;
  } else {
    if (cfg.embed.provider == ProviderKind::Planted)
      throw Error(ErrorKind::Config, "classify --text needs the mock or http provider");
    const std::vector<TextItem> items{{"query", *cfg.classify_text}};
    const auto store = embed_texts(cfg.embed, items);
    v.assign(store.vector(0).begin(), store.vector(0).end());
    query = "text";
  }
  const auto label = classify_soft(v, centers, cfg.temperature);
  Json result = to_json(label);
  result["query"] = query;
  const auto path = st.output("classification.json", true);
  write_json(path, result);
  st.produced(path);
  st.count("argmax", label.argmax);
  Json manifest = st.finish();
  manifest["result"] = result;
  return manifest;
}

}  // namespace

Json run_command(const std::string& command, const RunConfig& cfg) {
  Stage st(command, cfg);
  if (command == "synth") return cmd_synth(st);
  if (command == "sample") return cmd_sample(st);
  if (command == "ingest") return cmd_ingest(st);
  if (command == "embed") return cmd_embed(st);
  if (command == "centers") return cmd_centers(st);
  if (command == "graph build") return cmd_graph_build(st);
  if (command == "graph dist") return cmd_graph_dist(st);
  if (command == "correlate") return cmd_correlate(st);
  if (command == "pca") return cmd_pca(st);
  if (command == "map") return cmd_map(st);
  if (command == "classify") return cmd_classify(st);
  throw Error(ErrorKind::Config, "unknown command '" + command + "'");
}

}  // namespace scimap::pipeline
