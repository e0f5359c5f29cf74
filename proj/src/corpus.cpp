#include "scimap/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <fstream>

#include <json.hpp>

#include "scimap/error.hpp"
#include "scimap/rng.hpp"

namespace scimap {

using nlohmann::json;

void Corpus::add(Record record) {
  auto [it, inserted] = index_.emplace(record.id, records_.size());
  if (!inserted) throw Error(ErrorKind::Validation, "duplicate record id: " + record.id);
  records_.push_back(std::move(record));
}

std::optional<std::size_t> Corpus::position(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Record* Corpus::find(std::string_view id) const {
  auto pos = position(id);
  return pos ? &records_[*pos] : nullptr;
}

namespace {

std::string string_field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string())
    throw Error(ErrorKind::Validation, "line " + std::to_string(line) + ": field '" + key + "' must be a string", line);
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array())
    throw Error(ErrorKind::Validation, "line " + std::to_string(line) + ": field '" + key + "' must be an array", line);
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_string())
      throw Error(ErrorKind::Validation,
                  "line " + std::to_string(line) + ": field '" + key + "' must contain only strings", line);
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Record parse_record(std::string_view line, std::size_t line_number) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line_number) + ": " + e.what(), line_number);
  }
  if (!obj.is_object())
    throw Error(ErrorKind::Parse, "line " + std::to_string(line_number) + ": expected a JSON object", line_number);
  if (!obj.contains("id") || obj["id"].is_null())
    throw Error(ErrorKind::Validation, "line " + std::to_string(line_number) + ": record has no id", line_number);

  Record r;
  r.id = string_field(obj, "id", line_number);
  r.title = string_field(obj, "title", line_number);
  r.abstract = string_field(obj, "abstract", line_number);
  r.journal = string_field(obj, "journal", line_number);
  r.authors = string_list(obj, "authors", line_number);
  r.subjects = string_list(obj, "subjects", line_number);
  r.references = string_list(obj, "references", line_number);
  if (auto it = obj.find("year"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer())
      throw Error(ErrorKind::Validation, "line " + std::to_string(line_number) + ": field 'year' must be an integer",
                  line_number);
    r.year = it->get<int>();
  }
  return r;
}

std::string record_to_json(const Record& r) {
  nlohmann::ordered_json obj;
  obj["id"] = r.id;
  obj["title"] = r.title;
  obj["abstract"] = r.abstract;
  if (r.year) obj["year"] = *r.year;
  obj["authors"] = r.authors;
  obj["journal"] = r.journal;
  obj["subjects"] = r.subjects;
  obj["references"] = r.references;
  return obj.dump();
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open corpus file: " + path);
  Corpus corpus;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    corpus.add(parse_record(line, line_number));
  }
  if (in.bad()) throw Error(ErrorKind::Io, "read failure on corpus file: " + path);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write corpus file: " + path);
  for (const auto& r : corpus) out << record_to_json(r) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failure on corpus file: " + path);
}

std::size_t utf8_length(std::string_view text) noexcept {
  // Count lead bytes; continuation bytes have the form 10xxxxxx.
  return static_cast<std::size_t>(
      std::count_if(text.begin(), text.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::optional<std::string_view> removal_reason(const Record& r, std::size_t min_abstract_chars) {
  if (r.id.empty()) return kRemovalReasons[0];
  if (r.title.empty()) return kRemovalReasons[1];
  if (!r.year) return kRemovalReasons[2];
  if (r.authors.empty()) return kRemovalReasons[3];
  if (r.references.empty()) return kRemovalReasons[4];
  if (r.journal.empty()) return kRemovalReasons[5];
  if (utf8_length(r.abstract) <= min_abstract_chars) return kRemovalReasons[6];
  return std::nullopt;
}

std::pair<Corpus, PreprocessReport> preprocess(const Corpus& corpus, std::size_t min_abstract_chars) {
  Corpus kept;
  PreprocessReport report;
  report.input_count = corpus.size();
  for (const auto& r : corpus) {
    if (auto reason = removal_reason(r, min_abstract_chars)) {
      ++report.removal_reasons[std::string(*reason)];
      ++report.removed_count;
    } else {
      kept.add(r);
    }
  }
  report.kept_count = kept.size();
  return {std::move(kept), std::move(report)};
}

Corpus sample(const Corpus& corpus, const SampleConfig& config) {
  if (!(config.probability >= 0.0 && config.probability <= 1.0))
    throw Error(ErrorKind::Config, "sample probability must lie in [0, 1]");
  Rng rng(config.seed);
  Corpus out;
  for (const auto& r : corpus) {
    // One draw per record regardless of p, so the stream position depends only on the index.
    if (rng.bernoulli(config.probability)) out.add(r);
  }
  return out;
}

namespace {

std::vector<std::vector<double>> orthonormal_anchors(std::size_t count, std::size_t dim, Rng& rng) {
  std::vector<std::vector<double>> basis;
  basis.reserve(count);
  while (basis.size() < count) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal();
    for (const auto& b : basis) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += v[i] * b[i];
      for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * b[i];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;  // numerically dependent draw, redraw
    for (auto& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  return basis;
}

std::string synth_abstract(const std::string& id, std::size_t topic) {
  std::string base = "Synthetic abstract of record " + id + " drawn from planted topic " + std::to_string(topic) + ".";
  std::string text = base;
  while (utf8_length(text) <= 120) text += " " + base;
  return text;
}

}  // namespace

SynthCorpus synth_corpus(const SynthConfig& cfg) {
  if (cfg.topic_count < 1) throw Error(ErrorKind::Config, "synth: topic_count must be at least 1");
  if (cfg.dim < cfg.topic_count) throw Error(ErrorKind::Config, "synth: dim must be at least topic_count");
  if (!(cfg.noise_sigma >= 0.0)) throw Error(ErrorKind::Config, "synth: noise_sigma must be nonnegative");
  if (!(cfg.edge_temperature > 0.0)) throw Error(ErrorKind::Config, "synth: edge_temperature must be positive");
  if (!(cfg.mean_out_degree >= 0.0)) throw Error(ErrorKind::Config, "synth: mean_out_degree must be nonnegative");

  Rng rng(cfg.seed);
  const auto anchors = orthonormal_anchors(cfg.topic_count, cfg.dim, rng);
  const std::size_t n = cfg.topic_count * cfg.records_per_topic;

  // Per-component deviation sigma / sqrt(dim), so E|noise|^2 = sigma^2 for any dim.
  const double noise_scale = cfg.noise_sigma / std::sqrt(static_cast<double>(cfg.dim));

  SynthCorpus out;
  out.dim = cfg.dim;
  out.topic_of.reserve(n);
  out.planted.reserve(n);
  std::vector<std::string> ids;
  ids.reserve(n);
  const int width = std::max<int>(5, static_cast<int>(std::to_string(n).size()));

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t topic = i / cfg.records_per_topic;
    std::vector<double> v = anchors[topic];
    for (auto& x : v) x += noise_scale * rng.normal();
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    std::vector<float> planted(cfg.dim);
    for (std::size_t k = 0; k < cfg.dim; ++k) planted[k] = static_cast<float>(v[k] / norm);
    out.planted.push_back(std::move(planted));
    out.topic_of.push_back(topic);
    std::string num = std::to_string(i);
    ids.push_back("R" + std::string(width - num.size(), '0') + num);
  }

  // Citation edges: p(i cites j) = min(1, c_i * exp(-d_ij / tau)) with c_i chosen so the
  // unclipped expected out-degree equals mean_out_degree.
  std::vector<std::vector<std::string>> references(n);
  std::vector<double> dist(n), weight(n);
  for (std::size_t i = 0; i < n && cfg.mean_out_degree > 0.0 && n > 1; ++i) {
    double min_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double dot = 0.0;
      for (std::size_t k = 0; k < cfg.dim; ++k)
        dot += static_cast<double>(out.planted[i][k]) * static_cast<double>(out.planted[j][k]);
      dist[j] = 1.0 - dot;
      min_d = std::min(min_d, dist[j]);
    }
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      // Shifting by the minimum leaves the normalized probabilities unchanged and avoids underflow.
      weight[j] = j == i ? 0.0 : std::exp(-(dist[j] - min_d) / cfg.edge_temperature);
      total += weight[j];
    }
    const double scale = cfg.mean_out_degree / total;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (rng.bernoulli(std::min(1.0, scale * weight[j]))) references[i].push_back(ids[j]);
    }
    if (references[i].empty()) {
      // Every generated record must survive preprocessing, which requires a reference.
      double target = rng.uniform() * total;
      std::size_t pick = i == 0 ? 1 : 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        pick = j;
        target -= weight[j];
        if (target < 0.0) break;
      }
      references[i].push_back(ids[pick]);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t topic = out.topic_of[i];
    Record r;
    r.id = ids[i];
    r.title = "Synthetic record " + ids[i];
    r.abstract = synth_abstract(ids[i], topic);
    r.year = 2000 + static_cast<int>(i % 25);
    r.authors = {"Author " + std::to_string(topic) + "-" + std::to_string(i % 7)};
    r.journal = "Journal of Topic " + std::to_string(topic);
    r.subjects = {"topic-" + std::to_string(topic)};
    r.references = std::move(references[i]);
    out.corpus.add(std::move(r));
  }
  return out;
}

}  // namespace scimap
