#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace scimap {

/// One publication.
struct Record {
  std::string id;
  std::string title;
  std::string abstract;
  std::optional<int> year;
  std::vector<std::string> authors;
  std::string journal;
  std::vector<std::string> subjects;
  std::vector<std::string> references;

  bool operator==(const Record&) const = default;
};

/// Insertion-ordered records with an id index. Immutable once built; safe to
/// share across threads for reading.
class Corpus {
 public:
  Corpus() = default;

  /// Appends a record. Throws ErrorKind::Validation if the id is already present.
  void add(Record record);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::vector<Record>& records() const noexcept { return records_; }
  const Record& operator[](std::size_t i) const { return records_[i]; }
  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

  std::optional<std::size_t> position(std::string_view id) const;
  const Record* find(std::string_view id) const;

  bool operator==(const Corpus& other) const { return records_ == other.records_; }

 private:
  std::vector<Record> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Removal reasons, in the order they are tested.
inline constexpr std::string_view kRemovalReasons[] = {"id", "title", "year", "authors", "references", "journal", "abstract-length"};

struct PreprocessReport {
  std::size_t input_count = 0;
  std::size_t removed_count = 0;
  std::size_t kept_count = 0;
  std::map<std::string, std::size_t> removal_reasons;
};

struct SampleConfig {
  double probability = 1e-3;
  std::uint64_t seed = 0;
};

/// Planted-topic generator settings. Each record's vector is
/// normalize(anchor + noise) with noise ~ N(0, sigma^2 / dim * I), i.e. sigma is
/// the expected noise norm relative to the unit anchor.
struct SynthConfig {
  std::size_t topic_count = 5;
  std::size_t records_per_topic = 200;
  std::size_t dim = 128;
  double noise_sigma = 0.1;
  double edge_temperature = 0.2;
  double mean_out_degree = 8.0;
  std::uint64_t seed = 0;
};

/// Synthetic corpus plus the ground truth it was generated from. `topic_of` and
/// `planted` are parallel to `corpus.records()`.
struct SynthCorpus {
  Corpus corpus;
  std::vector<std::size_t> topic_of;
  std::vector<std::vector<float>> planted;
  std::size_t dim = 0;
};

/// Parses one JSONL line. `line_number` is only used for error messages.
Record parse_record(std::string_view line, std::size_t line_number = 1);

/// Serializes a record as a single-line JSON object with the canonical field order.
std::string record_to_json(const Record& record);

Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t utf8_length(std::string_view text) noexcept;

/// Returns the first failing rule for a record, or nullopt if the record is kept.
std::optional<std::string_view> removal_reason(const Record& record, std::size_t min_abstract_chars = 100);

std::pair<Corpus, PreprocessReport> preprocess(const Corpus& corpus, std::size_t min_abstract_chars = 100);

/// Independent Bernoulli(p) selection per record; order preserved.
Corpus sample(const Corpus& corpus, const SampleConfig& config);

SynthCorpus synth_corpus(const SynthConfig& config);

}  // namespace scimap
