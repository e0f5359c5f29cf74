#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scimap/corpus.hpp"

namespace scimap {

/// Raw contents of an "EMBS" file: ids plus a row-major count x dim float matrix.
/// No norm requirement; subject centers use this directly.
struct VectorTable {
  std::uint32_t dim = 0;
  std::vector<std::string> ids;
  std::vector<float> data;

  bool operator==(const VectorTable&) const = default;
};

/// Writes the little-endian EMBS layout: magic "EMBS", u32 version (1), u32 dim,
/// u64 count, then per entry u16 id length, id bytes, dim x f32.
void write_vector_table(const VectorTable& table, const std::string& path);

/// Throws ErrorKind::Format on bad magic/version and ErrorKind::Corruption (with the
/// byte offset where data ran out) on truncation.
VectorTable read_vector_table(const std::string& path);

/// Id-indexed unit vectors of a fixed dimension, in insertion order.
class EmbeddingStore {
 public:
  static constexpr double kNormTolerance = 1e-5;

  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim, std::string model = {}) : dim_(dim), model_(std::move(model)) {}

  /// Throws on dimension mismatch, duplicate id, non-finite entries or a norm
  /// further than kNormTolerance from 1.
  void add(std::string id, std::span<const float> vector);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  const std::string& model() const noexcept { return model_; }
  void set_model(std::string model) { model_ = std::move(model); }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::optional<std::size_t> position(std::string_view id) const;
  /// Throws ErrorKind::NotFound when the id is absent.
  std::span<const float> at(std::string_view id) const;

  const std::vector<float>& data() const noexcept { return data_; }

  bool operator==(const EmbeddingStore& o) const {
    return dim_ == o.dim_ && model_ == o.model_ && ids_ == o.ids_ && data_ == o.data_;
  }

 private:
  std::size_t dim_ = 0;
  std::string model_;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Saves `path` in EMBS format plus `path + ".meta.json"` carrying the model name.
void save_store(const EmbeddingStore& store, const std::string& path);
EmbeddingStore load_store(const std::string& path);

/// L2-normalizes into float. Throws ErrorKind::Protocol for zero or non-finite input.
std::vector<float> normalize_to_unit(std::span<const double> values);
std::vector<float> normalize_to_unit(std::span<const float> values);

enum class ProviderKind { Http, Mock, Planted };

std::string_view to_string(ProviderKind kind) noexcept;
ProviderKind parse_provider(std::string_view name);

struct EmbedderConfig {
  ProviderKind provider = ProviderKind::Mock;
  std::string endpoint = "http://localhost:11434";
  std::string model = "mxbai-embed-large:335m";
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds timeout{60'000};
  std::size_t retry_count = 3;
  std::chrono::milliseconds retry_backoff{250};
  /// Mock provider only.
  std::uint64_t seed = 0;
  std::size_t dim = 1024;
  /// Planted provider only: source of the ground-truth vectors.
  std::shared_ptr<const EmbeddingStore> planted;
};

struct TextItem {
  std::string id;
  std::string text;
};

/// One backend. Implementations must tolerate concurrent embed_batch calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Returns one raw (not necessarily normalized) vector per item, in order.
  virtual std::vector<std::vector<float>> embed_batch(std::span<const TextItem> batch) const = 0;
  virtual std::string model_name() const = 0;
};

std::unique_ptr<EmbeddingProvider> make_provider(const EmbedderConfig& config);

/// Pseudo-random unit vector seeded by (seed, text); roughly uniform on the sphere.
std::vector<float> mock_embed(std::uint64_t seed, std::size_t dim, std::string_view text);

/// Embeds all texts in batches of cfg.batch_size with up to cfg.max_in_flight
/// batches outstanding. Transport failures are retried cfg.retry_count times;
/// any batch that still fails aborts the whole call, so no partial store escapes.
EmbeddingStore embed_texts(const EmbedderConfig& config, std::span<const TextItem> texts);
EmbeddingStore embed_texts(const EmbeddingProvider& provider, const EmbedderConfig& config,
                           std::span<const TextItem> texts);

/// Store holding exactly the synthetic corpus's planted vectors.
EmbeddingStore planted_embed(const SynthCorpus& synth);

/// (id, abstract) pairs for every record, in corpus order.
std::vector<TextItem> abstracts_of(const Corpus& corpus);

}  // namespace scimap
