#include "scimap/embedder.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "binary_io.hpp"
#include "scimap/error.hpp"
#include "scimap/rng.hpp"

namespace scimap {

using nlohmann::json;

namespace {
constexpr std::string_view kEmbsMagic = "EMBS";
constexpr std::uint32_t kEmbsVersion = 1;
}  // namespace

void write_vector_table(const VectorTable& table, const std::string& path) {
  if (table.data.size() != table.ids.size() * table.dim)
    throw Error(ErrorKind::DimensionMismatch, "vector table data size does not match count x dim");
  detail::ByteWriter w;
  w.bytes(kEmbsMagic);
  w.u32(kEmbsVersion);
  w.u32(table.dim);
  w.u64(table.ids.size());
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    const auto& id = table.ids[i];
    if (id.size() > 0xFFFF) throw Error(ErrorKind::Validation, "id longer than 65535 bytes: " + id.substr(0, 32) + "...");
    w.u16(static_cast<std::uint16_t>(id.size()));
    w.bytes(id);
    for (std::size_t k = 0; k < table.dim; ++k) w.f32(table.data[i * table.dim + k]);
  }
  detail::write_file(path, w.buffer());
}

VectorTable read_vector_table(const std::string& path) {
  const std::string raw = detail::read_file(path);
  detail::ByteReader r(raw);
  if (r.bytes(kEmbsMagic.size()) != kEmbsMagic) throw Error(ErrorKind::Format, "not an EMBS file (bad magic): " + path);
  if (auto version = r.u32(); version != kEmbsVersion)
    throw Error(ErrorKind::Format, "unsupported EMBS version " + std::to_string(version) + ": " + path);
  VectorTable t;
  t.dim = r.u32();
  const std::uint64_t count = r.u64();
  const std::uint64_t min_entry = 2 + 4ULL * t.dim;
  t.ids.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, r.remaining() / min_entry)));
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint16_t len = r.u16();
    t.ids.emplace_back(r.bytes(len));
    for (std::uint32_t k = 0; k < t.dim; ++k) t.data.push_back(r.f32());
  }
  if (r.remaining() != 0)
    throw Error(ErrorKind::Corruption, "trailing bytes after last entry at offset " + std::to_string(r.offset()),
                r.offset());
  return t;
}

void EmbeddingStore::add(std::string id, std::span<const float> vector) {
  if (vector.size() != dim_)
    throw Error(ErrorKind::DimensionMismatch, "vector for '" + id + "' has dim " + std::to_string(vector.size()) +
                                                  ", store dim is " + std::to_string(dim_));
  double norm2 = 0.0;
  for (float x : vector) {
    if (!std::isfinite(x)) throw Error(ErrorKind::Validation, "non-finite entry in vector for '" + id + "'");
    norm2 += static_cast<double>(x) * static_cast<double>(x);
  }
  if (std::abs(std::sqrt(norm2) - 1.0) > kNormTolerance)
    throw Error(ErrorKind::Validation, "vector for '" + id + "' is not unit norm");
  auto [it, inserted] = index_.emplace(id, ids_.size());
  if (!inserted) throw Error(ErrorKind::Validation, "duplicate id in store: " + id);
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::size_t> EmbeddingStore::position(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingStore::at(std::string_view id) const {
  auto pos = position(id);
  if (!pos) throw Error(ErrorKind::NotFound, "no embedding for id '" + std::string(id) + "'");
  return vector(*pos);
}

void save_store(const EmbeddingStore& store, const std::string& path) {
  VectorTable t;
  t.dim = static_cast<std::uint32_t>(store.dim());
  t.ids = store.ids();
  t.data = store.data();
  write_vector_table(t, path);
  json meta = {{"format", "EMBS"}, {"model", store.model()}, {"dim", store.dim()}, {"count", store.size()}};
  detail::write_file(path + ".meta.json", meta.dump(2) + "\n");
}

EmbeddingStore load_store(const std::string& path) {
  VectorTable t = read_vector_table(path);
  std::string model;
  try {
    const auto meta = json::parse(detail::read_file(path + ".meta.json"));
    model = meta.value("model", std::string{});
  } catch (const Error&) {
    // A store without a sidecar loads with an empty model name.
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, "malformed store sidecar " + path + ".meta.json: " + e.what());
  }
  EmbeddingStore store(t.dim, std::move(model));
  for (std::size_t i = 0; i < t.ids.size(); ++i)
    store.add(std::move(t.ids[i]), std::span<const float>(t.data.data() + i * t.dim, t.dim));
  return store;
}

namespace {

template <typename T>
std::vector<float> normalize_impl(std::span<const T> values) {
  double norm2 = 0.0;
  for (T x : values) {
    if (!std::isfinite(static_cast<double>(x))) throw Error(ErrorKind::Protocol, "embedding has non-finite entries");
    norm2 += static_cast<double>(x) * static_cast<double>(x);
  }
  const double norm = std::sqrt(norm2);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorKind::Protocol, "embedding has zero or infinite norm");
  std::vector<float> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = static_cast<float>(static_cast<double>(values[i]) / norm);
  return out;
}

}  // namespace

std::vector<float> normalize_to_unit(std::span<const double> values) { return normalize_impl(values); }
std::vector<float> normalize_to_unit(std::span<const float> values) { return normalize_impl(values); }

std::string_view to_string(ProviderKind kind) noexcept {
  switch (kind) {
    case ProviderKind::Http: return "http";
    case ProviderKind::Mock: return "mock";
    case ProviderKind::Planted: return "planted";
  }
  return "unknown";
}

ProviderKind parse_provider(std::string_view name) {
  if (name == "http") return ProviderKind::Http;
  if (name == "mock") return ProviderKind::Mock;
  if (name == "planted") return ProviderKind::Planted;
  throw Error(ErrorKind::Config, "unknown embedding provider '" + std::string(name) + "' (expected http, mock, planted)");
}

std::vector<float> mock_embed(std::uint64_t seed, std::size_t dim, std::string_view text) {
  if (dim == 0) throw Error(ErrorKind::Config, "mock embedding dim must be at least 1");
  Rng rng(splitmix64(fnv1a64(text) ^ splitmix64(seed)));
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.normal();
  return normalize_to_unit(std::span<const double>(v));
}

namespace {

class MockProvider final : public EmbeddingProvider {
 public:
  MockProvider(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {
    if (dim_ == 0) throw Error(ErrorKind::Config, "mock embedding dim must be at least 1");
  }
  std::vector<std::vector<float>> embed_batch(std::span<const TextItem> batch) const override {
    std::vector<std::vector<float>> out;
    out.reserve(batch.size());
    for (const auto& item : batch) out.push_back(mock_embed(seed_, dim_, item.text));
    return out;
  }
  std::string model_name() const override { return "mock"; }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

class PlantedProvider final : public EmbeddingProvider {
 public:
  explicit PlantedProvider(std::shared_ptr<const EmbeddingStore> planted) : planted_(std::move(planted)) {
    if (!planted_) throw Error(ErrorKind::Config, "planted provider requires planted vectors");
  }
  std::vector<std::vector<float>> embed_batch(std::span<const TextItem> batch) const override {
    std::vector<std::vector<float>> out;
    out.reserve(batch.size());
    for (const auto& item : batch) {
      auto pos = planted_->position(item.id);
      if (!pos) throw Error(ErrorKind::NotFound, "record '" + item.id + "' has no planted vector");
      auto v = planted_->vector(*pos);
      out.emplace_back(v.begin(), v.end());
    }
    return out;
  }
  std::string model_name() const override { return "planted"; }

 private:
  std::shared_ptr<const EmbeddingStore> planted_;
};

class HttpProvider final : public EmbeddingProvider {
 public:
  explicit HttpProvider(const EmbedderConfig& cfg) : model_(cfg.model), timeout_(cfg.timeout) {
    // Split "http://host:port/prefix" into the client base and the path prefix.
    const auto scheme_end = cfg.endpoint.find("://");
    if (scheme_end == std::string::npos || cfg.endpoint.substr(0, scheme_end) != "http")
      throw Error(ErrorKind::Config, "endpoint must be an http:// URL: " + cfg.endpoint);
    const auto path_start = cfg.endpoint.find('/', scheme_end + 3);
    base_ = cfg.endpoint.substr(0, path_start);
    if (path_start != std::string::npos) prefix_ = cfg.endpoint.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  std::vector<std::vector<float>> embed_batch(std::span<const TextItem> batch) const override {
    httplib::Client client(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    json body = {{"model", model_}, {"input", json::array()}};
    for (const auto& item : batch) body["input"].push_back(item.text);
    auto res = client.Post(prefix_ + "/api/embed", body.dump(), "application/json");
    if (!res) throw Error(ErrorKind::Transport, "request to " + base_ + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw Error(ErrorKind::Transport, "HTTP status " + std::to_string(res->status) + " from " + base_);

    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Protocol, std::string("embed response is not JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("embeddings") || !reply["embeddings"].is_array())
      throw Error(ErrorKind::Protocol, "embed response lacks an 'embeddings' array");
    std::vector<std::vector<float>> out;
    out.reserve(batch.size());
    try {
      for (const auto& row : reply["embeddings"]) out.push_back(row.get<std::vector<float>>());
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Protocol, std::string("malformed embedding row: ") + e.what());
    }
    return out;
  }

  std::string model_name() const override { return model_; }

 private:
  std::string model_;
  std::chrono::milliseconds timeout_;
  std::string base_;
  std::string prefix_;
};

}  // namespace

std::unique_ptr<EmbeddingProvider> make_provider(const EmbedderConfig& cfg) {
  switch (cfg.provider) {
    case ProviderKind::Http: return std::make_unique<HttpProvider>(cfg);
    case ProviderKind::Mock: return std::make_unique<MockProvider>(cfg.seed, cfg.dim);
    case ProviderKind::Planted: return std::make_unique<PlantedProvider>(cfg.planted);
  }
  throw Error(ErrorKind::Config, "unknown provider");
}

EmbeddingStore embed_texts(const EmbedderConfig& cfg, std::span<const TextItem> texts) {
  auto provider = make_provider(cfg);
  return embed_texts(*provider, cfg, texts);
}

EmbeddingStore embed_texts(const EmbeddingProvider& provider, const EmbedderConfig& cfg,
                           std::span<const TextItem> texts) {
  if (cfg.batch_size < 1) throw Error(ErrorKind::Config, "batch_size must be at least 1");
  if (cfg.max_in_flight < 1) throw Error(ErrorKind::Config, "max_in_flight must be at least 1");
  if (texts.empty()) throw Error(ErrorKind::Validation, "no texts to embed");
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& t : texts)
      if (!seen.insert(t.id).second) throw Error(ErrorKind::Validation, "duplicate id in embed request: " + t.id);
  }

  const std::size_t batch_count = (texts.size() + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<std::vector<std::vector<float>>> results(batch_count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_batch = batch_count;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= batch_count || failed.load()) return;
      const std::size_t begin = b * cfg.batch_size;
      const auto batch = texts.subspan(begin, std::min(cfg.batch_size, texts.size() - begin));
      try {
        for (std::size_t attempt = 0;; ++attempt) {
          try {
            results[b] = provider.embed_batch(batch);
            break;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::Transport || attempt >= cfg.retry_count) throw;
            std::this_thread::sleep_for(cfg.retry_backoff * static_cast<long>(attempt + 1));
          }
        }
        if (results[b].size() != batch.size())
          throw Error(ErrorKind::Protocol, "provider returned " + std::to_string(results[b].size()) +
                                               " vectors for " + std::to_string(batch.size()) + " texts");
      } catch (const Error& e) {
        std::lock_guard lock(error_mutex);
        failed = true;
        if (b < error_batch) {
          error_batch = b;
          error = std::make_exception_ptr(
              Error(e.kind(), "batch " + std::to_string(b) + " (items " + std::to_string(begin) + ".." +
                                  std::to_string(begin + batch.size() - 1) + "): " + e.what()));
        }
        return;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        failed = true;
        if (b < error_batch) {
          error_batch = b;
          error = std::current_exception();
        }
        return;
      }
    }
  };

  const std::size_t workers = std::min(cfg.max_in_flight, batch_count);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  const std::size_t dim = results.front().front().size();
  EmbeddingStore store(dim, provider.model_name());
  std::size_t item = 0;
  for (const auto& batch : results) {
    for (const auto& raw : batch) {
      if (raw.size() != dim)
        throw Error(ErrorKind::Protocol, "dimension mismatch: got " + std::to_string(raw.size()) + ", expected " +
                                             std::to_string(dim) + " for '" + texts[item].id + "'");
      auto unit = normalize_to_unit(std::span<const float>(raw));
      store.add(texts[item].id, unit);
      ++item;
    }
  }
  return store;
}

EmbeddingStore planted_embed(const SynthCorpus& synth) {
  if (synth.planted.size() != synth.corpus.size())
    throw Error(ErrorKind::NotFound, "synthetic corpus is missing planted vectors");
  EmbeddingStore store(synth.dim, "planted");
  for (std::size_t i = 0; i < synth.corpus.size(); ++i) store.add(synth.corpus[i].id, synth.planted[i]);
  return store;
}

std::vector<TextItem> abstracts_of(const Corpus& corpus) {
  std::vector<TextItem> out;
  out.reserve(corpus.size());
  for (const auto& r : corpus) out.push_back({r.id, r.abstract});
  return out;
}

}  // namespace scimap
