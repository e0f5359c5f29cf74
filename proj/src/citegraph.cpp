#include "scimap/citegraph.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

#include "binary_io.hpp"
#include "scimap/error.hpp"
#include "scimap/rng.hpp"

namespace scimap {

std::string_view to_string(PathMode mode) noexcept {
  return mode == PathMode::Directed ? "directed" : "undirected";
}

PathMode parse_path_mode(std::string_view name) {
  if (name == "undirected") return PathMode::Undirected;
  if (name == "directed") return PathMode::Directed;
  throw Error(ErrorKind::Config, "unknown path mode '" + std::string(name) + "' (expected undirected or directed)");
}

std::optional<std::size_t> CitationGraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void CitationGraph::finalize() {
  index_.clear();
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) throw Error(ErrorKind::Validation, "duplicate node id: " + ids_[i]);
  }
  const std::size_t n = ids_.size();
  std::vector<std::uint64_t> indegree(n, 0);
  for (auto t : targets_) ++indegree[t];
  roffsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) roffsets_[i + 1] = roffsets_[i] + indegree[i];
  rtargets_.assign(targets_.size(), 0);
  std::vector<std::uint64_t> cursor(roffsets_.begin(), roffsets_.end() - 1);
  for (std::size_t u = 0; u < n; ++u)
    for (auto v : out_neighbors(u)) rtargets_[cursor[v]++] = u;
}

CitationGraph CitationGraph::from_edges(std::vector<std::string> ids,
                                        std::span<const std::pair<std::uint64_t, std::uint64_t>> edges) {
  CitationGraph g;
  g.ids_ = std::move(ids);
  const std::size_t n = g.ids_.size();
  std::vector<std::vector<std::uint64_t>> adj(n);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw Error(ErrorKind::Validation, "edge endpoint out of range");
    if (u == v) {
      ++g.self_loop_count;
      continue;
    }
    adj[u].push_back(v);
  }
  g.offsets_.assign(n + 1, 0);
  g.targets_.clear();
  for (std::size_t u = 0; u < n; ++u) {
    auto& list = adj[u];
    std::sort(list.begin(), list.end());
    const auto before = list.size();
    list.erase(std::unique(list.begin(), list.end()), list.end());
    g.duplicate_count += before - list.size();
    g.targets_.insert(g.targets_.end(), list.begin(), list.end());
    g.offsets_[u + 1] = g.targets_.size();
  }
  g.finalize();
  return g;
}

CitationGraph build_graph(const Corpus& corpus) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& r : corpus) ids.push_back(r.id);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  std::size_t dangling = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& ref : corpus[i].references) {
      if (auto j = corpus.position(ref))
        edges.emplace_back(i, *j);
      else
        ++dangling;
    }
  }
  auto g = CitationGraph::from_edges(std::move(ids), edges);
  g.dangling_count = dangling;
  return g;
}

namespace {
constexpr std::string_view kGraphMagic = "CGR1";
}

void save_graph(const CitationGraph& g, const std::string& path) {
  detail::ByteWriter w;
  w.bytes(kGraphMagic);
  const std::uint64_t n = g.node_count();
  w.u64(n);
  w.u64(g.edge_count());
  for (auto o : g.offsets()) w.u64(o);
  const bool wide = n >= (std::uint64_t{1} << 32);
  for (auto t : g.targets()) {
    if (wide)
      w.u64(t);
    else
      w.u32(static_cast<std::uint32_t>(t));
  }
  for (const auto& id : g.ids()) {
    if (id.size() > 0xFFFF) throw Error(ErrorKind::Validation, "node id longer than 65535 bytes");
    w.u16(static_cast<std::uint16_t>(id.size()));
    w.bytes(id);
  }
  detail::write_file(path, w.buffer());
}

CitationGraph load_graph(const std::string& path) {
  const std::string raw = detail::read_file(path);
  detail::ByteReader r(raw);
  if (r.bytes(kGraphMagic.size()) != kGraphMagic) throw Error(ErrorKind::Format, "not a CGR1 file (bad magic): " + path);
  const std::uint64_t n = r.u64();
  const std::uint64_t m = r.u64();
  if ((n + 1) > r.remaining() / 8)
    throw Error(ErrorKind::Corruption, "truncated CSR offsets at offset " + std::to_string(r.offset()), r.offset());
  std::vector<std::uint64_t> offsets(n + 1);
  for (auto& o : offsets) o = r.u64();
  if (offsets.front() != 0 || offsets.back() != m || !std::is_sorted(offsets.begin(), offsets.end()))
    throw Error(ErrorKind::Corruption, "inconsistent CSR offsets in " + path, r.offset());
  const bool wide = n >= (std::uint64_t{1} << 32);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  edges.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(m, r.remaining() / 4)));
  for (std::uint64_t u = 0; u < n; ++u) {
    for (auto e = offsets[u]; e < offsets[u + 1]; ++e) {
      const std::uint64_t t = wide ? r.u64() : r.u32();
      if (t >= n) throw Error(ErrorKind::Corruption, "edge target out of range in " + path, r.offset());
      edges.emplace_back(u, t);
    }
  }
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, r.remaining() / 2)));
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto len = r.u16();
    ids.emplace_back(r.bytes(len));
  }
  if (r.remaining() != 0)
    throw Error(ErrorKind::Corruption, "trailing bytes at offset " + std::to_string(r.offset()), r.offset());
  auto g = CitationGraph::from_edges(std::move(ids), edges);
  if (g.edge_count() != m) throw Error(ErrorKind::Corruption, "graph file holds self-loops or duplicate edges: " + path);
  return g;
}

namespace {

constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();

// Scratch buffer reused across traversals; only touched entries are reset.
struct BfsScratch {
  std::vector<std::uint32_t> dist;
  std::vector<std::uint64_t> queue;

  explicit BfsScratch(std::size_t n) : dist(n, kUnvisited) { queue.reserve(n); }

  void run(const CitationGraph& g, std::size_t source, PathMode mode) {
    for (auto v : queue) dist[v] = kUnvisited;
    queue.clear();
    dist[source] = 0;
    queue.push_back(source);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto u = queue[head];
      const auto next = dist[u] + 1;
      auto visit = [&](std::uint64_t v) {
        if (dist[v] == kUnvisited) {
          dist[v] = next;
          queue.push_back(v);
        }
      };
      for (auto v : g.out_neighbors(u)) visit(v);
      if (mode == PathMode::Undirected)
        for (auto v : g.in_neighbors(u)) visit(v);
    }
  }

  Hops at(std::size_t v) const { return dist[v] == kUnvisited ? Hops{} : Hops{dist[v]}; }
};

std::size_t require_node(const CitationGraph& g, std::string_view id) {
  auto idx = g.index_of(id);
  if (!idx) throw Error(ErrorKind::NotFound, "id '" + std::string(id) + "' is not a graph node");
  return *idx;
}

}  // namespace

std::vector<Hops> bfs_distances(const CitationGraph& g, std::size_t source, PathMode mode) {
  BfsScratch scratch(g.node_count());
  scratch.run(g, source, mode);
  std::vector<Hops> out(g.node_count());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = scratch.at(v);
  return out;
}

Hops shortest_path_distance(const CitationGraph& g, std::string_view a, std::string_view b, PathMode mode) {
  const auto s = require_node(g, a);
  const auto t = require_node(g, b);
  if (s == t) return 0u;
  BfsScratch scratch(g.node_count());
  scratch.run(g, s, mode);
  return scratch.at(t);
}

PairSample sample_pairs(std::span<const std::string> ids, std::size_t n, std::uint64_t seed) {
  PairSample sample;
  sample.seed = seed;
  if (n == 0) return sample;
  if (ids.size() < 2) throw Error(ErrorKind::Validation, "sample_pairs needs at least 2 records");
  Rng rng(seed);
  const std::uint64_t size = ids.size();
  sample.pairs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = rng.below(size);
    auto j = rng.below(size - 1);
    if (j >= i) ++j;
    sample.pairs.emplace_back(ids[i], ids[j]);
  }
  return sample;
}

PairSample sample_pairs(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& r : corpus) ids.push_back(r.id);
  return sample_pairs(ids, n, seed);
}

GraphDistanceResult pairwise_graph_distances(const CitationGraph& g, const PairSample& sample, PathMode mode,
                                             std::size_t threads) {
  const std::size_t n = sample.count();
  std::vector<std::pair<std::size_t, std::size_t>> endpoints(n);
  for (std::size_t k = 0; k < n; ++k)
    endpoints[k] = {require_node(g, sample.pairs[k].first), require_node(g, sample.pairs[k].second)};

  // Group pair indices by source node.
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return endpoints[x].first < endpoints[y].first; });
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) into order
  for (std::size_t k = 0; k < n;) {
    std::size_t e = k;
    while (e < n && endpoints[order[e]].first == endpoints[order[k]].first) ++e;
    groups.emplace_back(k, e);
    k = e;
  }

  GraphDistanceResult result;
  result.distances.assign(n, Hops{});
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    BfsScratch scratch(g.node_count());
    for (;;) {
      const std::size_t gi = next.fetch_add(1);
      if (gi >= groups.size()) return;
      const auto [b, e] = groups[gi];
      scratch.run(g, endpoints[order[b]].first, mode);
      for (std::size_t k = b; k < e; ++k) result.distances[order[k]] = scratch.at(endpoints[order[k]].second);
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, groups.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  for (const auto& d : result.distances) {
    if (d) {
      ++result.reachable_count;
      ++result.histogram[*d];
    } else {
      ++result.unreachable_count;
    }
  }
  return result;
}

}  // namespace scimap
