#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scimap/corpus.hpp"

namespace scimap {

enum class PathMode { Undirected, Directed };

std::string_view to_string(PathMode mode) noexcept;
PathMode parse_path_mode(std::string_view name);

/// Corpus-internal citation edges (citing -> cited) in CSR layout, with the
/// reverse adjacency kept alongside for undirected traversal.
class CitationGraph {
 public:
  CitationGraph() = default;

  /// Builds from explicit node ids and directed edges given as index pairs.
  /// Self-loops and duplicate edges are dropped.
  static CitationGraph from_edges(std::vector<std::string> ids,
                                  std::span<const std::pair<std::uint64_t, std::uint64_t>> edges);

  std::size_t node_count() const noexcept { return ids_.size(); }
  std::size_t edge_count() const noexcept { return targets_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::optional<std::size_t> index_of(std::string_view id) const;

  std::span<const std::uint64_t> out_neighbors(std::size_t node) const {
    return {targets_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
  }
  std::span<const std::uint64_t> in_neighbors(std::size_t node) const {
    return {rtargets_.data() + roffsets_[node], roffsets_[node + 1] - roffsets_[node]};
  }

  const std::vector<std::uint64_t>& offsets() const noexcept { return offsets_; }
  const std::vector<std::uint64_t>& targets() const noexcept { return targets_; }

  /// References whose target is not in the corpus (counted at build time).
  std::size_t dangling_count = 0;
  std::size_t duplicate_count = 0;
  std::size_t self_loop_count = 0;

  bool operator==(const CitationGraph& o) const { return ids_ == o.ids_ && offsets_ == o.offsets_ && targets_ == o.targets_; }

 private:
  void finalize();

  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<std::uint64_t> targets_;
  std::vector<std::uint64_t> roffsets_{0};
  std::vector<std::uint64_t> rtargets_;
};

CitationGraph build_graph(const Corpus& corpus);

/// Little-endian "CGR1" layout: magic, u64 node_count, u64 edge_count, (node_count+1)
/// u64 CSR offsets, edge_count targets (u32 when node_count < 2^32, else u64), then
/// node_count ids as u16 length + UTF-8 bytes.
void save_graph(const CitationGraph& graph, const std::string& path);
CitationGraph load_graph(const std::string& path);

using Hops = std::optional<std::uint32_t>;

/// BFS hop count, nullopt if unreachable. Throws ErrorKind::NotFound for unknown ids.
Hops shortest_path_distance(const CitationGraph& graph, std::string_view a, std::string_view b,
                            PathMode mode = PathMode::Undirected);

/// Hop distances from one source to every node (nullopt = unreachable).
std::vector<Hops> bfs_distances(const CitationGraph& graph, std::size_t source, PathMode mode = PathMode::Undirected);

struct PairSample {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::uint64_t seed = 0;
  std::size_t count() const noexcept { return pairs.size(); }
};

/// Uniform pairs with replacement over the given ids; endpoints always differ.
PairSample sample_pairs(std::span<const std::string> ids, std::size_t n, std::uint64_t seed);
PairSample sample_pairs(const Corpus& corpus, std::size_t n, std::uint64_t seed);

struct GraphDistanceResult {
  std::vector<Hops> distances;  // parallel to the sample's pairs
  std::size_t reachable_count = 0;
  std::size_t unreachable_count = 0;
  std::map<std::uint32_t, std::size_t> histogram;
};

/// One BFS per distinct source, run on up to `threads` workers; output order
/// and contents do not depend on the thread count.
GraphDistanceResult pairwise_graph_distances(const CitationGraph& graph, const PairSample& sample,
                                             PathMode mode = PathMode::Undirected, std::size_t threads = 1);

}  // namespace scimap
