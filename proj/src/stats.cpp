#include <algorithm>
#include <cmath>
#include <limits>

#include "scimap/analysis.hpp"
#include "scimap/error.hpp"

namespace scimap {

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw Error(ErrorKind::Validation, "pearson: inputs have different lengths (" + std::to_string(xs.size()) + " vs " +
                                           std::to_string(ys.size()) + ")");
  if (xs.size() < 2) throw Error(ErrorKind::Validation, "pearson: need at least 2 pairs");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw Error(ErrorKind::UndefinedCorrelation, "pearson: zero variance, correlation undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationReport correlate_distances(const EmbeddingStore& store, const CitationGraph& graph,
                                      const PairSample& sample, PathMode mode, std::size_t threads) {
  return correlate_distances(store, sample, pairwise_graph_distances(graph, sample, mode, threads), mode);
}

CorrelationReport correlate_distances(const EmbeddingStore& store, const PairSample& sample,
                                      const GraphDistanceResult& distances, PathMode mode) {
  if (distances.distances.size() != sample.count())
    throw Error(ErrorKind::Validation, "graph distances do not match the pair sample");
  CorrelationReport report;
  report.model = store.model();
  report.mode = mode;
  std::vector<double> emb, hops;
  for (std::size_t k = 0; k < sample.count(); ++k) {
    const auto& hop = distances.distances[k];
    if (!hop) {
      ++report.pair_count_excluded;
      continue;
    }
    const auto& [a, b] = sample.pairs[k];
    const double d = cosine_distance(store.at(a), store.at(b));
    report.scatter.push_back({d, *hop});
    emb.push_back(d);
    hops.push_back(static_cast<double>(*hop));
  }
  report.pair_count_used = report.scatter.size();
  if (report.pair_count_used < 2)
    throw Error(ErrorKind::UndefinedCorrelation, "correlate_distances: only " + std::to_string(report.pair_count_used) +
                                                     " reachable pairs, need at least 2");
  report.pcc = pearson(emb, hops);
  return report;
}

InterdisciplinarityScore interdisciplinarity_score(std::span<const std::string> ids, const EmbeddingStore& store,
                                                   const CitationGraph& graph, PathMode mode) {
  if (ids.size() < 2) throw Error(ErrorKind::Validation, "interdisciplinarity_score: need at least 2 records");
  InterdisciplinarityScore out;

  std::vector<double> mean(store.dim(), 0.0);
  for (const auto& id : ids) {
    const auto v = store.at(id);
    for (std::size_t k = 0; k < v.size(); ++k) mean[k] += v[k];
  }
  double dispersion = 0.0;
  for (const auto& id : ids) dispersion += cosine_distance(store.at(id), std::span<const double>(mean));
  out.embedding_dispersion = dispersion / static_cast<double>(ids.size());

  std::vector<std::size_t> nodes;
  nodes.reserve(ids.size());
  for (const auto& id : ids) {
    auto idx = graph.index_of(id);
    if (!idx) throw Error(ErrorKind::NotFound, "id '" + id + "' is not a graph node");
    nodes.push_back(*idx);
  }
  double hop_sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto dist = bfs_distances(graph, nodes[i], mode);
    // Directed distances are asymmetric, so every ordered pair counts there.
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j == i || (mode == PathMode::Undirected && j < i)) continue;
      if (const auto& h = dist[nodes[j]]) {
        ++out.reachable_pairs;
        hop_sum += *h;
      } else {
        ++out.unreachable_pairs;
      }
    }
  }
  if (out.reachable_pairs > 0) {
    out.mean_hop_distance = hop_sum / static_cast<double>(out.reachable_pairs);
    out.score = out.embedding_dispersion / (1.0 + *out.mean_hop_distance);
  }
  return out;
}

std::vector<RankedPair> distant_similarity_pairs(const EmbeddingStore& store, const CitationGraph& graph,
                                                 const PairSample& sample, std::size_t top_k, PathMode mode,
                                                 std::size_t threads) {
  return distant_similarity_pairs(store, sample, pairwise_graph_distances(graph, sample, mode, threads), top_k);
}

std::vector<RankedPair> distant_similarity_pairs(const EmbeddingStore& store, const PairSample& sample,
                                                 const GraphDistanceResult& distances, std::size_t top_k) {
  if (distances.distances.size() != sample.count())
    throw Error(ErrorKind::Validation, "graph distances do not match the pair sample");
  std::vector<RankedPair> ranked;
  ranked.reserve(sample.count());
  for (std::size_t k = 0; k < sample.count(); ++k) {
    const auto& [a, b] = sample.pairs[k];
    RankedPair p;
    p.a = a;
    p.b = b;
    p.cosine_distance = cosine_distance(store.at(a), store.at(b));
    p.hops = distances.distances[k];
    p.score = p.hops ? static_cast<double>(*p.hops) / (kDistantSimilarityEpsilon + p.cosine_distance)
                     : std::numeric_limits<double>::infinity();
    p.sample_index = k;
    ranked.push_back(std::move(p));
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedPair& x, const RankedPair& y) {
    if (!x.hops != !y.hops) return !x.hops;
    if (!x.hops) return x.cosine_distance < y.cosine_distance;
    return x.score > y.score;
  });
  if (ranked.size() > top_k) ranked.resize(top_k);
  return ranked;
}

}  // namespace scimap
