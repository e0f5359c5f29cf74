// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "scimap/analysis.hpp"
#include "scimap/error.hpp"
#include "scimap/pipeline.hpp"
#include "scimap/rng.hpp"

using namespace scimap;
using scimap::testing::TempDir;
using scimap::testing::valid_record;
namespace fs = std::filesystem;

namespace {

/// Collects failed checks for one criterion; the first few are reported.
class Checker {
 public:
  void check(bool ok, const std::string& what) {
    ++total_;
    if (!ok) failures_.push_back(what);
  }
  void note(std::string text) { notes_.push_back(std::move(text)); }
  bool ok() const { return failures_.empty(); }
  std::size_t total() const { return total_; }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::size_t total_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return static_cast<ErrorKind>(-1);
}

std::vector<float> random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.normal();
  return normalize_to_unit(std::span<const double>(v));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---------------------------------------------------------------------------

void preprocessing_rules(Checker& c) {
  std::vector<std::pair<Record, std::string>> fixture;  // record, expected reason ("" = kept)
  auto add = [&](Record r, std::string reason) { fixture.emplace_back(std::move(r), std::move(reason)); };
  std::string accented;
  for (int i = 0; i < 101; ++i) accented += "\xc3\xa9";

  add(valid_record("k1"), "");
  add(valid_record("k2", {"a", "b"}, {"k1", "k3"}), "");
  {
    auto r = valid_record("k3");
    r.abstract = std::string(101, 'x');
    add(r, "");
  }
  {
    auto r = valid_record("k4");
    r.abstract = accented;  // 101 characters, 202 bytes
    add(r, "");
  }
  add(valid_record("k5", {}), "");                  // subjects are not a rule
  add(valid_record("k6", {"a"}, {"outside"}), "");  // dangling references are allowed
  {
    auto r = valid_record("");
    add(r, "id");
  }
  {
    auto r = valid_record("t1");
    r.title.clear();
    add(r, "title");
  }
  {
    auto r = valid_record("t2");
    r.title.clear();
    r.year.reset();
    add(r, "title");
  }
  {
    auto r = valid_record("y1");
    r.year.reset();
    add(r, "year");
  }
  {
    auto r = valid_record("y2");
    r.year.reset();
    r.authors.clear();
    add(r, "year");
  }
  {
    auto r = valid_record("a1");
    r.authors.clear();
    add(r, "authors");
  }
  {
    auto r = valid_record("a2");
    r.authors.clear();
    r.references.clear();
    add(r, "authors");
  }
  {
    auto r = valid_record("r1");
    r.references.clear();
    add(r, "references");
  }
  {
    auto r = valid_record("r2");
    r.references.clear();
    r.abstract = "short";
    add(r, "references");
  }
  {
    auto r = valid_record("j1");
    r.journal.clear();
    add(r, "journal");
  }
  {
    auto r = valid_record("j2");
    r.journal.clear();
    r.abstract.clear();
    add(r, "journal");
  }
  {
    auto r = valid_record("l1");
    r.abstract = std::string(100, 'x');  // must exceed 100
    add(r, "abstract-length");
  }
  {
    auto r = valid_record("l2");
    r.abstract = accented.substr(0, 200);  // 100 characters, 200 bytes
    add(r, "abstract-length");
  }
  {
    auto r = valid_record("l3");
    r.abstract.clear();
    add(r, "abstract-length");
  }
  c.check(fixture.size() == 20, "fixture has 20 records");

  Corpus corpus;
  std::vector<std::string> expected_kept;
  std::map<std::string, std::size_t> expected_reasons;
  for (const auto& [r, reason] : fixture) {
    corpus.add(r);
    if (reason.empty())
      expected_kept.push_back(r.id);
    else
      ++expected_reasons[reason];
  }
  c.check(expected_reasons.size() == std::size(kRemovalReasons), "fixture exercises every removal reason");

  auto [kept, report] = preprocess(corpus);
  std::vector<std::string> kept_ids;
  for (const auto& r : kept) kept_ids.push_back(r.id);
  c.check(kept_ids == expected_kept, "kept set");
  c.check(report.removal_reasons == expected_reasons, "reason counts");
  c.check(report.input_count == 20 && report.kept_count == expected_kept.size() &&
              report.removed_count == 20 - expected_kept.size(),
          "report arithmetic");
  for (const auto& [r, reason] : fixture) {
    auto got = removal_reason(r);
    c.check(reason.empty() ? !got.has_value() : got == std::optional<std::string_view>(reason),
            "per-record reason for '" + r.id + "'");
  }
  c.check(preprocess(kept).first == kept, "idempotent");
  c.note("kept " + std::to_string(report.kept_count) + ", removed " + std::to_string(report.removed_count));
}

void sampling(Checker& c) {
  Corpus corpus;
  for (int i = 0; i < 100'000; ++i) {
    Record r;
    r.id = "id" + std::to_string(i);
    corpus.add(std::move(r));
  }
  const double mean = 1000.0, sd = std::sqrt(100'000 * 0.01 * 0.99);
  std::size_t lo = 1'000'000, hi = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto s = sample(corpus, {0.01, seed});
    lo = std::min(lo, s.size());
    hi = std::max(hi, s.size());
    c.check(std::abs(double(s.size()) - mean) <= 4 * sd, "seed " + std::to_string(seed) + " size within 4 sigma");
    c.check(sample(corpus, {0.01, seed}) == s, "seed " + std::to_string(seed) + " deterministic");
  }
  c.note("sizes in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], bound " + fmt("%.1f", mean - 4 * sd) +
         ".." + fmt("%.1f", mean + 4 * sd));
}

void vector_store(Checker& c) {
  TempDir dir;
  Rng rng(2024);
  const std::size_t dim = 128;
  EmbeddingStore store(dim, "acceptance-model");
  for (int i = 0; i < 1000; ++i) store.add("vec-" + std::to_string(i), random_unit(rng, dim));
  const auto path = dir.file("store.embs");
  save_store(store, path);
  const auto back = load_store(path);
  c.check(back.ids() == store.ids() && back.dim() == dim && back.model() == store.model(), "metadata round trip");
  c.check(back.data().size() == store.data().size() &&
              std::memcmp(back.data().data(), store.data().data(), store.data().size() * sizeof(float)) == 0,
          "vectors bitwise identical");

  const std::string bytes = slurp(path);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream(dir.file(name), std::ios::binary) << content;
    return dir.file(name);
  };
  auto wrong = bytes;
  wrong[1] = 'Z';
  c.check(kind_of([&] { read_vector_table(write("magic.embs", wrong)); }) == ErrorKind::Format, "wrong magic -> format error");

  const std::string truncated = bytes.substr(0, bytes.size() - 37);
  try {
    read_vector_table(write("trunc.embs", truncated));
    c.check(false, "truncated file rejected");
  } catch (const Error& e) {
    c.check(e.kind() == ErrorKind::Corruption, "truncation -> corruption error");
    c.check(e.offset().has_value() && *e.offset() <= truncated.size(), "corruption error carries byte offset");
  }
  const std::string header_only = bytes.substr(0, 10);
  c.check(kind_of([&] { read_vector_table(write("short.embs", header_only)); }) == ErrorKind::Corruption,
          "truncated header -> corruption error");
}

void geometry_oracles(Checker& c) {
  Rng rng(99);
  const std::size_t dim = 48;
  EmbeddingStore store(dim);
  Corpus corpus;
  std::size_t labelled = 0;
  for (int i = 0; i < 200; ++i) {
    const auto id = "rec" + std::to_string(i);
    std::vector<std::string> subjects;
    const std::size_t k = 1 + rng.below(4);
    while (subjects.size() < k) {
      auto s = "subject-" + std::to_string(rng.below(10));
      if (std::find(subjects.begin(), subjects.end(), s) == subjects.end()) subjects.push_back(s);
    }
    corpus.add(valid_record(id, subjects));
    store.add(id, random_unit(rng, dim));
    ++labelled;
  }
  const auto got = subject_centers(store, corpus);
  const auto want = oracle::naive_centers(store, corpus);
  c.check(got.subjects.size() == want.size() && want.size() == 10, "10 subjects");
  double worst = 0;
  double weight_sum = 0;
  std::size_t member_sum = 0;
  for (const auto& [label, o] : want) {
    auto it = got.subjects.find(label);
    if (it == got.subjects.end()) {
      c.check(false, "subject " + label + " present");
      continue;
    }
    for (std::size_t k = 0; k < dim; ++k) worst = std::max(worst, std::abs(it->second.center[k] - o.sum[k]));
    c.check(std::abs(it->second.total_weight - o.weight) <= 1e-12, "weight of " + label);
    c.check(it->second.member_count == o.members, "members of " + label);
    weight_sum += it->second.total_weight;
    member_sum += it->second.member_count;
  }
  c.check(worst <= 1e-6, "centers within 1e-6 of the naive loop");
  // Each record gives 1/k to each of its k subjects: k * (1/k) is exactly 1 for k <= 4.
  for (const auto& r : corpus) {
    const auto k = effective_subjects(r).size();
    c.check(double(k) * (1.0 / double(k)) == 1.0, "record weight sum is 1");
  }
  c.check(std::abs(weight_sum - double(labelled)) <= 1e-9, "total weight equals record count");
  c.note("max |center - oracle| = " + fmt("%.3g", worst) + ", total weight " + fmt("%.6f", weight_sum) + " over " +
         std::to_string(member_sum) + " memberships");
}

void graph_oracle(Checker& c) {
  Rng rng(5150);
  std::size_t unreachable_seen = 0, pairs_checked = 0;
  for (int g = 0; g < 50; ++g) {
    const std::size_t n = 2 + rng.below(49);
    const std::size_t m = rng.below(2 * n + 1);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> edges64;
    for (std::size_t i = 0; i < m; ++i) {
      edges.emplace_back(rng.below(n), rng.below(n));
      edges64.emplace_back(edges.back().first, edges.back().second);
    }
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("g" + std::to_string(g) + "n" + std::to_string(i));
    const auto graph = CitationGraph::from_edges(ids, edges64);

    // Every ordered pair of distinct nodes, through the grouped-BFS path.
    PairSample all;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b) all.pairs.emplace_back(ids[a], ids[b]);
    for (auto mode : {PathMode::Undirected, PathMode::Directed}) {
      const auto fw = oracle::floyd_warshall(n, edges, mode == PathMode::Undirected);
      const auto result = pairwise_graph_distances(graph, all, mode, 1 + g % 3);
      std::size_t idx = 0, mismatches = 0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          if (a == b) continue;
          const auto& got = result.distances[idx++];
          const bool unreachable = fw[a][b] == oracle::kInf;
          unreachable_seen += unreachable;
          if (unreachable ? got.has_value() : got != fw[a][b]) ++mismatches;
        }
      pairs_checked += all.count();
      c.check(mismatches == 0, "graph " + std::to_string(g) + " mode " + std::string(to_string(mode)));
      c.check(result.reachable_count + result.unreachable_count == all.count(), "reachable + unreachable = n");
    }
  }
  c.check(unreachable_seen > 0, "fixtures include unreachable pairs");
  c.note(std::to_string(pairs_checked) + " pairs checked, " + std::to_string(unreachable_seen) + " unreachable");
}

void pearson_cases(Checker& c) {
  const std::vector<double> xs{1, 2, 3, 4}, ys{1, 3, 2, 4};
  std::vector<double> twice, neg;
  for (double x : xs) {
    twice.push_back(2 * x);
    neg.push_back(-x + 7);
  }
  c.check(std::abs(pearson(xs, twice) - 1.0) <= 1e-9, "ys = 2 xs -> 1");
  c.check(std::abs(pearson(xs, neg) + 1.0) <= 1e-9, "ys = -xs + 7 -> -1");
  c.check(std::abs(pearson(xs, ys) - 0.8) <= 1e-9, "[1,2,3,4] vs [1,3,2,4] -> 0.8");

  Rng rng(606);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(500);
    std::vector<double> x(n), y(n);
    const double rho = rng.uniform() * 2 - 1;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal() * 10 + 3;
      y[i] = rho * x[i] + rng.normal() * 5;
    }
    if (n == 2) y[1] = y[0] + 1;  // keep variance nonzero
    const double r = pearson(x, y);
    const double a = std::exp(rng.normal() * 2), b = rng.normal() * 1e3;
    const double a2 = std::exp(rng.normal() * 2), b2 = rng.normal() * 1e3;
    std::vector<double> ax(n), ay(n), nx(n);
    for (std::size_t i = 0; i < n; ++i) {
      ax[i] = a * x[i] + b;
      ay[i] = a2 * y[i] + b2;
      nx[i] = -a * x[i] + b;
    }
    const double e1 = std::abs(pearson(ax, ay) - r);
    const double e2 = std::abs(pearson(nx, y) + r);
    worst = std::max({worst, e1, e2});
    c.check(e1 <= 1e-9 && e2 <= 1e-9, "affine case " + std::to_string(t));
  }
  c.note("max affine deviation " + fmt("%.3g", worst));
}

void pca_cases(Checker& c) {
  {
    std::vector<double> line;
    for (int i = 0; i < 20; ++i) {
      const double t = 0.37 * i - 2.1;
      line.insert(line.end(), {3 * t + 1, -t, 0.25 * t - 4});
    }
    const auto m = pca_fit(line, 3, 3);
    c.check(std::abs(m.explained_variance_ratios[0] - 1.0) <= 1e-9 && std::abs(m.explained_variance_ratios[1]) <= 1e-9 &&
                std::abs(m.explained_variance_ratios[2]) <= 1e-9,
            "rank-1 ratios [1, 0, 0]");
  }
  {
    const std::vector<std::pair<double, double>> pts{{0.5, 1.0}, {1.5, 2.5}, {2.0, 1.5}, {3.5, 4.0}, {-1.0, 0.0}, {4.0, 2.0}};
    std::vector<double> flat;
    for (auto [x, y] : pts) flat.insert(flat.end(), {x, y});
    const auto m = pca_fit(flat, 2, 1);
    const auto [a, b, d] = oracle::cov2(pts);
    const auto [l1, l2] = oracle::eig2x2(a, b, d);
    c.check(std::abs(m.eigenvalues[0] - l1) <= 1e-9, "2x2 leading eigenvalue matches closed form");
    c.check(std::abs(m.total_variance - (l1 + l2)) <= 1e-9, "2x2 trace matches closed form");
    c.check(std::abs(m.explained_variance_ratios[0] - l1 / (l1 + l2)) <= 1e-9, "2x2 ratio matches closed form");
  }
  {
    // n = 2000, dim = 256 with a decaying spectrum.
    Rng rng(7);
    const std::size_t n = 2000, dim = 256;
    std::vector<double> data(n * dim);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < dim; ++k) data[i * dim + k] = rng.normal() / std::sqrt(1.0 + k);
    const auto start = std::chrono::steady_clock::now();
    const auto m = pca_fit(data, dim, dim);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double worst = 0;
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = i; j < dim; ++j) {
        double dot = 0;
        for (std::size_t k = 0; k < dim; ++k) dot += m.components[i][k] * m.components[j][k];
        worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
    c.check(worst <= 1e-6, "components orthonormal within 1e-6");
    bool sorted = true, nonneg = true;
    for (std::size_t i = 0; i < dim; ++i) {
      nonneg = nonneg && m.explained_variance_ratios[i] >= 0;
      if (i) sorted = sorted && m.explained_variance_ratios[i] <= m.explained_variance_ratios[i - 1];
    }
    c.check(sorted && nonneg, "ratios nonnegative and nonincreasing");
    const auto curve = explained_variance_curve(data, dim, dim);
    bool monotone = true;
    for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i] >= curve[i - 1];
    c.check(monotone, "cumulative curve nondecreasing");
    c.check(std::abs(curve.back() - 1.0) <= 1e-6, "curve ends at 1 at data rank");
    c.note("fit n=2000 dim=256 in " + fmt("%.2f", secs) + " s, orthonormality error " + fmt("%.2g", worst));
  }
}

void kde_hdr(Checker& c) {
  Rng rng(8080);
  std::vector<Point2> pts(2000);
  for (auto& p : pts) p = {rng.normal(), rng.normal()};
  const auto out = kde_hdr_contours(pts);
  if (!out.result) {
    c.check(false, "kde produced contours: " + out.notice);
    return;
  }
  const auto& levels = out.result->levels;
  c.check(levels.size() == 3, "three levels");
  std::string masses;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    // Independent even-odd ray cast over the emitted rings.
    std::size_t in = 0;
    for (const auto& p : pts) {
      bool inside = false;
      for (const auto& ring : levels[l].rings)
        for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++)
          if ((ring[i].y > p.y) != (ring[j].y > p.y) &&
              p.x < (ring[j].x - ring[i].x) * (p.y - ring[i].y) / (ring[j].y - ring[i].y) + ring[i].x)
            inside = !inside;
      in += inside;
    }
    const double frac = double(in) / double(pts.size());
    masses += (l ? ", " : "") + fmt("%.4f", frac);
    c.check(std::abs(frac - levels[l].mass) <= 0.03, "mass of level " + fmt("%.2f", levels[l].mass));
    if (l) {
      c.check(levels[l - 1].area <= levels[l].area, "areas nested");
      c.check(levels[l - 1].threshold >= levels[l].threshold, "thresholds nested");
    }
  }
  // Nesting as regions: every vertex of a tighter level lies inside the looser one.
  for (std::size_t l = 1; l < levels.size(); ++l) {
    bool nested = true;
    for (const auto& ring : levels[l - 1].rings)
      for (std::size_t i = 0; i < ring.size(); i += 7) nested = nested && point_in_region(levels[l].rings, ring[i]);
    c.check(nested, "region " + std::to_string(l - 1) + " inside region " + std::to_string(l));
  }
  c.note("empirical masses " + masses);
}

pipeline::RunConfig synthetic_config(const std::string& out_dir, std::size_t threads = 1) {
  pipeline::Settings s;
  s.set("out_dir", out_dir);
  s.set("seed", "7");
  s.set("threads", std::to_string(threads));
  s.set("synth.topics", "5");
  s.set("synth.records_per_topic", "400");
  s.set("synth.dim", "128");
  s.set("synth.sigma", "0.1");
  s.set("synth.tau", "0.2");
  s.set("synth.mean_out_degree", "8");
  s.set("synth.seed", "7");
  s.set("embed.provider", "planted");
  s.set("pairs.n", "20000");
  s.set("pairs.seed", "7");
  return pipeline::resolve(s);
}

void run_chain(pipeline::RunConfig cfg) {
  for (const auto* cmd : {"synth", "ingest", "embed", "centers", "graph build", "graph dist", "correlate", "pca", "map"})
    pipeline::run_command(cmd, cfg);
  cfg.classify_id = "R00000";
  pipeline::run_command("classify", cfg);
}

void synthetic_end_to_end(Checker& c) {
  TempDir dir;
  const auto cfg = synthetic_config(dir.path().string());
  run_chain(cfg);
  const auto report = Json::parse(slurp(dir.file("correlation.json")));
  const double pcc = report["pcc"].get<double>();
  const auto used = report["pair_count_used"].get<std::size_t>();
  const auto excluded = report["pair_count_excluded"].get<std::size_t>();
  c.check(pcc > 0.3, "PCC > 0.3");
  c.check(used + excluded == 20000, "used + excluded = sample size");
  c.check(report["scatter"].size() == used, "scatter holds exactly the used pairs");

  // Reachability from an independent union-find over the saved graph.
  const auto graph = load_graph(dir.file("graph.cgr"));
  std::vector<std::size_t> parent(graph.node_count());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (std::size_t u = 0; u < graph.node_count(); ++u)
    for (auto v : graph.out_neighbors(u)) parent[find(u)] = find(v);
  const auto sample = sample_pairs(graph.ids(), cfg.pairs_n, cfg.pairs_seed);
  std::size_t disconnected = 0;
  for (const auto& [a, b] : sample.pairs) disconnected += find(*graph.index_of(a)) != find(*graph.index_of(b));
  c.check(excluded == disconnected, "excluded pairs are exactly the disconnected ones");
  c.note("PCC " + fmt("%.4f", pcc) + ", used " + std::to_string(used) + ", excluded " + std::to_string(excluded) +
         ", edges " + std::to_string(graph.edge_count()));
}

std::map<std::string, std::uint64_t> artifact_hashes(const fs::path& dir) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.ends_with(".manifest.json")) continue;  // carries wall time
    out[name] = fnv1a64(slurp(entry.path()));
  }
  return out;
}

void determinism(Checker& c) {
  TempDir a, b, threaded;
  run_chain(synthetic_config(a.path().string()));
  run_chain(synthetic_config(b.path().string()));
  run_chain(synthetic_config(threaded.path().string(), 4));
  const auto ha = artifact_hashes(a.path()), hb = artifact_hashes(b.path()), ht = artifact_hashes(threaded.path());
  c.check(ha.size() >= 20, "pipeline produced its artifacts");
  c.check(ha == hb, "two identical runs are byte-identical");
  c.check(ha == ht, "a 4-thread run matches the 1-thread run");
  for (const auto& [name, h] : ha) {
    auto it = hb.find(name);
    c.check(it != hb.end() && it->second == h, "artifact " + name);
  }
  c.note(std::to_string(ha.size()) + " artifacts compared");
}

void soft_classifier(Checker& c) {
  Rng rng(1111);
  const std::size_t dim = 32;
  {
    // Query on the bisector of two orthogonal centers.
    SubjectCenters two;
    two.dim = dim;
    std::vector<double> e1(dim, 0.0), e2(dim, 0.0);
    e1[0] = 3.0;
    e2[1] = 0.5;
    two.subjects["A"] = {e1, 1.0, 1};
    two.subjects["B"] = {e2, 1.0, 1};
    std::vector<float> q(dim, 0.0f);
    q[0] = q[1] = static_cast<float>(M_SQRT1_2);
    q[2] = 0.0f;
    for (double t : {0.01, 0.05, 0.1, 1.0}) {
      const auto label = classify_soft(q, two, t);
      c.check(std::abs(label.probabilities[0].second - 0.5) <= 1e-9 &&
                  std::abs(label.probabilities[1].second - 0.5) <= 1e-9,
              "equidistant centers give 0.5/0.5 at T=" + fmt("%g", t));
    }
  }
  SubjectCenters centers;
  centers.dim = dim;
  for (int s = 0; s < 12; ++s) {
    auto v = random_unit(rng, dim);
    centers.subjects["S" + std::to_string(s)] = {std::vector<double>(v.begin(), v.end()), 1.0, 1};
  }
  double worst = 0;
  std::size_t argmax_changes = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto q = random_unit(rng, dim);
    std::string first;
    for (double t : {0.01, 0.1, 1.0}) {
      const auto label = classify_soft(q, centers, t);
      double sum = 0;
      for (const auto& [name, p] : label.probabilities) sum += p;
      worst = std::max(worst, std::abs(sum - 1.0));
      if (first.empty())
        first = label.argmax;
      else if (label.argmax != first)
        ++argmax_changes;
    }
  }
  c.check(worst <= 1e-9, "probabilities sum to 1 within 1e-9");
  c.check(argmax_changes == 0, "argmax invariant across temperatures");
  c.note("max |sum - 1| = " + fmt("%.2g", worst));
}

struct Criterion {
  int number;
  const char* name;
  double limit_seconds;
  void (*run)(Checker&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "preprocessing rules", 1, preprocessing_rules},
      {2, "sampling", 5, sampling},
      {3, "vector store", 5, vector_store},
      {4, "geometry oracles", 5, geometry_oracles},
      {5, "graph oracle", 30, graph_oracle},
      {6, "pearson", 5, pearson_cases},
      {7, "pca", 10, pca_cases},
      {8, "kde hdr", 10, kde_hdr},
      {9, "synthetic end-to-end", 120, synthetic_end_to_end},
      {10, "determinism", 300, determinism},
      {11, "soft classifier", 10, soft_classifier},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.check(false, std::string("unexpected exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.check(secs < cr.limit_seconds, "runtime under " + fmt("%g", cr.limit_seconds) + " s");
    std::ostringstream line;
    line << (c.ok() ? "PASS" : "FAIL") << " AC" << cr.number << " " << cr.name << " (" << fmt("%.2f", secs) << " s, "
         << c.total() << " checks)";
    for (const auto& n : c.notes()) line << "; " << n;
    std::printf("%s\n", line.str().c_str());
    for (std::size_t i = 0; i < std::min<std::size_t>(c.failures().size(), 5); ++i)
      std::printf("    failed: %s\n", c.failures()[i].c_str());
    if (c.failures().size() > 5) std::printf("    ... %zu more\n", c.failures().size() - 5);
    failed += !c.ok();
  }
  std::printf("%d/%zu criteria passed\n", int(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
