#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "scimap/error.hpp"
#include "scimap/geometry.hpp"
#include "scimap/rng.hpp"

using namespace scimap;
using scimap::testing::TempDir;
using scimap::testing::valid_record;

namespace {

std::vector<float> unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.normal();
  return normalize_to_unit(std::span<const double>(v));
}

std::vector<float> axis(std::size_t dim, std::size_t k, float sign = 1.0f) {
  std::vector<float> v(dim, 0.0f);
  v[k] = sign;
  return v;
}

SubjectCenters centers_from(std::vector<std::pair<std::string, std::vector<double>>> list) {
  SubjectCenters c;
  c.dim = list.front().second.size();
  for (auto& [name, v] : list) c.subjects[name] = SubjectCenter{v, 1.0, 1};
  return c;
}

}  // namespace

TEST_CASE("cosine basics") {
  auto e1 = axis(3, 0), e2 = axis(3, 1), m1 = axis(3, 0, -1);
  CHECK(cosine_similarity(e1, e1) == doctest::Approx(1.0));
  CHECK(cosine_distance(e1, e1) == doctest::Approx(0.0));
  CHECK(cosine_distance(e1, e2) == doctest::Approx(1.0));
  CHECK(cosine_distance(e1, m1) == doctest::Approx(2.0));
  const float short_v[] = {1, 0};
  try {
    cosine_similarity(e1, short_v);
    FAIL("dim mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("cosine distance equals half squared chord on unit vectors") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    auto u = unit(rng, 20), v = unit(rng, 20);
    double sq = 0;
    for (int i = 0; i < 20; ++i) sq += double(u[i] - v[i]) * (u[i] - v[i]);
    CHECK(cosine_distance(u, v) == doctest::Approx(sq / 2).epsilon(1e-6));
    CHECK(cosine_distance(u, v) == doctest::Approx(cosine_distance(v, u)));
  }
}

TEST_CASE("subject centers formula examples") {
  EmbeddingStore store(2);
  store.add("r1", axis(2, 0));
  store.add("r2", axis(2, 1));
  Corpus c;
  c.add(valid_record("r1", {"A"}));
  c.add(valid_record("r2", {"A", "B"}));
  auto centers = subject_centers(store, c);
  REQUIRE(centers.subjects.size() == 2);
  const auto& a = centers.subjects.at("A");
  CHECK(a.center[0] == doctest::Approx(1.0 / 1.5));
  CHECK(a.center[1] == doctest::Approx(0.5 / 1.5));
  CHECK(a.total_weight == doctest::Approx(1.5));
  CHECK(a.member_count == 2);
  CHECK(centers.subjects.at("B").center == std::vector<double>{0.0, 1.0});

  Corpus single;
  single.add(valid_record("r1", {"Only"}));
  auto one = subject_centers(store, single);
  CHECK(one.subjects.at("Only").center == std::vector<double>{1.0, 0.0});
}

TEST_CASE("subject centers match the naive oracle and are permutation invariant") {
  Rng rng(8);
  const std::size_t dim = 24;
  EmbeddingStore store(dim);
  Corpus corpus;
  for (int i = 0; i < 120; ++i) {
    const auto id = "r" + std::to_string(i);
    std::vector<std::string> subjects;
    const auto k = rng.below(4);  // may be zero
    for (std::size_t j = 0; j < k; ++j) {
      auto s = "S" + std::to_string(rng.below(7));
      if (std::find(subjects.begin(), subjects.end(), s) == subjects.end()) subjects.push_back(s);
    }
    corpus.add(valid_record(id, subjects));
    if (i % 13 != 0) store.add(id, unit(rng, dim));
  }
  auto got = subject_centers(store, corpus);
  auto want = oracle::naive_centers(store, corpus);
  REQUIRE(got.subjects.size() == want.size());
  for (const auto& [label, c] : want) {
    const auto& g = got.subjects.at(label);
    CHECK(g.member_count == c.members);
    CHECK(g.total_weight == doctest::Approx(c.weight).epsilon(1e-12));
    for (std::size_t k = 0; k < dim; ++k) CHECK(std::abs(g.center[k] - c.sum[k]) < 1e-9);
  }

  Corpus reversed;
  for (auto it = corpus.records().rbegin(); it != corpus.records().rend(); ++it) reversed.add(*it);
  auto again = subject_centers(store, reversed);
  for (const auto& [label, c] : got.subjects)
    for (std::size_t k = 0; k < dim; ++k) CHECK(std::abs(again.subjects.at(label).center[k] - c.center[k]) < 1e-12);
}

TEST_CASE("excluded subjects and missing vectors") {
  EmbeddingStore store(2);
  store.add("r1", axis(2, 0));
  Corpus c;
  c.add(valid_record("r1", {"A", "multidisciplinary"}));
  c.add(valid_record("r2", {"Lonely"}));
  CenterOptions opts{{"multidisciplinary"}};
  auto centers = subject_centers(store, c, opts);
  CHECK(centers.subjects.count("multidisciplinary") == 0);
  CHECK(centers.subjects.at("A").total_weight == doctest::Approx(1.0));
  CHECK(centers.subjects.count("Lonely") == 0);
  CHECK(centers.omitted_subjects == 1);
  CHECK(centers.records_without_vector == 1);
}

TEST_CASE("centers save/load") {
  TempDir dir;
  auto centers = centers_from({{"A", {0.5, 0.25, 0.0}}, {"B", {0.0, 1.0, 2.0}}});
  centers.subjects["A"].total_weight = 2.5;
  centers.subjects["A"].member_count = 4;
  save_centers(centers, dir.file("c.embs"));
  auto back = load_centers(dir.file("c.embs"));
  CHECK(back.dim == 3);
  CHECK(back.subjects.at("A").total_weight == 2.5);
  CHECK(back.subjects.at("A").member_count == 4);
  CHECK(back.subjects.at("B").center == std::vector<double>{0.0, 1.0, 2.0});
}

TEST_CASE("quantile_sorted") {
  const double xs[] = {1, 2, 3, 4};
  CHECK(quantile_sorted(xs, 0.0) == 1);
  CHECK(quantile_sorted(xs, 1.0) == 4);
  CHECK(quantile_sorted(xs, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_sorted(xs, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("subject spread") {
  SUBCASE("identical members") {
    EmbeddingStore store(3);
    Corpus c;
    for (int i = 0; i < 5; ++i) {
      store.add("r" + std::to_string(i), axis(3, 2));
      c.add(valid_record("r" + std::to_string(i), {"A"}));
    }
    auto spread = subject_spread(subject_centers(store, c), store, c);
    REQUIRE(spread.size() == 1);
    CHECK(spread[0].q95 == doctest::Approx(0.0));
    CHECK(spread[0].outlier_ids.empty());
  }
  SUBCASE("twenty members give one outlier") {
    Rng rng(21);
    EmbeddingStore store(16);
    Corpus c;
    for (int i = 0; i < 20; ++i) {
      store.add("r" + std::to_string(i), unit(rng, 16));
      c.add(valid_record("r" + std::to_string(i), {"A"}));
    }
    auto spread = subject_spread(subject_centers(store, c), store, c, 0.95);
    REQUIRE(spread.size() == 1);
    CHECK(spread[0].outlier_ids.size() == 1);
    CHECK(spread[0].q25 <= spread[0].q50);
    CHECK(spread[0].q50 <= spread[0].q75);
    CHECK(spread[0].q75 <= spread[0].q95);
  }
  SUBCASE("tight topics sit closer to their center than to the other topic") {
    SynthConfig sc;
    sc.topic_count = 2;
    sc.records_per_topic = 100;
    sc.noise_sigma = 0.05;
    sc.dim = 32;
    auto synth = synth_corpus(sc);
    auto store = planted_embed(synth);
    auto centers = subject_centers(store, synth.corpus);
    auto spread = subject_spread(centers, store, synth.corpus);
    auto between = center_pairwise_distances(centers)(0, 1);
    for (const auto& s : spread) CHECK(s.mean_center_distance < between);
  }
}

TEST_CASE("center pairwise distances") {
  auto c = centers_from({{"A", {2, 0, 0}}, {"B", {0, 3, 0}}, {"C", {1, 0, 0}}});
  auto m = center_pairwise_distances(c);
  CHECK(m.labels == std::vector<std::string>{"A", "B", "C"});
  CHECK(m(0, 1) == doctest::Approx(1.0));
  CHECK(m(0, 2) == doctest::Approx(0.0));

  SynthConfig sc;
  sc.topic_count = 5;
  sc.records_per_topic = 30;
  sc.dim = 16;
  sc.noise_sigma = 0.3;
  auto synth = synth_corpus(sc);
  auto centers = subject_centers(planted_embed(synth), synth.corpus);
  auto d = center_pairwise_distances(centers);
  REQUIRE(d.labels.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(d(i, i) == 0.0);
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(d(i, j) == d(j, i));
      const auto& a = centers.subjects.at(d.labels[i]).center;
      const auto& b = centers.subjects.at(d.labels[j]).center;
      if (i != j) CHECK(d(i, j) == doctest::Approx(1.0 - oracle::cosine(a, b)).epsilon(1e-9));
    }
  }
}

TEST_CASE("soft classification") {
  auto c = centers_from({{"A", {1, 0, 0}}, {"B", {0, 1, 0}}, {"C", {0, 0, 1}}});

  SUBCASE("dominant subject") {
    for (double t : {0.001, 0.05, 1.0, 100.0}) {
      auto label = classify_soft(axis(3, 0), c, t);
      CHECK(label.argmax == "A");
      CHECK(label.probabilities[0].second > label.probabilities[1].second);
    }
  }
  SUBCASE("equidistant symmetry") {
    const float v[] = {static_cast<float>(M_SQRT1_2), static_cast<float>(M_SQRT1_2), 0};
    auto two = centers_from({{"A", {1, 0, 0}}, {"B", {0, 1, 0}}});
    auto label = classify_soft(v, two, 0.05);
    CHECK(std::abs(label.probabilities[0].second - 0.5) < 1e-9);
    CHECK(std::abs(label.probabilities[1].second - 0.5) < 1e-9);
  }
  SUBCASE("matches a direct softmax") {
    Rng rng(12);
    for (int t = 0; t < 50; ++t) {
      auto v = unit(rng, 3);
      auto label = classify_soft(v, c, 0.1);
      std::vector<double> d;
      for (const auto& [name, sc] : c.subjects) d.push_back(cosine_distance(v, std::span<const double>(sc.center)));
      auto expect = oracle::softmax_of_distances(d, 0.1);
      for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(label.probabilities[i].second - expect[i]) < 1e-12);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(classify_soft(axis(3, 0), SubjectCenters{}, 0.1), Error);
    CHECK_THROWS_AS(classify_soft(axis(3, 0), c, 0.0), Error);
    CHECK_THROWS_AS(classify_soft(axis(4, 0), c, 0.1), Error);
  }
}
