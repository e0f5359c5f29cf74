#include "scimap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "binary_io.hpp"
#include "scimap/error.hpp"

namespace scimap {

namespace {

template <typename A, typename B>
double cosine_impl(std::span<const A> u, std::span<const B> v) {
  if (u.size() != v.size())
    throw Error(ErrorKind::DimensionMismatch,
                "cosine of vectors with dims " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = static_cast<double>(u[i]);
    const double b = static_cast<double>(v[i]);
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
}

}  // namespace

double cosine_similarity(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }
double cosine_similarity(std::span<const float> u, std::span<const double> v) { return cosine_impl(u, v); }

std::vector<double> SubjectCenter::unit() const {
  double norm2 = 0.0;
  for (double x : center) norm2 += x * x;
  const double norm = std::sqrt(norm2);
  std::vector<double> out(center);
  if (norm > 0.0)
    for (auto& x : out) x /= norm;
  return out;
}

std::vector<std::string> effective_subjects(const Record& record, const CenterOptions& options) {
  std::vector<std::string> out;
  for (const auto& s : record.subjects) {
    if (std::find(options.excluded_subjects.begin(), options.excluded_subjects.end(), s) !=
        options.excluded_subjects.end())
      continue;
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

SubjectCenters subject_centers(const EmbeddingStore& store, const Corpus& corpus, const CenterOptions& options) {
  SubjectCenters result;
  result.dim = store.dim();
  std::set<std::string> seen;
  for (const auto& record : corpus) {
    const auto subjects = effective_subjects(record, options);
    if (subjects.empty()) continue;
    seen.insert(subjects.begin(), subjects.end());
    const auto pos = store.position(record.id);
    if (!pos) {
      ++result.records_without_vector;
      continue;
    }
    const auto v = store.vector(*pos);
    const double w = 1.0 / static_cast<double>(subjects.size());
    for (const auto& s : subjects) {
      auto& c = result.subjects[s];
      if (c.center.empty()) c.center.assign(store.dim(), 0.0);
      for (std::size_t k = 0; k < v.size(); ++k) c.center[k] += w * static_cast<double>(v[k]);
      c.total_weight += w;
      ++c.member_count;
    }
  }
  for (auto& [name, c] : result.subjects)
    for (auto& x : c.center) x /= c.total_weight;
  result.omitted_subjects = seen.size() - result.subjects.size();
  return result;
}

void save_centers(const SubjectCenters& centers, const std::string& path) {
  VectorTable table;
  table.dim = static_cast<std::uint32_t>(centers.dim);
  nlohmann::ordered_json subjects = nlohmann::ordered_json::array();
  for (const auto& [name, c] : centers.subjects) {
    table.ids.push_back(name);
    for (double x : c.center) table.data.push_back(static_cast<float>(x));
    subjects.push_back({{"subject", name}, {"total_weight", c.total_weight}, {"member_count", c.member_count}});
  }
  write_vector_table(table, path);
  nlohmann::ordered_json meta = {{"format", "EMBS"},
                                 {"kind", "subject-centers"},
                                 {"dim", centers.dim},
                                 {"records_without_vector", centers.records_without_vector},
                                 {"omitted_subjects", centers.omitted_subjects},
                                 {"subjects", subjects}};
  detail::write_file(path + ".meta.json", meta.dump(2) + "\n");
}

SubjectCenters load_centers(const std::string& path) {
  const VectorTable table = read_vector_table(path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(detail::read_file(path + ".meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, "malformed centers sidecar " + path + ".meta.json: " + e.what());
  }
  std::map<std::string, std::pair<double, std::size_t>> weights;
  try {
    for (const auto& s : meta.at("subjects"))
      weights[s.at("subject").get<std::string>()] = {s.at("total_weight").get<double>(),
                                                     s.at("member_count").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, "centers sidecar lacks subject weights: " + std::string(e.what()));
  }
  SubjectCenters centers;
  centers.dim = table.dim;
  centers.records_without_vector = meta.value("records_without_vector", std::size_t{0});
  centers.omitted_subjects = meta.value("omitted_subjects", std::size_t{0});
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    auto it = weights.find(table.ids[i]);
    if (it == weights.end()) throw Error(ErrorKind::Format, "centers sidecar has no entry for " + table.ids[i]);
    SubjectCenter c;
    c.center.assign(table.data.begin() + static_cast<std::ptrdiff_t>(i * table.dim),
                    table.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * table.dim));
    c.total_weight = it->second.first;
    c.member_count = it->second.second;
    centers.subjects.emplace(table.ids[i], std::move(c));
  }
  return centers;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<SubjectSpread> subject_spread(const SubjectCenters& centers, const EmbeddingStore& store,
                                          const Corpus& corpus, double outlier_quantile,
                                          const CenterOptions& options) {
  std::map<std::string, std::vector<std::pair<std::string, double>>> members;
  std::map<std::string, std::vector<double>> units;
  for (const auto& [name, c] : centers.subjects) units.emplace(name, c.unit());

  for (const auto& record : corpus) {
    const auto pos = store.position(record.id);
    if (!pos) continue;
    for (const auto& s : effective_subjects(record, options)) {
      auto it = units.find(s);
      if (it == units.end()) continue;
      members[s].emplace_back(record.id, cosine_distance(store.vector(*pos), std::span<const double>(it->second)));
    }
  }

  std::vector<SubjectSpread> out;
  for (const auto& [name, list] : members) {
    std::vector<double> d;
    d.reserve(list.size());
    double sum = 0.0;
    for (const auto& [id, dist] : list) {
      d.push_back(dist);
      sum += dist;
    }
    std::sort(d.begin(), d.end());
    SubjectSpread s;
    s.subject = name;
    s.mean_center_distance = sum / static_cast<double>(d.size());
    s.q25 = quantile_sorted(d, 0.25);
    s.q50 = quantile_sorted(d, 0.50);
    s.q75 = quantile_sorted(d, 0.75);
    s.q95 = quantile_sorted(d, 0.95);
    const double threshold = quantile_sorted(d, outlier_quantile);
    for (const auto& [id, dist] : list)
      if (dist > threshold) s.outlier_ids.push_back(id);
    out.push_back(std::move(s));
  }
  return out;
}

DistanceMatrix center_pairwise_distances(const SubjectCenters& centers) {
  DistanceMatrix m;
  std::vector<std::vector<double>> units;
  for (const auto& [name, c] : centers.subjects) {
    m.labels.push_back(name);
    units.push_back(c.unit());
  }
  const std::size_t k = units.size();
  m.values.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < units[i].size(); ++t) dot += units[i][t] * units[j][t];
      const double d = 1.0 - std::clamp(dot, -1.0, 1.0);
      m.values[i * k + j] = d;
      m.values[j * k + i] = d;
    }
  }
  return m;
}

SoftLabel classify_soft(std::span<const float> v, const SubjectCenters& centers, double temperature) {
  if (centers.subjects.empty()) throw Error(ErrorKind::Validation, "classify_soft: no subject centers");
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw Error(ErrorKind::Config, "classify_soft: temperature must be positive");
  if (v.size() != centers.dim)
    throw Error(ErrorKind::DimensionMismatch, "classify_soft: vector dim " + std::to_string(v.size()) +
                                                  " does not match centers dim " + std::to_string(centers.dim));

  SoftLabel label;
  label.temperature = temperature;
  std::vector<double> dist;
  dist.reserve(centers.subjects.size());
  for (const auto& [name, c] : centers.subjects) {
    const auto u = c.unit();
    dist.push_back(cosine_distance(v, std::span<const double>(u)));
    label.probabilities.emplace_back(name, 0.0);
  }
  // Softmax of -d/T, shifted by the smallest distance.
  const double dmin = *std::min_element(dist.begin(), dist.end());
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    label.probabilities[i].second = std::exp(-(dist[i] - dmin) / temperature);
    total += label.probabilities[i].second;
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    label.probabilities[i].second /= total;
    if (dist[i] < dist[best]) best = i;
  }
  label.argmax = label.probabilities[best].first;
  return label;
}

}  // namespace scimap
