#include "scimap/serialize.hpp"

#include <charconv>

namespace scimap {

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

Json to_json(const PreprocessReport& r) {
  Json reasons = Json::object();
  for (const auto& [k, v] : r.removal_reasons) reasons[k] = v;
  return Json{{"input_count", r.input_count},
              {"removed_count", r.removed_count},
              {"kept_count", r.kept_count},
              {"removal_reasons", reasons}};
}

Json to_json(const SubjectCenters& c) {
  Json subjects = Json::array();
  for (const auto& [name, s] : c.subjects)
    subjects.push_back({{"subject", name}, {"total_weight", s.total_weight}, {"member_count", s.member_count}});
  return Json{{"dim", c.dim},
              {"subject_count", c.subjects.size()},
              {"records_without_vector", c.records_without_vector},
              {"omitted_subjects", c.omitted_subjects},
              {"subjects", subjects}};
}

Json to_json(const std::vector<SubjectSpread>& spreads) {
  Json out = Json::array();
  for (const auto& s : spreads)
    out.push_back({{"subject", s.subject},
                   {"mean_center_distance", s.mean_center_distance},
                   {"q25", s.q25},
                   {"q50", s.q50},
                   {"q75", s.q75},
                   {"q95", s.q95},
                   {"outlier_ids", s.outlier_ids}});
  return out;
}

Json to_json(const DistanceMatrix& m) {
  Json rows = Json::array();
  const auto k = m.labels.size();
  for (std::size_t i = 0; i < k; ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < k; ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return Json{{"labels", m.labels}, {"distances", rows}};
}

Json to_json(const SoftLabel& l) {
  Json probs = Json::object();
  for (const auto& [s, p] : l.probabilities) probs[s] = p;
  return Json{{"argmax", l.argmax}, {"temperature", l.temperature}, {"probabilities", probs}};
}

Json to_json(const PairSample& sample, const GraphDistanceResult& r) {
  Json hist = Json::object();
  for (const auto& [h, c] : r.histogram) hist[std::to_string(h)] = c;
  Json pairs = Json::array();
  for (std::size_t k = 0; k < sample.count(); ++k) {
    const auto& d = r.distances[k];
    pairs.push_back({sample.pairs[k].first, sample.pairs[k].second, d ? Json(*d) : Json(nullptr)});
  }
  return Json{{"seed", sample.seed},
              {"pair_count", sample.count()},
              {"reachable_count", r.reachable_count},
              {"unreachable_count", r.unreachable_count},
              {"histogram", hist},
              {"pairs", pairs}};
}

Json to_json(const CorrelationReport& r) {
  Json scatter = Json::array();
  for (const auto& p : r.scatter) scatter.push_back({p.embedding_distance, p.hop_distance});
  return Json{{"pcc", r.pcc},
              {"pair_count_used", r.pair_count_used},
              {"pair_count_excluded", r.pair_count_excluded},
              {"model", r.model},
              {"path_mode", to_string(r.mode)},
              {"scatter", scatter}};
}

Json to_json(const std::vector<RankedPair>& pairs) {
  Json out = Json::array();
  for (const auto& p : pairs)
    out.push_back({{"a", p.a},
                   {"b", p.b},
                   {"cosine_distance", p.cosine_distance},
                   {"hops", p.hops ? Json(*p.hops) : Json(nullptr)},
                   {"score", p.hops ? Json(p.score) : Json("inf")},
                   {"sample_index", p.sample_index}});
  return out;
}

Json to_json(const InterdisciplinarityScore& s) {
  return Json{{"embedding_dispersion", s.embedding_dispersion},
              {"mean_hop_distance", s.mean_hop_distance ? Json(*s.mean_hop_distance) : Json(nullptr)},
              {"score", s.score ? Json(*s.score) : Json(nullptr)},
              {"reachable_pairs", s.reachable_pairs},
              {"unreachable_pairs", s.unreachable_pairs}};
}

Json to_json(const MapArtifact& a) {
  Json points = Json::array();
  for (const auto& p : a.points) points.push_back({{"id", p.id}, {"x", p.position.x}, {"y", p.position.y}});
  Json centers = Json::array();
  for (const auto& c : a.centers)
    centers.push_back(
        {{"subject", c.subject}, {"x", c.position.x}, {"y", c.position.y}, {"member_count", c.member_count}});
  Json contours = Json::array();
  for (const auto& sc : a.contours) {
    Json levels = Json::array();
    for (const auto& l : sc.levels) {
      Json rings = Json::array();
      for (const auto& ring : l.rings) {
        Json pts = Json::array();
        for (const auto& p : ring) pts.push_back({p.x, p.y});
        rings.push_back(pts);
      }
      levels.push_back({{"mass", l.mass}, {"threshold", l.threshold}, {"area", l.area}, {"rings", rings}});
    }
    contours.push_back({{"subject", sc.subject},
                        {"bandwidth_x", sc.bandwidth_x},
                        {"bandwidth_y", sc.bandwidth_y},
                        {"levels", levels}});
  }
  return Json{{"points", points},
              {"centers", centers},
              {"contours", contours},
              {"labels", a.labels},
              {"notices", a.notices}};
}

Json pca_curve_json(const PcaModel& model, const std::vector<double>& curve) {
  return Json{{"dim", model.dim},
              {"total_variance", model.total_variance},
              {"explained_variance_ratios", model.explained_variance_ratios},
              {"cumulative", curve}};
}

std::string scatter_csv(const CorrelationReport& r) {
  std::string out = "emb_distance,hop_distance\n";
  for (const auto& p : r.scatter) out += format_number(p.embedding_distance) + "," + std::to_string(p.hop_distance) + "\n";
  return out;
}

std::string curve_csv(const std::vector<double>& curve) {
  std::string out = "k,cum_ratio\n";
  for (std::size_t k = 0; k < curve.size(); ++k) out += std::to_string(k + 1) + "," + format_number(curve[k]) + "\n";
  return out;
}

}  // namespace scimap
