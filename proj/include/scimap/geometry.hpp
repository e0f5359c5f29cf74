#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scimap/corpus.hpp"
#include "scimap/embedder.hpp"

namespace scimap {

/// Cosine similarity clamped to [-1, 1]. Throws ErrorKind::DimensionMismatch.
double cosine_similarity(std::span<const float> u, std::span<const float> v);
double cosine_similarity(std::span<const float> u, std::span<const double> v);
inline double cosine_distance(std::span<const float> u, std::span<const float> v) { return 1.0 - cosine_similarity(u, v); }
inline double cosine_distance(std::span<const float> u, std::span<const double> v) { return 1.0 - cosine_similarity(u, v); }

struct SubjectCenter {
  /// Raw weighted mean; not renormalized.
  std::vector<double> center;
  double total_weight = 0.0;
  std::size_t member_count = 0;

  std::vector<double> unit() const;
};

struct SubjectCenters {
  std::size_t dim = 0;
  std::map<std::string, SubjectCenter> subjects;
  /// Labelled records that had no vector in the store.
  std::size_t records_without_vector = 0;
  /// Subjects that ended up with no embedded member and were dropped.
  std::size_t omitted_subjects = 0;
};

/// Centers as an EMBS file (subject labels as ids, raw weighted means as vectors)
/// plus `path + ".meta.json"` holding weights and member counts.
void save_centers(const SubjectCenters& centers, const std::string& path);
SubjectCenters load_centers(const std::string& path);

struct CenterOptions {
  /// Labels removed from every record before weighting, e.g. catch-all
  /// "multidisciplinary" categories.
  std::vector<std::string> excluded_subjects;
};

/// Subjects of a record after exclusion, deduplicated, in first-seen order.
std::vector<std::string> effective_subjects(const Record& record, const CenterOptions& options = {});

/// center(S) = sum_r w_r v_r / sum_r w_r over records r labelled S, with w_r = 1 / |subjects(r)|.
SubjectCenters subject_centers(const EmbeddingStore& store, const Corpus& corpus, const CenterOptions& options = {});

struct SubjectSpread {
  std::string subject;
  double mean_center_distance = 0.0;
  double q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
  std::vector<std::string> outlier_ids;
};

/// Linear-interpolation quantile (Hyndman-Fan type 7) of an ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double q);

/// Per subject: cosine distances from members to the unit-normalized center. A
/// member is an outlier when its distance is strictly above the outlier_quantile
/// quantile of its subject's distances.
std::vector<SubjectSpread> subject_spread(const SubjectCenters& centers, const EmbeddingStore& store,
                                          const Corpus& corpus, double outlier_quantile = 0.95,
                                          const CenterOptions& options = {});

struct DistanceMatrix {
  std::vector<std::string> labels;
  std::vector<double> values;  // row-major labels.size()^2

  double operator()(std::size_t i, std::size_t j) const { return values[i * labels.size() + j]; }
};

DistanceMatrix center_pairwise_distances(const SubjectCenters& centers);

struct SoftLabel {
  /// Sorted by subject label.
  std::vector<std::pair<std::string, double>> probabilities;
  double temperature = 0.0;
  std::string argmax;
};

inline constexpr double kDefaultTemperature = 0.05;

/// p(S) proportional to exp(-cosine_distance(v, unit_center(S)) / T).
SoftLabel classify_soft(std::span<const float> v, const SubjectCenters& centers, double temperature = kDefaultTemperature);

}  // namespace scimap
