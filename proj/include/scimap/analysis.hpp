#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scimap/citegraph.hpp"
#include "scimap/corpus.hpp"
#include "scimap/embedder.hpp"
#include "scimap/geometry.hpp"

namespace scimap {

/// Pearson product-moment correlation, two-pass (means first, then centered sums).
/// Throws ErrorKind::Validation on length mismatch or fewer than 2 values and
/// ErrorKind::UndefinedCorrelation when either variable has zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct ScatterPoint {
  double embedding_distance = 0.0;
  std::uint32_t hop_distance = 0;
};

struct CorrelationReport {
  double pcc = 0.0;
  std::size_t pair_count_used = 0;
  std::size_t pair_count_excluded = 0;
  std::vector<ScatterPoint> scatter;
  std::string model;
  PathMode mode = PathMode::Undirected;
};

/// PCC between cosine distance and hop distance over the reachable pairs of the
/// sample. Unreachable pairs are excluded and counted, never imputed.
CorrelationReport correlate_distances(const EmbeddingStore& store, const CitationGraph& graph,
                                      const PairSample& sample, PathMode mode = PathMode::Undirected,
                                      std::size_t threads = 1);
CorrelationReport correlate_distances(const EmbeddingStore& store, const PairSample& sample,
                                      const GraphDistanceResult& distances, PathMode mode = PathMode::Undirected);

struct PcaModel {
  std::size_t dim = 0;
  std::vector<double> mean;
  /// k orthonormal principal axes, strongest first.
  std::vector<std::vector<double>> components;
  std::vector<double> eigenvalues;
  std::vector<double> explained_variance_ratios;
  double total_variance = 0.0;
};

/// Eigendecomposition of the dim x dim sample covariance. `data` is row-major
/// with `dim` columns. Requires n >= 2 and 1 <= k <= min(n - 1, dim). Each axis is
/// sign-normalized so its largest-magnitude entry is positive.
PcaModel pca_fit(std::span<const double> data, std::size_t dim, std::size_t k);
PcaModel pca_fit(const EmbeddingStore& store, std::size_t k);

/// Prefix sums of pca_fit(...).explained_variance_ratios.
std::vector<double> explained_variance_curve(std::span<const double> data, std::size_t dim, std::size_t up_to);
std::vector<double> explained_variance_curve(const EmbeddingStore& store, std::size_t up_to);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Coordinates along the first two components of (v - mean).
Point2 project_2d(const PcaModel& model, std::span<const double> v);
Point2 project_2d(const PcaModel& model, std::span<const float> v);

struct ProjectedPoint {
  std::string id;
  Point2 position;
};

std::vector<ProjectedPoint> project_2d(const PcaModel& model, const EmbeddingStore& store);

/// Closed polygon; the last vertex connects back to the first. The inside of the
/// level set lies to the left, so outer boundaries run counter-clockwise.
using Ring = std::vector<Point2>;

double signed_area(const Ring& ring);
/// Even-odd test against every ring of a region.
bool point_in_region(const std::vector<Ring>& rings, Point2 p);

struct HdrLevel {
  double mass = 0.0;
  double threshold = 0.0;
  std::vector<Ring> rings;
  double area = 0.0;
};

struct KdeOptions {
  std::vector<double> levels{0.25, 0.5, 0.75};
  /// Fixed isotropic bandwidth; Scott's rule per axis when unset.
  std::optional<double> bandwidth;
  std::size_t grid_size = 128;
  std::size_t min_points = 20;
  /// Grid margin around the data, in bandwidths.
  double padding = 3.0;
};

struct KdeResult {
  double bandwidth_x = 0.0;
  double bandwidth_y = 0.0;
  std::vector<HdrLevel> levels;
};

struct KdeOutcome {
  std::optional<KdeResult> result;
  /// Why the input was skipped, when result is empty.
  std::string notice;
};

/// Gaussian KDE density at (x, y) for the given bandwidths.
double kde_density(std::span<const Point2> points, double bandwidth_x, double bandwidth_y, Point2 at);

/// Highest-density-region contours. For mass m the threshold is the (1 - m)
/// quantile of the density evaluated at the input points, so {density >= t}
/// holds about m of them; polylines come from marching squares on a regular grid.
KdeOutcome kde_hdr_contours(std::span<const Point2> points, const KdeOptions& options = {});

/// Contour rings of a row-major grid (x fastest) at `threshold`; cells outside
/// the grid count as below threshold, so every ring is closed.
std::vector<Ring> marching_squares(std::span<const double> values, std::size_t nx, std::size_t ny, double x0,
                                   double y0, double dx, double dy, double threshold);

struct InterdisciplinarityScore {
  double embedding_dispersion = 0.0;
  std::optional<double> mean_hop_distance;
  std::optional<double> score;
  std::size_t reachable_pairs = 0;
  std::size_t unreachable_pairs = 0;
};

/// dispersion = mean cosine distance to the set's mean direction; mean hop over
/// reachable internal pairs; score = dispersion / (1 + mean_hop). `score` is empty
/// when no pair is reachable.
InterdisciplinarityScore interdisciplinarity_score(std::span<const std::string> ids, const EmbeddingStore& store,
                                                   const CitationGraph& graph, PathMode mode = PathMode::Undirected);

inline constexpr double kDistantSimilarityEpsilon = 1e-6;

struct RankedPair {
  std::string a;
  std::string b;
  double cosine_distance = 0.0;
  Hops hops;
  /// hops / (eps + cosine_distance); +inf for unreachable pairs.
  double score = 0.0;
  std::size_t sample_index = 0;
};

/// Pairs close in embedding space but far on the graph, best first. Unreachable
/// pairs rank above reachable ones (ordered by smaller cosine distance); ties
/// keep sample order.
std::vector<RankedPair> distant_similarity_pairs(const EmbeddingStore& store, const CitationGraph& graph,
                                                 const PairSample& sample, std::size_t top_k,
                                                 PathMode mode = PathMode::Undirected, std::size_t threads = 1);
std::vector<RankedPair> distant_similarity_pairs(const EmbeddingStore& store, const PairSample& sample,
                                                 const GraphDistanceResult& distances, std::size_t top_k);

struct MapCenter {
  std::string subject;
  Point2 position;
  std::size_t member_count = 0;
};

struct SubjectContours {
  std::string subject;
  double bandwidth_x = 0.0;
  double bandwidth_y = 0.0;
  std::vector<HdrLevel> levels;
};

struct MapArtifact {
  std::vector<ProjectedPoint> points;
  std::vector<MapCenter> centers;
  std::vector<SubjectContours> contours;
  std::vector<std::string> labels;
  std::vector<std::string> notices;
};

struct MapOptions {
  KdeOptions kde;
  std::size_t label_count = 25;
  /// Largest subjects to contour; 0 means every subject with enough members.
  std::size_t max_kde_subjects = 0;
  CenterOptions centers;
  std::size_t threads = 1;
};

MapArtifact build_map(const PcaModel& model, const EmbeddingStore& store, const Corpus& corpus,
                      const SubjectCenters& centers, const MapOptions& options = {});

enum class MapFormat { Svg, Json, Csv };

MapFormat parse_map_format(std::string_view name);

std::string render_map_svg(const MapArtifact& artifact);
std::string render_map_json(const MapArtifact& artifact);
std::string render_map_csv(const MapArtifact& artifact);
void export_map(const MapArtifact& artifact, MapFormat format, const std::string& path);

}  // namespace scimap
