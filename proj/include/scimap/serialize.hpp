#pragma once

#include <json.hpp>

#include "scimap/analysis.hpp"
#include "scimap/citegraph.hpp"
#include "scimap/corpus.hpp"
#include "scimap/geometry.hpp"

namespace scimap {

// JSON shapes of the report types. Field order is fixed (ordered_json) so the
// output is byte-stable.
using Json = nlohmann::ordered_json;

Json to_json(const PreprocessReport& report);
Json to_json(const SubjectCenters& centers);
Json to_json(const std::vector<SubjectSpread>& spreads);
Json to_json(const DistanceMatrix& matrix);
Json to_json(const SoftLabel& label);
Json to_json(const PairSample& sample, const GraphDistanceResult& result);
Json to_json(const CorrelationReport& report);
Json to_json(const std::vector<RankedPair>& pairs);
Json to_json(const InterdisciplinarityScore& score);
Json to_json(const MapArtifact& artifact);
Json pca_curve_json(const PcaModel& model, const std::vector<double>& curve);

/// "emb_distance,hop_distance" rows.
std::string scatter_csv(const CorrelationReport& report);
/// "k,cum_ratio" rows, k starting at 1.
std::string curve_csv(const std::vector<double>& curve);

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);

}  // namespace scimap
