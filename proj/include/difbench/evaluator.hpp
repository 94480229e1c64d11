#pragma once
// Exact-match scoring of PredictionSets against ground truth, plus
// aggregation of scores and token usage across instances.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "difbench/core.hpp"
#include "difbench/gateway.hpp"

namespace difbench {

struct EmptyCell : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DocDetail {
    std::vector<std::string> matched;   // original prediction strings
    std::vector<std::string> spurious;
    std::vector<std::string> missed;    // gold feature texts
};

struct InstanceScore {
    std::int64_t tp = 0, fp = 0, fn = 0;  // micro, over all (doc, feature) pairs
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    std::map<int, DocDetail> per_doc_detail;
};

nlohmann::json to_json(const InstanceScore& s);

// Micro-averaged exact-match scoring. Matching is on
// normalize_feature(text); per_doc_detail keeps original strings.
InstanceScore score_instance(const PredictionSet& predictions, const GroundTruth& truth, int n);

// grid coordinates a score or usage belongs to
struct CellKey {
    int n = 0;
    std::string theta;
    std::string model;

    auto operator<=>(const CellKey&) const = default;
};

struct CellStats {
    int count = 0;
    double mean_f1 = 0.0, std_f1 = 0.0;
    double mean_precision = 0.0, mean_recall = 0.0;
};

struct AggregateReport {
    std::map<CellKey, CellStats> per_cell;
    // unweighted averages over cells
    double mean_f1 = 0.0, std_f1 = 0.0, mean_precision = 0.0, mean_recall = 0.0;
    int sample_count = 0;
};

nlohmann::json to_json(const AggregateReport& r);

// Per-cell mean and population std over instance-level F1; overall numbers
// are unweighted cell averages. Throws EmptyCell when a labeled cell has
// no scores.
AggregateReport aggregate(const std::vector<std::pair<CellKey, InstanceScore>>& scores);

struct TokenCellStats {
    int exact_count = 0;
    int estimated_count = 0;
    std::optional<double> mean_output_exact;      // provider-reported only
    std::optional<double> mean_output_estimated;  // locally estimated only
};

struct TokenReport {
    std::map<CellKey, TokenCellStats> per_cell;
};

nlohmann::json to_json(const TokenReport& r);

// Mean output tokens per cell; exact and estimated counts are never pooled.
TokenReport token_stats(const std::vector<std::pair<CellKey, TokenUsage>>& usages);

}  // namespace difbench
