#pragma once
// False-positive taxonomy over predicted features, and the per-feature
// verification (mitigation) pass.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "difbench/core.hpp"
#include "difbench/gateway.hpp"

namespace difbench {

struct UnknownDoc : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MismatchedRun : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ErrorCategory { non_distinctive, contamination, typo_abbreviation, correct };

std::string category_name(ErrorCategory c);

// Mutually exclusive and exhaustive over predicted (doc, feature) pairs:
//   correct            — in the document's gold distinctive set
//   non_distinctive    — in the document, but not distinctive for it
//   contamination      — not in the document, but in some other document
//   typo_abbreviation  — in no document at all
ErrorCategory categorize_prediction(const std::string& feature, int doc_id,
                                    const BenchmarkInstance& instance);

struct CategoryDistribution {
    std::map<ErrorCategory, std::int64_t> counts;
    std::map<ErrorCategory, double> fractions;  // sum to 1 when total > 0
    std::int64_t total = 0;
};

nlohmann::json to_json(const CategoryDistribution& d);

// Pools every predicted (doc, feature) pair across the given runs.
CategoryDistribution error_distribution(
    const std::vector<std::pair<const PredictionSet*, const BenchmarkInstance*>>& runs);

// itemized false positives, for the error-analysis report
struct CategorizedPrediction {
    int doc_id = 0;
    std::string feature;
    ErrorCategory category = ErrorCategory::correct;
};

std::vector<CategorizedPrediction> categorize_all(const PredictionSet& predictions,
                                                  const BenchmarkInstance& instance);

// ---------------------------------------------------------------------------
// mitigation

enum class JudgeVerdict { distinctive, not_distinctive, error };

// one verdict per feature string, given the whole document set as context
using Judge = std::function<JudgeVerdict(const std::string& feature)>;

// Ground-truth judge: distinctive iff the exact-match document frequency
// lies in [1, floor(n*theta)].
bool oracle_judge(const std::string& feature, const BenchmarkInstance& instance);

struct MitigationResult {
    PredictionSet filtered;             // only kept features, order preserved
    std::vector<std::pair<int, std::string>> flagged;  // judge errors, kept by default
    std::size_t judge_calls = 0;        // one per unique feature string
};

// Submits each predicted feature to the judge and keeps only "distinctive"
// verdicts. Judge failures keep the feature and flag it. Verdicts are
// cached per feature string, so repeats across documents cost one call.
MitigationResult mitigate(const PredictionSet& predictions, const BenchmarkInstance& instance,
                          const Judge& judge);

// LLM judge over a one-field yes/no structured response.
Judge make_llm_judge(Provider& provider, const LlmClient& client,
                     const BenchmarkInstance& instance, const std::string& judge_template);

}  // namespace difbench
