#pragma once
// Document-set construction: partition the pool into distinctive and common
// features, sample target document frequencies, and distribute features
// under the per-document capacity constraint.

#include <string>
#include <vector>

#include "difbench/core.hpp"
#include "difbench/rng.hpp"

namespace difbench {

enum class FeatureKind { distinctive, common };

struct AssignmentPlan {
    Feature feature;
    FeatureKind kind = FeatureKind::common;
    int target_freq = 0;
    std::vector<int> placed_docs;  // doc ids, in placement order
};

// Randomly selects k features as distinctive; the rest are common.
// Iteration over the pool is in a stable sorted order, so the result
// depends only on the pool contents and the rng state.
std::pair<std::vector<Feature>, std::vector<Feature>> partition_features(const FeaturePool& pool,
                                                                         int k, Rng& rng);

// Uniform draw from [1, max_distinctive_freq] or [min_common_freq, n].
int sample_target_frequency(FeatureKind kind, const ValidatedConfig& vc, Rng& rng);

// Places plan.feature into a uniformly random subset of documents that
// still have spare capacity, of size min(target_freq, available).
void assign_feature(std::vector<Document>& documents, AssignmentPlan& plan, int h, Rng& rng);

struct Violation {
    std::string kind;  // FrequencyViolation, CapacityViolation, GoldMismatch, DuplicateFeature
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Full construction procedure. Distinctive features are assigned first
// (rng-shuffled order), then common features; a common feature that cannot
// reach min_common_freq placements is withdrawn entirely and recorded in
// skipped_features. Throws DistinctivePlacementFailure if any distinctive
// feature gets zero placements.
BenchmarkInstance build_instance(const FeaturePool& pool, const GenerationConfig& config);

// Recomputes every invariant from the raw documents; reports rather than
// throws so corrupt instances can be triaged.
ValidationReport validate_instance(const BenchmarkInstance& instance);

}  // namespace difbench
