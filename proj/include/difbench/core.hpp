#pragma once
// Domain types shared across the toolkit, plus configuration validation.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "difbench/fraction.hpp"

namespace difbench {

inline constexpr const char* kSchemaVersion = "1";

// ---------------------------------------------------------------------------
// errors

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateThreshold : ConfigError {
    using ConfigError::ConfigError;
};
struct PoolTooSmall : ConfigError {
    using ConfigError::ConfigError;
};
struct CapacityZero : ConfigError {
    using ConfigError::ConfigError;
};
struct DistinctivePlacementFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// features and pools

struct Feature {
    std::string text;     // exact surface form
    std::string section;  // e.g. "Technical Skills", "fuel requirements"

    auto operator<=>(const Feature&) const = default;
};

enum class Domain { resume, news_summary, custom };

std::string domain_name(Domain d);
Domain parse_domain(const std::string& s);

struct FeaturePool {
    std::vector<Feature> features;       // unique (text, section) pairs
    std::vector<std::string> sections;   // ordered section labels
    Domain domain = Domain::custom;
    std::string seed_doc_id;

    std::size_t size() const { return features.size(); }
    // throws InvariantViolation on duplicate features, unknown sections,
    // empty section list, or empty feature text
    void check() const;
};

// ---------------------------------------------------------------------------
// generation configuration

struct GenerationConfig {
    int n = 0;                 // document count
    int k = 0;                 // distinctive-feature count
    Fraction theta;            // distinctiveness threshold
    int h = 0;                 // per-document feature capacity
    std::uint64_t rng_seed = 0;
};

// Wrapper proving the config passed validation against a pool.
class ValidatedConfig {
public:
    const GenerationConfig& config() const { return cfg_; }
    int n() const { return cfg_.n; }
    int k() const { return cfg_.k; }
    int h() const { return cfg_.h; }
    int max_distinctive_freq() const { return max_distinctive_freq_; }  // floor(n * theta)
    int min_common_freq() const { return min_common_freq_; }            // floor(n * theta) + 1

    friend ValidatedConfig validate_config(const GenerationConfig&, const FeaturePool&);

private:
    GenerationConfig cfg_;
    int max_distinctive_freq_ = 0;
    int min_common_freq_ = 0;
};

// Throws DegenerateThreshold, PoolTooSmall, CapacityZero, or ConfigError.
ValidatedConfig validate_config(const GenerationConfig& cfg, const FeaturePool& pool);

// h = 4 * S
int default_capacity(int section_count);

// ---------------------------------------------------------------------------
// documents and instances

struct Document {
    int doc_id = 0;  // 1-based
    // section label -> features in assignment order; sections in template order
    std::vector<std::pair<std::string, std::vector<Feature>>> sections;

    int feature_count() const;
    bool contains(const Feature& f) const;
    // membership by exact text in any section
    bool contains_text(const std::string& text) const;
};

struct GroundTruth {
    std::set<Feature> distinctive;             // F^delta
    std::set<Feature> common;                  // placed common features
    std::map<Feature, int> doc_frequency;      // placed features only
    std::map<int, std::set<Feature>> per_doc_gold;
};

struct BenchmarkInstance {
    GenerationConfig config;
    std::vector<Document> documents;
    GroundTruth ground_truth;
    std::string pool_ref;                  // seed_doc_id of the source pool
    std::vector<std::string> section_order;
    std::set<Feature> skipped_features;    // never placed
    std::string schema_version = kSchemaVersion;
};

}  // namespace difbench
