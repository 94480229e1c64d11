#pragma once
// Experiment grid plumbing behind the CLI: deterministic instance
// generation over a (pool, n, theta) grid, resumable model runs, scoring,
// error analysis, mitigation, and CSV report export.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "difbench/analysis.hpp"
#include "difbench/core.hpp"
#include "difbench/evaluator.hpp"
#include "difbench/gateway.hpp"

namespace difbench {

struct ModelSpec {
    std::string name;                         // roster label, used in paths and reports
    std::optional<MockBehavior> mock;         // set for built-in mock models
    LlmClient client;                         // used when mock is not set
};

struct ExperimentConfig {
    std::vector<int> n_values;
    std::vector<Fraction> thetas;
    std::optional<int> k_fixed;               // unset => k = floor(n/2)
    int samples_per_cell = 5;
    std::vector<std::filesystem::path> pool_paths;
    std::vector<ModelSpec> models;
    std::filesystem::path out_dir;
    std::uint64_t master_seed = 0;
    int parallelism = 4;
    double provider_failure_threshold = 0.5;  // exit-2 fraction for cmd_run
    std::string task_template;                // empty => built-in default
    std::string judge_template;               // empty => built-in default

    bool k_half_n() const { return !k_fixed.has_value(); }
    int k_for(int n) const { return k_fixed ? *k_fixed : n / 2; }

    static ExperimentConfig load(const std::filesystem::path& path);
};

// default prompt templates (same content ships under templates/)
const std::string& default_task_template();
const std::string& default_judge_template();
const std::string& default_synthesis_template();

struct ManifestEntry {
    std::string file;       // relative to out_dir
    std::string pool_id;
    int n = 0;
    std::string theta;
    int k = 0;
    int sample_index = 0;
    std::uint64_t seed = 0;
};

struct Manifest {
    std::vector<ManifestEntry> entries;

    void save(const std::filesystem::path& path) const;
    static Manifest load(const std::filesystem::path& path);
};

// per-instance seed derived from (master seed, cell coordinates, index);
// adding a grid cell never perturbs other cells' seeds
std::uint64_t derive_seed(std::uint64_t master, const std::string& pool_id, int n,
                          const std::string& theta, int sample_index);

// Builds samples_per_cell instances per grid cell under out/instances/ and
// writes out/instances/manifest.json. Config errors carry cell coordinates.
Manifest cmd_generate(const ExperimentConfig& cfg);

struct RunSummary {
    int completed = 0;
    int skipped = 0;   // already archived
    int failed = 0;    // provider errors (recorded, run continues)
    int total_pairs = 0;
};

// One PredictionSet per (instance, model), archived under
// out/raw/<model>/ and out/predictions/<model>/. With resume=true, pairs
// whose raw archive (keyed by prompt content hash) exists are skipped.
RunSummary cmd_run(const ExperimentConfig& cfg, const Manifest& manifest, bool resume);

// Writes per-instance scores and out/reports/aggregate.json and
// tokens.json; returns the aggregate.
AggregateReport cmd_score(const ExperimentConfig& cfg, const Manifest& manifest);

// Writes out/reports/error_analysis.json: overall and per-cell category
// distributions plus every false positive itemized.
void cmd_analyze(const ExperimentConfig& cfg, const Manifest& manifest);

// judge_name: "oracle" or a roster model name
void cmd_mitigate(const ExperimentConfig& cfg, const Manifest& manifest,
                  const std::string& judge_name);

// CSV exports: overall table (models x pool domains), per-(n, model) F1
// series, and per-(n, model) token series.
void cmd_report(const ExperimentConfig& cfg, const Manifest& manifest);

}  // namespace difbench
