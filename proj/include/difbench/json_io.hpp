#pragma once
// Canonical JSON serialization for core types.
//
// nlohmann::json objects keep keys sorted, so dump() of the same value is
// byte-identical across runs; that is the canonical form instance
// determinism is checked against.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

#include "difbench/core.hpp"

namespace difbench {

nlohmann::json to_json(const Feature& f);
Feature feature_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FeaturePool& pool);
FeaturePool pool_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GenerationConfig& cfg);
GenerationConfig config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BenchmarkInstance& inst);
BenchmarkInstance instance_from_json(const nlohmann::json& j);

// canonical text form (2-space indent, sorted keys, trailing newline)
std::string canonical_dump(const nlohmann::json& j);

std::string canonical_instance(const BenchmarkInstance& inst);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

void save_instance(const BenchmarkInstance& inst, const std::filesystem::path& path);
BenchmarkInstance load_instance(const std::filesystem::path& path);

void save_pool(const FeaturePool& pool, const std::filesystem::path& path);
// throws ParseError / InvariantViolation with field context
FeaturePool load_pool(const std::filesystem::path& path);

}  // namespace difbench
