#pragma once
// Chat-completion gateway: renders the task prompt for an instance, calls a
// provider, and parses the structured response into a PredictionSet.

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "difbench/core.hpp"

namespace difbench {

struct ProviderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AuthError : ProviderError {
    using ProviderError::ProviderError;
};
struct TimeoutError : ProviderError {
    using ProviderError::ProviderError;
};
struct TemplateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t output_tokens = 0;
    bool estimated = false;  // true when counts come from a local approximation
};

struct LlmClient {
    std::string endpoint;      // base URL, e.g. https://api.openai.com
    std::string model_id;
    std::string api_key_env;   // environment variable holding the credential
    double temperature = 0.0;
    double top_p = 1.0;
    int max_retries = 3;
    std::chrono::seconds timeout{120};
    std::map<std::string, nlohmann::json> extra_options;  // opaque passthrough
};

enum class ParseStatus { ok, repaired, failed };

std::string parse_status_name(ParseStatus s);
ParseStatus parse_status_from_name(const std::string& s);

struct PredictionSet {
    std::map<int, std::vector<std::string>> per_doc;  // deduped, order preserved
    std::map<int, std::string> reasoning;
    TokenUsage usage;
    ParseStatus parse_status = ParseStatus::ok;
};

nlohmann::json to_json(const PredictionSet& p);
PredictionSet predictions_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// prompt rendering

struct PromptTemplate {
    std::string text;  // placeholders: {num_documents} {distinctive_threshold} {documents}

    static PromptTemplate load(const std::string& path);
};

// Substitutes the document count, the threshold as an absolute document
// count (floor(n*theta)), and the rendered documents. "{{"/"}}" escape
// literal braces. Throws TemplateError on an unresolved placeholder.
std::string render_task_prompt(const BenchmarkInstance& instance, const PromptTemplate& tmpl);

// documents block alone (used by the judge prompt too)
std::string render_documents(const BenchmarkInstance& instance);

// generic placeholder substitution with the same escaping rules
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);

// ---------------------------------------------------------------------------
// providers

struct ChatResponse {
    std::string text;
    TokenUsage usage;
    int attempts = 1;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual ChatResponse complete(const LlmClient& client, const std::string& prompt) = 0;
};

// OpenAI-style chat-completions HTTP provider. Retries transient failures
// (transport errors, 429, 5xx) with exponential backoff up to max_retries.
class HttpProvider : public Provider {
public:
    ChatResponse complete(const LlmClient& client, const std::string& prompt) override;
};

// Scripted provider for tests and offline pipeline runs.
enum class MockBehavior { gold_echo, all_features, fixed_noise, malformed };

MockBehavior mock_behavior_from_name(const std::string& s);

class MockProvider : public Provider {
public:
    MockProvider(MockBehavior behavior, const BenchmarkInstance* instance)
        : behavior_(behavior), instance_(instance) {}

    ChatResponse complete(const LlmClient& client, const std::string& prompt) override;
    int call_count() const { return calls_; }
    void set_instance(const BenchmarkInstance* instance) { instance_ = instance; }

private:
    MockBehavior behavior_;
    const BenchmarkInstance* instance_;
    int calls_ = 0;
};

// ---------------------------------------------------------------------------
// response parsing

// Total: every input yields a PredictionSet. A clean JSON payload parses
// with status ok; payloads wrapped in fences or prose get one repair pass
// (status repaired); anything else yields empty predictions with status
// failed.
PredictionSet parse_predictions(const std::string& raw_text, int n);

// content hash used to key the raw-response archive
std::string prompt_hash(const std::string& prompt);

}  // namespace difbench
