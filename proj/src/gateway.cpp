#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "difbench/gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

#include "difbench/json_io.hpp"
#include "difbench/rng.hpp"
#include "difbench/text.hpp"

using nlohmann::json;

namespace difbench {

std::string parse_status_name(ParseStatus s) {
    switch (s) {
        case ParseStatus::ok: return "ok";
        case ParseStatus::repaired: return "repaired";
        case ParseStatus::failed: return "failed";
    }
    return "failed";
}

ParseStatus parse_status_from_name(const std::string& s) {
    if (s == "ok") return ParseStatus::ok;
    if (s == "repaired") return ParseStatus::repaired;
    if (s == "failed") return ParseStatus::failed;
    throw ParseError("unknown parse_status: " + s);
}

nlohmann::json to_json(const PredictionSet& p) {
    json per_doc = json::object();
    for (const auto& [doc_id, feats] : p.per_doc) per_doc[std::to_string(doc_id)] = feats;
    json reasoning = json::object();
    for (const auto& [doc_id, text] : p.reasoning) reasoning[std::to_string(doc_id)] = text;
    return json{{"schema_version", kSchemaVersion},
                {"per_doc", per_doc},
                {"reasoning", reasoning},
                {"usage",
                 json{{"prompt_tokens", p.usage.prompt_tokens},
                      {"output_tokens", p.usage.output_tokens},
                      {"estimated", p.usage.estimated}}},
                {"parse_status", parse_status_name(p.parse_status)}};
}

PredictionSet predictions_from_json(const nlohmann::json& j) {
    PredictionSet p;
    for (const auto& [key, val] : j.at("per_doc").items())
        p.per_doc[std::stoi(key)] = val.get<std::vector<std::string>>();
    for (const auto& [key, val] : j.at("reasoning").items())
        p.reasoning[std::stoi(key)] = val.get<std::string>();
    const auto& u = j.at("usage");
    p.usage.prompt_tokens = u.at("prompt_tokens").get<std::int64_t>();
    p.usage.output_tokens = u.at("output_tokens").get<std::int64_t>();
    p.usage.estimated = u.at("estimated").get<bool>();
    p.parse_status = parse_status_from_name(j.at("parse_status").get<std::string>());
    return p;
}

// ---------------------------------------------------------------------------
// templates

PromptTemplate PromptTemplate::load(const std::string& path) {
    return PromptTemplate{read_text_file(path)};
}

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        char c = tmpl[i];
        if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
            out += '{';
            ++i;
        } else if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
            out += '}';
            ++i;
        } else if (c == '{') {
            auto end = tmpl.find('}', i + 1);
            if (end == std::string::npos) throw TemplateError("unterminated placeholder");
            std::string name = tmpl.substr(i + 1, end - i - 1);
            auto it = values.find(name);
            if (it == values.end()) throw TemplateError("unresolved placeholder {" + name + "}");
            out += it->second;
            i = end;
        } else {
            out += c;
        }
    }
    return out;
}

std::string render_documents(const BenchmarkInstance& instance) {
    std::ostringstream out;
    for (const auto& d : instance.documents) {
        out << "## Candidate " << d.doc_id << "\n";
        for (const auto& [label, feats] : d.sections) {
            out << "### " << label << "\n";
            for (const auto& f : feats) out << "- " << f.text << "\n";
        }
        out << "\n";
    }
    return out.str();
}

std::string render_task_prompt(const BenchmarkInstance& instance, const PromptTemplate& tmpl) {
    const auto threshold = instance.config.theta.floor_mul(instance.config.n);
    return render_template(tmpl.text,
                           {{"num_documents", std::to_string(instance.config.n)},
                            {"distinctive_threshold", std::to_string(threshold)},
                            {"documents", render_documents(instance)}});
}

// ---------------------------------------------------------------------------
// response parsing

static bool extract_outputs(const json& j, int n, PredictionSet& p) {
    if (!j.is_object() || !j.contains("outputs") || !j["outputs"].is_array()) return false;
    for (const auto& entry : j["outputs"]) {
        if (!entry.is_object() || !entry.contains("candidate_id")) continue;
        int doc_id;
        const auto& cid = entry["candidate_id"];
        if (cid.is_number_integer()) {
            doc_id = cid.get<int>();
        } else if (cid.is_string()) {
            try {
                doc_id = std::stoi(cid.get<std::string>());
            } catch (...) {
                continue;
            }
        } else {
            continue;
        }
        if (doc_id < 1 || doc_id > n) continue;

        std::vector<std::string> feats;
        std::set<std::string> seen;
        if (entry.contains("output") && entry["output"].is_array()) {
            for (const auto& item : entry["output"]) {
                if (!item.is_string()) continue;
                std::string text = trim(item.get<std::string>());
                if (text.empty()) continue;
                if (seen.insert(text).second) feats.push_back(std::move(text));
            }
        }
        auto& slot = p.per_doc[doc_id];
        // merge if the model emitted the same candidate twice
        std::set<std::string> have(slot.begin(), slot.end());
        for (auto& f : feats)
            if (have.insert(f).second) slot.push_back(std::move(f));
        if (entry.contains("reasoning") && entry["reasoning"].is_string())
            p.reasoning[doc_id] = entry["reasoning"].get<std::string>();
    }
    return true;
}

// single repair pass: drop code fences, then keep the outermost brace span
static std::string repair_payload(const std::string& raw) {
    std::string s;
    s.reserve(raw.size());
    std::istringstream lines(raw);
    std::string line;
    while (std::getline(lines, line)) {
        auto t = trim(line);
        if (t.rfind("```", 0) == 0) continue;
        s += line;
        s += '\n';
    }
    auto first = s.find('{');
    auto last = s.rfind('}');
    if (first == std::string::npos || last == std::string::npos || last < first) return {};
    return s.substr(first, last - first + 1);
}

PredictionSet parse_predictions(const std::string& raw_text, int n) {
    PredictionSet p;

    auto try_parse = [&](const std::string& text) -> bool {
        json j = json::parse(text, nullptr, false);
        if (j.is_discarded()) return false;
        PredictionSet candidate;
        if (!extract_outputs(j, n, candidate)) return false;
        candidate.usage = p.usage;
        candidate.parse_status = p.parse_status;
        p = std::move(candidate);
        return true;
    };

    p.parse_status = ParseStatus::ok;
    if (try_parse(raw_text)) return p;

    p = PredictionSet{};
    p.parse_status = ParseStatus::repaired;
    auto repaired = repair_payload(raw_text);
    if (!repaired.empty() && try_parse(repaired)) return p;

    p = PredictionSet{};
    p.parse_status = ParseStatus::failed;
    return p;
}

std::string prompt_hash(const std::string& prompt) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a_str(prompt)));
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// HTTP provider

namespace {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ProviderError("malformed endpoint URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

ChatResponse HttpProvider::complete(const LlmClient& client, const std::string& prompt) {
    if (prompt.empty()) throw ProviderError("empty prompt");

    std::string api_key;
    if (!client.api_key_env.empty()) {
        const char* v = std::getenv(client.api_key_env.c_str());
        if (!v || !*v)
            throw AuthError("credential environment variable " + client.api_key_env +
                            " is not set");
        api_key = v;
    }

    auto url = split_url(client.endpoint);
    if (url.path.empty()) url.path = "/v1/chat/completions";

    json body{{"model", client.model_id},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
              {"temperature", client.temperature},
              {"top_p", client.top_p}};
    for (const auto& [key, val] : client.extra_options) body[key] = val;
    const std::string payload = body.dump();

    httplib::Client http(url.base);
    http.set_connection_timeout(client.timeout);
    http.set_read_timeout(client.timeout);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    const int max_attempts = std::max(1, client.max_retries);
    std::string last_error;
    bool timed_out = false;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        auto res = http.Post(url.path, headers, payload, "application/json");
        if (!res) {
            auto err = httplib::to_string(res.error());
            timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                        res.error() == httplib::Error::Read;
            last_error = "transport error: " + err;
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            timed_out = false;
        } else if (res->status != 200) {
            throw ProviderError("HTTP " + std::to_string(res->status) + ": " + res->body);
        } else {
            json rj = json::parse(res->body, nullptr, false);
            if (rj.is_discarded()) throw ProviderError("provider returned invalid JSON");
            ChatResponse out;
            out.attempts = attempt;
            try {
                out.text = rj.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception& e) {
                throw ProviderError(std::string("unexpected response shape: ") + e.what());
            }
            if (rj.contains("usage") && rj["usage"].is_object()) {
                out.usage.prompt_tokens = rj["usage"].value("prompt_tokens", std::int64_t{0});
                out.usage.output_tokens = rj["usage"].value("completion_tokens", std::int64_t{0});
                out.usage.estimated = false;
            } else {
                out.usage.prompt_tokens =
                    static_cast<std::int64_t>(approximate_token_count(prompt));
                out.usage.output_tokens =
                    static_cast<std::int64_t>(approximate_token_count(out.text));
                out.usage.estimated = true;
            }
            return out;
        }
        if (attempt < max_attempts)
            std::this_thread::sleep_for(std::chrono::milliseconds(100) * (1 << (attempt - 1)));
    }
    if (timed_out) throw TimeoutError("request timed out after retries: " + last_error);
    throw ProviderError("request failed after " + std::to_string(max_attempts) +
                        " attempts: " + last_error);
}

// ---------------------------------------------------------------------------
// mock provider

MockBehavior mock_behavior_from_name(const std::string& s) {
    if (s == "gold-echo" || s == "gold_echo") return MockBehavior::gold_echo;
    if (s == "all-features" || s == "all_features") return MockBehavior::all_features;
    if (s == "fixed-noise" || s == "fixed_noise") return MockBehavior::fixed_noise;
    if (s == "malformed") return MockBehavior::malformed;
    throw ConfigError("unknown mock behavior: " + s);
}

ChatResponse MockProvider::complete(const LlmClient& client, const std::string& prompt) {
    (void)client;
    ++calls_;

    ChatResponse out;
    out.usage.prompt_tokens = static_cast<std::int64_t>(approximate_token_count(prompt));
    out.usage.estimated = true;

    if (behavior_ == MockBehavior::malformed) {
        out.text = "I could not produce the requested structure, but here are some thoughts "
                   "about the candidates instead.";
        out.usage.output_tokens = static_cast<std::int64_t>(approximate_token_count(out.text));
        return out;
    }
    if (!instance_) throw ProviderError("mock provider has no instance bound");

    json outputs = json::array();
    for (const auto& d : instance_->documents) {
        json feats = json::array();
        switch (behavior_) {
            case MockBehavior::gold_echo: {
                auto it = instance_->ground_truth.per_doc_gold.find(d.doc_id);
                if (it != instance_->ground_truth.per_doc_gold.end())
                    for (const auto& f : it->second) feats.push_back(f.text);
                break;
            }
            case MockBehavior::all_features: {
                for (const auto& [label, fs] : d.sections)
                    for (const auto& f : fs) feats.push_back(f.text);
                break;
            }
            case MockBehavior::fixed_noise: {
                auto it = instance_->ground_truth.per_doc_gold.find(d.doc_id);
                if (it != instance_->ground_truth.per_doc_gold.end())
                    for (const auto& f : it->second) feats.push_back(f.text);
                // one deterministic non-distinctive extra per document
                for (const auto& [label, fs] : d.sections) {
                    bool added = false;
                    for (const auto& f : fs) {
                        if (instance_->ground_truth.common.count(f)) {
                            feats.push_back(f.text);
                            added = true;
                            break;
                        }
                    }
                    if (added) break;
                }
                break;
            }
            case MockBehavior::malformed:
                break;
        }
        outputs.push_back(json{{"candidate_id", d.doc_id},
                               {"reasoning", "mock"},
                               {"output", feats}});
    }
    out.text = json{{"outputs", outputs}}.dump(2);
    out.usage.output_tokens = static_cast<std::int64_t>(approximate_token_count(out.text));
    return out;
}

}  // namespace difbench
