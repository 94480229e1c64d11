#include "difbench/synthesis.hpp"

#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "difbench/text.hpp"

using nlohmann::json;

namespace difbench {

SectionTemplate SectionTemplate::resume() {
    return {Domain::resume,
            {"Experience", "Technical Skills", "Soft Skills", "Projects", "Certifications",
             "Awards and Recognition"}};
}

SectionTemplate SectionTemplate::news(std::vector<std::string> subtopics) {
    return {Domain::news_summary, std::move(subtopics)};
}

SectionTemplate SectionTemplate::custom(std::vector<std::string> sections) {
    return {Domain::custom, std::move(sections)};
}

// Accepts either {"features": [...]} or a bare JSON array of strings;
// falls back to "- " bullet lines for models that ignore the format.
static std::vector<std::string> parse_feature_batch(const std::string& raw) {
    std::vector<std::string> out;
    json j = json::parse(raw, nullptr, false);
    const json* arr = nullptr;
    if (!j.is_discarded()) {
        if (j.is_array()) arr = &j;
        else if (j.is_object() && j.contains("features") && j["features"].is_array())
            arr = &j["features"];
    }
    if (arr) {
        for (const auto& item : *arr)
            if (item.is_string()) {
                auto t = trim(item.get<std::string>());
                if (!t.empty()) out.push_back(std::move(t));
            }
        return out;
    }
    std::istringstream lines(raw);
    std::string line;
    while (std::getline(lines, line)) {
        auto t = trim(line);
        if (t.rfind("- ", 0) == 0) {
            t = trim(t.substr(2));
            if (!t.empty()) out.push_back(std::move(t));
        }
    }
    return out;
}

std::vector<Feature> synthesize_section_features(const SynthesisRequest& request,
                                                 Provider& provider, const LlmClient& client,
                                                 const std::string& synthesis_template) {
    if (trim(request.seed_doc_text).empty())
        throw ConfigError("synthesis requires a non-empty seed document");
    if (trim(request.section).empty()) throw ConfigError("synthesis requires a section label");
    if (request.candidates_per_section < 1)
        throw ConfigError("candidates_per_section must be >= 1");

    std::ostringstream prior;
    for (const auto& f : request.prior_features)
        prior << "- [" << f.section << "] " << f.text << "\n";

    auto prompt = render_template(synthesis_template,
                                  {{"seed_doc", request.seed_doc_text},
                                   {"section", request.section},
                                   {"prior_features", prior.str()},
                                   {"count", std::to_string(request.candidates_per_section)}});
    auto response = provider.complete(client, prompt);

    auto texts = parse_feature_batch(response.text);
    if (texts.empty()) throw EmptyBatch("model returned no parseable features for section '" +
                                        request.section + "'");

    std::set<std::string> known;
    for (const auto& f : request.prior_features) known.insert(f.text);

    std::vector<Feature> out;
    for (auto& t : texts) {
        if (!known.insert(t).second) continue;  // exact-text dedupe only
        out.push_back(Feature{std::move(t), request.section});
        if (static_cast<int>(out.size()) == request.candidates_per_section) break;
    }
    return out;
}

FeaturePool build_feature_pool(const std::string& seed_doc_text, const std::string& seed_doc_id,
                               const SectionTemplate& tmpl, Provider& provider,
                               const LlmClient& client, const std::string& synthesis_template,
                               int candidates_per_section) {
    if (tmpl.sections.empty()) throw ConfigError("section template is empty");

    FeaturePool pool;
    pool.domain = tmpl.domain;
    pool.seed_doc_id = seed_doc_id;
    pool.sections = tmpl.sections;

    std::vector<Feature> prior;
    for (const auto& section : tmpl.sections) {
        SynthesisRequest request{seed_doc_text, section, prior, candidates_per_section};
        auto batch = synthesize_section_features(request, provider, client, synthesis_template);
        for (auto& f : batch) {
            pool.features.push_back(f);
            prior.push_back(std::move(f));
        }
    }
    pool.check();
    return pool;
}

}  // namespace difbench
