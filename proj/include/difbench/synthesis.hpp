#pragma once
// FeaturePool construction: section templates and LLM-assisted feature
// synthesis from seed documents. Pools can equally be hand-authored and
// loaded from file (json_io::load_pool); synthesis needs a live provider.

#include <string>
#include <vector>

#include "difbench/core.hpp"
#include "difbench/gateway.hpp"

namespace difbench {

struct EmptyBatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SectionTemplate {
    Domain domain = Domain::custom;
    std::vector<std::string> sections;

    // the six resume section labels
    static SectionTemplate resume();
    // news template with caller-supplied subtopic labels (7-9 typical)
    static SectionTemplate news(std::vector<std::string> subtopics);
    static SectionTemplate custom(std::vector<std::string> sections);
};

struct SynthesisRequest {
    std::string seed_doc_text;
    std::string section;
    std::vector<Feature> prior_features;  // from other sections of the same seed doc
    int candidates_per_section = 20;
};

// Prompts the model for candidate features for one section. Exact-text
// duplicates against prior_features and within the batch are dropped;
// model output order is preserved. Throws EmptyBatch when no feature can
// be parsed from the response.
std::vector<Feature> synthesize_section_features(const SynthesisRequest& request,
                                                 Provider& provider, const LlmClient& client,
                                                 const std::string& synthesis_template);

// Iterates sections in template order, feeding each call all previously
// synthesized features as diversity context.
FeaturePool build_feature_pool(const std::string& seed_doc_text, const std::string& seed_doc_id,
                               const SectionTemplate& tmpl, Provider& provider,
                               const LlmClient& client, const std::string& synthesis_template,
                               int candidates_per_section = 20);

}  // namespace difbench
