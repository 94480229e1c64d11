#include "difbench/analysis.hpp"

#include <set>

#include "difbench/text.hpp"

using nlohmann::json;

namespace difbench {

std::string category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::non_distinctive: return "non_distinctive";
        case ErrorCategory::contamination: return "contamination";
        case ErrorCategory::typo_abbreviation: return "typo_abbreviation";
        case ErrorCategory::correct: return "correct";
    }
    return "typo_abbreviation";
}

ErrorCategory categorize_prediction(const std::string& feature, int doc_id,
                                    const BenchmarkInstance& instance) {
    if (doc_id < 1 || doc_id > instance.config.n)
        throw UnknownDoc("doc_id " + std::to_string(doc_id) + " outside [1, " +
                         std::to_string(instance.config.n) + "]");
    const auto norm = normalize_feature(feature);

    const auto& doc = instance.documents[static_cast<std::size_t>(doc_id - 1)];
    auto doc_has = [&](const Document& d) {
        for (const auto& [label, feats] : d.sections)
            for (const auto& f : feats)
                if (normalize_feature(f.text) == norm) return true;
        return false;
    };

    if (doc_has(doc)) {
        if (auto it = instance.ground_truth.per_doc_gold.find(doc_id);
            it != instance.ground_truth.per_doc_gold.end())
            for (const auto& f : it->second)
                if (normalize_feature(f.text) == norm) return ErrorCategory::correct;
        return ErrorCategory::non_distinctive;
    }
    for (const auto& other : instance.documents)
        if (other.doc_id != doc_id && doc_has(other)) return ErrorCategory::contamination;
    return ErrorCategory::typo_abbreviation;
}

nlohmann::json to_json(const CategoryDistribution& d) {
    json counts = json::object(), fractions = json::object();
    for (auto cat : {ErrorCategory::non_distinctive, ErrorCategory::contamination,
                     ErrorCategory::typo_abbreviation, ErrorCategory::correct}) {
        counts[category_name(cat)] = d.counts.count(cat) ? d.counts.at(cat) : 0;
        fractions[category_name(cat)] = d.fractions.count(cat) ? d.fractions.at(cat) : 0.0;
    }
    return json{{"schema_version", kSchemaVersion},
                {"counts", counts},
                {"fractions", fractions},
                {"total", d.total}};
}

std::vector<CategorizedPrediction> categorize_all(const PredictionSet& predictions,
                                                  const BenchmarkInstance& instance) {
    std::vector<CategorizedPrediction> out;
    for (const auto& [doc_id, feats] : predictions.per_doc) {
        if (doc_id < 1 || doc_id > instance.config.n)
            throw MismatchedRun("prediction references unknown doc_id " + std::to_string(doc_id));
        std::set<std::string> seen;
        for (const auto& text : feats) {
            if (!seen.insert(normalize_feature(text)).second) continue;
            out.push_back({doc_id, text, categorize_prediction(text, doc_id, instance)});
        }
    }
    return out;
}

CategoryDistribution error_distribution(
    const std::vector<std::pair<const PredictionSet*, const BenchmarkInstance*>>& runs) {
    CategoryDistribution dist;
    for (const auto& [preds, inst] : runs) {
        for (const auto& item : categorize_all(*preds, *inst)) {
            ++dist.counts[item.category];
            ++dist.total;
        }
    }
    if (dist.total > 0)
        for (const auto& [cat, count] : dist.counts)
            dist.fractions[cat] = static_cast<double>(count) / static_cast<double>(dist.total);
    return dist;
}

// ---------------------------------------------------------------------------
// mitigation

bool oracle_judge(const std::string& feature, const BenchmarkInstance& instance) {
    const auto norm = normalize_feature(feature);
    int freq = 0;
    for (const auto& doc : instance.documents) {
        bool found = false;
        for (const auto& [label, feats] : doc.sections) {
            for (const auto& f : feats) {
                if (normalize_feature(f.text) == norm) {
                    found = true;
                    break;
                }
            }
            if (found) break;
        }
        if (found) ++freq;
    }
    const auto max_dist = instance.config.theta.floor_mul(instance.config.n);
    return freq >= 1 && freq <= max_dist;
}

MitigationResult mitigate(const PredictionSet& predictions, const BenchmarkInstance& instance,
                          const Judge& judge) {
    MitigationResult result;
    result.filtered.usage = predictions.usage;
    result.filtered.parse_status = predictions.parse_status;
    result.filtered.reasoning = predictions.reasoning;

    // distinctiveness is a global property, so one verdict per feature string
    std::map<std::string, JudgeVerdict> cache;
    auto verdict_for = [&](const std::string& feature) {
        const auto key = normalize_feature(feature);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        JudgeVerdict v;
        try {
            v = judge(feature);
        } catch (...) {
            v = JudgeVerdict::error;
        }
        ++result.judge_calls;
        cache.emplace(key, v);
        return v;
    };

    for (const auto& [doc_id, feats] : predictions.per_doc) {
        std::vector<std::string> kept;
        for (const auto& text : feats) {
            switch (verdict_for(text)) {
                case JudgeVerdict::distinctive:
                    kept.push_back(text);
                    break;
                case JudgeVerdict::not_distinctive:
                    break;
                case JudgeVerdict::error:
                    // conservative filter: never silently delete on a flaky judge
                    kept.push_back(text);
                    result.flagged.emplace_back(doc_id, text);
                    break;
            }
        }
        result.filtered.per_doc.emplace(doc_id, std::move(kept));
    }
    return result;
}

Judge make_llm_judge(Provider& provider, const LlmClient& client,
                     const BenchmarkInstance& instance, const std::string& judge_template) {
    const std::string documents = render_documents(instance);
    const auto threshold = instance.config.theta.floor_mul(instance.config.n);
    return [&provider, client, judge_template, documents, threshold,
            n = instance.config.n](const std::string& feature) {
        auto prompt = render_template(judge_template,
                                      {{"feature", feature},
                                       {"documents", documents},
                                       {"num_documents", std::to_string(n)},
                                       {"distinctive_threshold", std::to_string(threshold)}});
        auto response = provider.complete(client, prompt);
        json j = json::parse(response.text, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("distinctive"))
            return JudgeVerdict::error;
        const auto& v = j["distinctive"];
        std::string answer;
        if (v.is_boolean()) return v.get<bool>() ? JudgeVerdict::distinctive
                                                 : JudgeVerdict::not_distinctive;
        if (v.is_string()) answer = v.get<std::string>();
        if (answer == "yes" || answer == "Yes" || answer == "YES")
            return JudgeVerdict::distinctive;
        if (answer == "no" || answer == "No" || answer == "NO")
            return JudgeVerdict::not_distinctive;
        return JudgeVerdict::error;
    };
}

}  // namespace difbench
