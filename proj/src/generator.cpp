#include "difbench/generator.hpp"

#include <algorithm>
#include <map>

namespace difbench {

static std::vector<Feature> sorted_features(const FeaturePool& pool) {
    std::vector<Feature> feats(pool.features.begin(), pool.features.end());
    std::sort(feats.begin(), feats.end());
    return feats;
}

std::pair<std::vector<Feature>, std::vector<Feature>> partition_features(const FeaturePool& pool,
                                                                         int k, Rng& rng) {
    if (static_cast<std::size_t>(k) + 1 > pool.size())
        throw PoolTooSmall("k=" + std::to_string(k) + " with pool of " +
                           std::to_string(pool.size()));
    auto feats = sorted_features(pool);
    rng.shuffle(feats);
    std::vector<Feature> distinctive(feats.begin(), feats.begin() + k);
    std::vector<Feature> common(feats.begin() + k, feats.end());
    return {std::move(distinctive), std::move(common)};
}

int sample_target_frequency(FeatureKind kind, const ValidatedConfig& vc, Rng& rng) {
    if (kind == FeatureKind::distinctive)
        return static_cast<int>(rng.uniform_int(1, vc.max_distinctive_freq()));
    return static_cast<int>(rng.uniform_int(vc.min_common_freq(), vc.n()));
}

static void place_into(Document& doc, const Feature& f) {
    for (auto& [label, feats] : doc.sections) {
        if (label == f.section) {
            feats.push_back(f);
            return;
        }
    }
    // section not in the document template; appended to keep placement total
    doc.sections.emplace_back(f.section, std::vector<Feature>{f});
}

void assign_feature(std::vector<Document>& documents, AssignmentPlan& plan, int h, Rng& rng) {
    std::vector<int> available;
    for (const auto& d : documents)
        if (d.feature_count() < h) available.push_back(d.doc_id);

    auto chosen = rng.sample(available, static_cast<std::size_t>(plan.target_freq));
    for (int doc_id : chosen) {
        place_into(documents[static_cast<std::size_t>(doc_id - 1)], plan.feature);
        plan.placed_docs.push_back(doc_id);
    }
}

BenchmarkInstance build_instance(const FeaturePool& pool, const GenerationConfig& config) {
    const auto vc = validate_config(config, pool);
    Rng rng(config.rng_seed);

    BenchmarkInstance inst;
    inst.config = config;
    inst.pool_ref = pool.seed_doc_id;
    inst.section_order = pool.sections;
    inst.documents.resize(static_cast<std::size_t>(config.n));
    for (int i = 0; i < config.n; ++i) {
        inst.documents[static_cast<std::size_t>(i)].doc_id = i + 1;
        for (const auto& label : pool.sections)
            inst.documents[static_cast<std::size_t>(i)].sections.emplace_back(
                label, std::vector<Feature>{});
    }

    auto [distinctive, common] = partition_features(pool, config.k, rng);

    // distinctive placements consume a prefix of the rng stream, so they
    // are unaffected by anything the common pass draws
    rng.shuffle(distinctive);
    for (const auto& f : distinctive) {
        AssignmentPlan plan{f, FeatureKind::distinctive,
                            sample_target_frequency(FeatureKind::distinctive, vc, rng), {}};
        assign_feature(inst.documents, plan, config.h, rng);
        if (plan.placed_docs.empty())
            throw DistinctivePlacementFailure("distinctive feature '" + f.text +
                                              "' received zero placements (all documents at capacity)");
        inst.ground_truth.distinctive.insert(f);
        inst.ground_truth.doc_frequency[f] = static_cast<int>(plan.placed_docs.size());
        for (int doc_id : plan.placed_docs) inst.ground_truth.per_doc_gold[doc_id].insert(f);
    }
    for (int i = 1; i <= config.n; ++i) inst.ground_truth.per_doc_gold.try_emplace(i);

    rng.shuffle(common);
    for (const auto& f : common) {
        int spare = 0;
        for (const auto& d : inst.documents)
            if (d.feature_count() < config.h) ++spare;
        if (spare < vc.min_common_freq()) {
            // a partial placement could masquerade as distinctive; withdraw
            inst.skipped_features.insert(f);
            continue;
        }
        AssignmentPlan plan{f, FeatureKind::common,
                            sample_target_frequency(FeatureKind::common, vc, rng), {}};
        assign_feature(inst.documents, plan, config.h, rng);
        inst.ground_truth.common.insert(f);
        inst.ground_truth.doc_frequency[f] = static_cast<int>(plan.placed_docs.size());
    }

    return inst;
}

ValidationReport validate_instance(const BenchmarkInstance& inst) {
    ValidationReport report;
    auto add = [&](std::string kind, std::string msg) {
        report.violations.push_back({std::move(kind), std::move(msg)});
    };

    const auto& gt = inst.ground_truth;
    const int n = inst.config.n;
    const int max_dist = static_cast<int>(inst.config.theta.floor_mul(n));
    const int min_common = max_dist + 1;

    // brute-force recount of document frequencies
    std::map<Feature, int> freq;
    for (const auto& d : inst.documents) {
        std::set<Feature> seen;
        if (d.feature_count() > inst.config.h)
            add("CapacityViolation", "doc " + std::to_string(d.doc_id) + " holds " +
                                         std::to_string(d.feature_count()) + " features, h=" +
                                         std::to_string(inst.config.h));
        for (const auto& [label, feats] : d.sections) {
            for (const auto& f : feats) {
                if (!seen.insert(f).second)
                    add("DuplicateFeature", "doc " + std::to_string(d.doc_id) +
                                                " repeats ('" + f.text + "', '" + f.section + "')");
                else
                    ++freq[f];
            }
        }
    }

    for (const auto& f : gt.distinctive) {
        int c = freq.count(f) ? freq.at(f) : 0;
        if (c < 1 || c > max_dist)
            add("FrequencyViolation", "distinctive '" + f.text + "' appears in " +
                                          std::to_string(c) + " docs, expected [1, " +
                                          std::to_string(max_dist) + "]");
        if (gt.common.count(f))
            add("GoldMismatch", "'" + f.text + "' labeled both distinctive and common");
    }
    for (const auto& f : gt.common) {
        int c = freq.count(f) ? freq.at(f) : 0;
        if (c < min_common || c > n)
            add("FrequencyViolation", "common '" + f.text + "' appears in " + std::to_string(c) +
                                          " docs, expected [" + std::to_string(min_common) + ", " +
                                          std::to_string(n) + "]");
    }
    for (const auto& [f, count] : gt.doc_frequency) {
        int c = freq.count(f) ? freq.at(f) : 0;
        if (c != count)
            add("GoldMismatch", "recorded doc_frequency " + std::to_string(count) + " for '" +
                                    f.text + "' but recount gives " + std::to_string(c));
    }

    // any placed feature must carry a label
    for (const auto& [f, c] : freq)
        if (!gt.distinctive.count(f) && !gt.common.count(f))
            add("GoldMismatch", "placed feature '" + f.text + "' has no ground-truth label");

    // per_doc_gold must equal distinctive ∩ document features
    for (const auto& d : inst.documents) {
        std::set<Feature> expected;
        for (const auto& [label, feats] : d.sections)
            for (const auto& f : feats)
                if (gt.distinctive.count(f)) expected.insert(f);
        std::set<Feature> actual;
        if (auto it = gt.per_doc_gold.find(d.doc_id); it != gt.per_doc_gold.end())
            actual = it->second;
        if (expected != actual)
            add("GoldMismatch",
                "per_doc_gold for doc " + std::to_string(d.doc_id) + " does not match recomputation");
    }

    // skipped features must not appear anywhere
    for (const auto& f : inst.skipped_features)
        if (freq.count(f))
            add("GoldMismatch", "skipped feature '" + f.text + "' is placed in a document");

    return report;
}

}  // namespace difbench
