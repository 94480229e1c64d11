#include "difbench/core.hpp"

#include <algorithm>

#include "difbench/text.hpp"

namespace difbench {

std::string domain_name(Domain d) {
    switch (d) {
        case Domain::resume: return "resume";
        case Domain::news_summary: return "news_summary";
        case Domain::custom: return "custom";
    }
    return "custom";
}

Domain parse_domain(const std::string& s) {
    if (s == "resume") return Domain::resume;
    if (s == "news_summary") return Domain::news_summary;
    if (s == "custom") return Domain::custom;
    throw ParseError("unknown domain: " + s);
}

void FeaturePool::check() const {
    if (sections.empty()) throw InvariantViolation("pool has an empty sections list");
    std::set<std::string> known(sections.begin(), sections.end());
    std::set<Feature> seen;
    for (const auto& f : features) {
        if (trim(f.text).empty())
            throw InvariantViolation("feature with empty text in section '" + f.section + "'");
        if (!known.count(f.section))
            throw InvariantViolation("feature '" + f.text + "' references unknown section '" +
                                     f.section + "'");
        if (!seen.insert(f).second)
            throw InvariantViolation("duplicate feature ('" + f.text + "', '" + f.section + "')");
    }
}

ValidatedConfig validate_config(const GenerationConfig& cfg, const FeaturePool& pool) {
    if (cfg.n < 2) throw ConfigError("n must be >= 2, got " + std::to_string(cfg.n));
    if (cfg.k < 1) throw ConfigError("k must be >= 1, got " + std::to_string(cfg.k));
    if (cfg.h < 1) throw CapacityZero("h must be >= 1, got " + std::to_string(cfg.h));
    if (cfg.theta.num <= 0 || cfg.theta.num >= cfg.theta.den)
        throw ConfigError("theta must lie in (0,1), got " + cfg.theta.str());

    const auto max_dist = cfg.theta.floor_mul(cfg.n);
    if (max_dist < 1)
        throw DegenerateThreshold("floor(n*theta) = 0 for n=" + std::to_string(cfg.n) +
                                  ", theta=" + cfg.theta.str() + "; no distinctive frequency is legal");
    if (max_dist + 1 > cfg.n)
        throw DegenerateThreshold("floor(n*theta)+1 > n for n=" + std::to_string(cfg.n) +
                                  ", theta=" + cfg.theta.str() + "; no common frequency is legal");
    if (static_cast<std::size_t>(cfg.k) + 1 > pool.size())
        throw PoolTooSmall("k=" + std::to_string(cfg.k) + " needs a pool of at least k+1 features, pool has " +
                           std::to_string(pool.size()));

    ValidatedConfig v;
    v.cfg_ = cfg;
    v.max_distinctive_freq_ = static_cast<int>(max_dist);
    v.min_common_freq_ = static_cast<int>(max_dist) + 1;
    return v;
}

int default_capacity(int section_count) {
    if (section_count < 1) throw ConfigError("section count must be >= 1");
    return 4 * section_count;
}

int Document::feature_count() const {
    int total = 0;
    for (const auto& [label, feats] : sections) total += static_cast<int>(feats.size());
    return total;
}

bool Document::contains(const Feature& f) const {
    for (const auto& [label, feats] : sections)
        if (label == f.section &&
            std::find(feats.begin(), feats.end(), f) != feats.end())
            return true;
    return false;
}

bool Document::contains_text(const std::string& text) const {
    for (const auto& [label, feats] : sections)
        for (const auto& f : feats)
            if (f.text == text) return true;
    return false;
}

}  // namespace difbench
