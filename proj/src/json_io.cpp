#include "difbench/json_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

using nlohmann::json;

namespace difbench {

nlohmann::json to_json(const Feature& f) {
    return json{{"text", f.text}, {"section", f.section}};
}

Feature feature_from_json(const json& j) {
    return Feature{j.at("text").get<std::string>(), j.at("section").get<std::string>()};
}

static json features_to_json(const std::set<Feature>& fs) {
    json arr = json::array();
    for (const auto& f : fs) arr.push_back(to_json(f));
    return arr;
}

static std::set<Feature> features_from_json(const json& arr) {
    std::set<Feature> out;
    for (const auto& j : arr) out.insert(feature_from_json(j));
    return out;
}

nlohmann::json to_json(const FeaturePool& pool) {
    json feats = json::array();
    for (const auto& f : pool.features) feats.push_back(to_json(f));
    return json{{"schema_version", kSchemaVersion},
                {"domain", domain_name(pool.domain)},
                {"seed_doc_id", pool.seed_doc_id},
                {"sections", pool.sections},
                {"features", feats}};
}

FeaturePool pool_from_json(const json& j) {
    FeaturePool pool;
    pool.domain = parse_domain(j.at("domain").get<std::string>());
    pool.seed_doc_id = j.value("seed_doc_id", std::string{});
    pool.sections = j.at("sections").get<std::vector<std::string>>();
    for (const auto& fj : j.at("features")) pool.features.push_back(feature_from_json(fj));
    return pool;
}

nlohmann::json to_json(const GenerationConfig& cfg) {
    return json{{"n", cfg.n},
                {"k", cfg.k},
                {"theta", cfg.theta.str()},
                {"h", cfg.h},
                {"rng_seed", cfg.rng_seed}};
}

GenerationConfig config_from_json(const json& j) {
    GenerationConfig cfg;
    cfg.n = j.at("n").get<int>();
    cfg.k = j.at("k").get<int>();
    cfg.theta = Fraction::parse(j.at("theta").get<std::string>());
    cfg.h = j.at("h").get<int>();
    cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return cfg;
}

nlohmann::json to_json(const BenchmarkInstance& inst) {
    json docs = json::array();
    for (const auto& d : inst.documents) {
        json secs = json::array();
        for (const auto& [label, feats] : d.sections) {
            json texts = json::array();
            for (const auto& f : feats) texts.push_back(f.text);
            secs.push_back(json{{"section", label}, {"features", texts}});
        }
        docs.push_back(json{{"doc_id", d.doc_id}, {"sections", secs}});
    }

    json freq = json::array();
    for (const auto& [f, count] : inst.ground_truth.doc_frequency) {
        json e = to_json(f);
        e["count"] = count;
        freq.push_back(e);
    }
    json gold = json::object();
    for (const auto& [doc_id, fs] : inst.ground_truth.per_doc_gold)
        gold[std::to_string(doc_id)] = features_to_json(fs);

    return json{{"schema_version", inst.schema_version},
                {"config", to_json(inst.config)},
                {"pool_ref", inst.pool_ref},
                {"section_order", inst.section_order},
                {"documents", docs},
                {"ground_truth",
                 json{{"distinctive", features_to_json(inst.ground_truth.distinctive)},
                      {"common", features_to_json(inst.ground_truth.common)},
                      {"doc_frequency", freq},
                      {"per_doc_gold", gold}}},
                {"skipped_features", features_to_json(inst.skipped_features)}};
}

BenchmarkInstance instance_from_json(const json& j) {
    BenchmarkInstance inst;
    inst.schema_version = j.at("schema_version").get<std::string>();
    inst.config = config_from_json(j.at("config"));
    inst.pool_ref = j.value("pool_ref", std::string{});
    inst.section_order = j.at("section_order").get<std::vector<std::string>>();
    for (const auto& dj : j.at("documents")) {
        Document d;
        d.doc_id = dj.at("doc_id").get<int>();
        for (const auto& sj : dj.at("sections")) {
            std::string label = sj.at("section").get<std::string>();
            std::vector<Feature> feats;
            for (const auto& t : sj.at("features"))
                feats.push_back(Feature{t.get<std::string>(), label});
            d.sections.emplace_back(std::move(label), std::move(feats));
        }
        inst.documents.push_back(std::move(d));
    }
    const auto& gt = j.at("ground_truth");
    inst.ground_truth.distinctive = features_from_json(gt.at("distinctive"));
    inst.ground_truth.common = features_from_json(gt.at("common"));
    for (const auto& e : gt.at("doc_frequency"))
        inst.ground_truth.doc_frequency[feature_from_json(e)] = e.at("count").get<int>();
    for (const auto& [key, val] : gt.at("per_doc_gold").items())
        inst.ground_truth.per_doc_gold[std::stoi(key)] = features_from_json(val);
    inst.skipped_features = features_from_json(j.at("skipped_features"));
    return inst;
}

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

std::string canonical_instance(const BenchmarkInstance& inst) {
    return canonical_dump(to_json(inst));
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void save_instance(const BenchmarkInstance& inst, const std::filesystem::path& path) {
    write_text_file(path, canonical_instance(inst));
}

BenchmarkInstance load_instance(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return instance_from_json(j);
}

void save_pool(const FeaturePool& pool, const std::filesystem::path& path) {
    write_text_file(path, canonical_dump(to_json(pool)));
}

FeaturePool load_pool(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    FeaturePool pool;
    try {
        pool = pool_from_json(j);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    try {
        pool.check();
    } catch (const InvariantViolation& e) {
        throw InvariantViolation(path.string() + ": " + e.what());
    }
    return pool;
}

}  // namespace difbench
