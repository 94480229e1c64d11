#include "difbench/experiment.hpp"

#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "difbench/generator.hpp"
#include "difbench/json_io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace difbench {

// ---------------------------------------------------------------------------
// config loading

static LlmClient client_from_json(const json& j) {
    LlmClient c;
    c.endpoint = j.value("endpoint", std::string{});
    c.model_id = j.value("model_id", std::string{});
    c.api_key_env = j.value("api_key_env", std::string{});
    c.temperature = j.value("temperature", 0.0);
    c.top_p = j.value("top_p", 1.0);
    c.max_retries = j.value("max_retries", 3);
    c.timeout = std::chrono::seconds(j.value("timeout_seconds", 120));
    if (j.contains("extra_options"))
        for (const auto& [key, val] : j.at("extra_options").items()) c.extra_options[key] = val;
    return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    auto resolve = [&](const std::string& p) -> fs::path {
        fs::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    ExperimentConfig cfg;
    try {
        const auto& grid = j.at("grid");
        cfg.n_values = grid.at("n").get<std::vector<int>>();
        for (const auto& t : grid.at("theta"))
            cfg.thetas.push_back(Fraction::parse(t.get<std::string>()));
        if (grid.contains("k")) {
            const auto& k = grid.at("k");
            if (k.is_number_integer())
                cfg.k_fixed = k.get<int>();
            else if (!(k.is_string() && (k.get<std::string>() == "half-n" ||
                                         k.get<std::string>() == "half_n")))
                throw ConfigError("grid.k must be an integer or \"half-n\"");
        }
        cfg.samples_per_cell = j.value("samples_per_cell", 5);
        for (const auto& p : j.at("pools")) cfg.pool_paths.push_back(resolve(p.get<std::string>()));
        for (const auto& mj : j.at("models")) {
            ModelSpec spec;
            spec.name = mj.at("name").get<std::string>();
            if (mj.contains("mock"))
                spec.mock = mock_behavior_from_name(mj.at("mock").get<std::string>());
            else
                spec.client = client_from_json(mj);
            cfg.models.push_back(std::move(spec));
        }
        cfg.out_dir = resolve(j.value("out", std::string{"out"}));
        cfg.master_seed = j.value("master_seed", std::uint64_t{0});
        cfg.parallelism = j.value("parallelism", 4);
        cfg.provider_failure_threshold = j.value("provider_failure_threshold", 0.5);
        if (j.contains("templates")) {
            const auto& t = j.at("templates");
            if (t.contains("task"))
                cfg.task_template = read_text_file(resolve(t.at("task").get<std::string>()));
            if (t.contains("judge"))
                cfg.judge_template = read_text_file(resolve(t.at("judge").get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (cfg.n_values.empty() || cfg.thetas.empty())
        throw ConfigError(path.string() + ": grid must list at least one n and one theta");
    if (cfg.pool_paths.empty()) throw ConfigError(path.string() + ": no pools configured");
    if (cfg.models.empty()) throw ConfigError(path.string() + ": no models configured");
    if (cfg.samples_per_cell < 1) throw ConfigError("samples_per_cell must be >= 1");
    return cfg;
}

// ---------------------------------------------------------------------------
// manifest

void Manifest::save(const fs::path& path) const {
    json arr = json::array();
    for (const auto& e : entries)
        arr.push_back(json{{"file", e.file},
                           {"pool_id", e.pool_id},
                           {"n", e.n},
                           {"theta", e.theta},
                           {"k", e.k},
                           {"sample_index", e.sample_index},
                           {"seed", e.seed}});
    write_text_file(path, canonical_dump(json{{"schema_version", kSchemaVersion},
                                              {"instances", arr}}));
}

Manifest Manifest::load(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    Manifest m;
    for (const auto& ej : j.at("instances")) {
        ManifestEntry e;
        e.file = ej.at("file").get<std::string>();
        e.pool_id = ej.at("pool_id").get<std::string>();
        e.n = ej.at("n").get<int>();
        e.theta = ej.at("theta").get<std::string>();
        e.k = ej.at("k").get<int>();
        e.sample_index = ej.at("sample_index").get<int>();
        e.seed = ej.at("seed").get<std::uint64_t>();
        m.entries.push_back(std::move(e));
    }
    return m;
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& pool_id, int n,
                          const std::string& theta, int sample_index) {
    std::string key = std::to_string(master) + "|" + pool_id + "|" + std::to_string(n) + "|" +
                      theta + "|" + std::to_string(sample_index);
    return fnv1a_str(key);
}

// ---------------------------------------------------------------------------
// generate

static std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '-';
    return out;
}

static std::string instance_stem(const std::string& pool_id, int n, const Fraction& theta,
                                 int sample) {
    return sanitize(pool_id) + "_n" + std::to_string(n) + "_t" + std::to_string(theta.num) + "of" +
           std::to_string(theta.den) + "_s" + std::to_string(sample);
}

Manifest cmd_generate(const ExperimentConfig& cfg) {
    Manifest manifest;
    for (const auto& pool_path : cfg.pool_paths) {
        auto pool = load_pool(pool_path);
        const std::string pool_id =
            pool.seed_doc_id.empty() ? pool_path.stem().string() : pool.seed_doc_id;
        const int h = default_capacity(static_cast<int>(pool.sections.size()));

        for (int n : cfg.n_values) {
            for (const auto& theta : cfg.thetas) {
                const int k = cfg.k_for(n);
                GenerationConfig gen{n, k, theta, h, 0};
                try {
                    validate_config(gen, pool);
                } catch (const ConfigError& e) {
                    throw ConfigError("cell (pool=" + pool_id + ", n=" + std::to_string(n) +
                                      ", theta=" + theta.str() + ", k=" + std::to_string(k) +
                                      "): " + e.what());
                }
                for (int i = 0; i < cfg.samples_per_cell; ++i) {
                    gen.rng_seed = derive_seed(cfg.master_seed, pool_id, n, theta.str(), i);
                    auto instance = build_instance(pool, gen);
                    auto report = validate_instance(instance);
                    if (!report.ok())
                        throw InvariantViolation("generated instance failed validation: " +
                                                 report.violations.front().message);
                    const std::string rel =
                        "instances/" + instance_stem(pool_id, n, theta, i) + ".json";
                    save_instance(instance, cfg.out_dir / rel);
                    manifest.entries.push_back(
                        {rel, pool_id, n, theta.str(), k, i, gen.rng_seed});
                }
            }
        }
    }
    manifest.save(cfg.out_dir / "instances" / "manifest.json");
    return manifest;
}

// ---------------------------------------------------------------------------
// run

static fs::path raw_path(const ExperimentConfig& cfg, const std::string& model,
                         const std::string& stem, const std::string& hash) {
    return cfg.out_dir / "raw" / sanitize(model) / (stem + "." + hash + ".txt");
}

static fs::path prediction_path(const ExperimentConfig& cfg, const std::string& model,
                                const std::string& stem) {
    return cfg.out_dir / "predictions" / sanitize(model) / (stem + ".json");
}

static std::string entry_stem(const ManifestEntry& e) {
    return fs::path(e.file).stem().string();
}

RunSummary cmd_run(const ExperimentConfig& cfg, const Manifest& manifest, bool resume) {
    struct Task {
        const ManifestEntry* entry;
        const ModelSpec* model;
    };
    std::vector<Task> tasks;
    for (const auto& e : manifest.entries)
        for (const auto& m : cfg.models) tasks.push_back({&e, &m});

    const std::string task_template =
        cfg.task_template.empty() ? default_task_template() : cfg.task_template;

    HttpProvider http;
    RunSummary summary;
    summary.total_pairs = static_cast<int>(tasks.size());
    std::mutex mu;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const auto& task = tasks[i];
            const std::string stem = entry_stem(*task.entry);
            try {
                auto instance = load_instance(cfg.out_dir / task.entry->file);
                auto prompt = render_task_prompt(instance, PromptTemplate{task_template});
                auto hash = prompt_hash(prompt);
                auto rawp = raw_path(cfg, task.model->name, stem, hash);
                auto predp = prediction_path(cfg, task.model->name, stem);
                if (resume && fs::exists(rawp) && fs::exists(predp)) {
                    std::lock_guard lock(mu);
                    ++summary.skipped;
                    continue;
                }

                std::unique_ptr<MockProvider> mock;
                Provider* provider = &http;
                if (task.model->mock) {
                    mock = std::make_unique<MockProvider>(*task.model->mock, &instance);
                    provider = mock.get();
                }

                auto response = provider->complete(task.model->client, prompt);
                auto predictions = parse_predictions(response.text, instance.config.n);
                if (predictions.parse_status == ParseStatus::failed) {
                    // one re-request, then give up on this pair's parse
                    response = provider->complete(task.model->client, prompt);
                    predictions = parse_predictions(response.text, instance.config.n);
                }
                predictions.usage = response.usage;

                write_text_file(rawp, response.text);
                write_text_file(predp, canonical_dump(to_json(predictions)));
                std::lock_guard lock(mu);
                ++summary.completed;
            } catch (const std::exception& e) {
                write_text_file(prediction_path(cfg, task.model->name, stem + ".error"),
                                std::string(e.what()) + "\n");
                std::lock_guard lock(mu);
                ++summary.failed;
            }
        }
    };

    const int threads = std::max(1, cfg.parallelism);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return summary;
}

// ---------------------------------------------------------------------------
// score

static PredictionSet load_predictions(const fs::path& path) {
    return predictions_from_json(json::parse(read_text_file(path)));
}

AggregateReport cmd_score(const ExperimentConfig& cfg, const Manifest& manifest) {
    std::vector<std::pair<CellKey, InstanceScore>> scores;
    std::vector<std::pair<CellKey, TokenUsage>> usages;

    for (const auto& e : manifest.entries) {
        auto instance = load_instance(cfg.out_dir / e.file);
        const std::string stem = entry_stem(e);
        for (const auto& m : cfg.models) {
            auto predp = prediction_path(cfg, m.name, stem);
            if (!fs::exists(predp)) continue;  // errored or unfinished pair
            auto predictions = load_predictions(predp);
            auto score = score_instance(predictions, instance.ground_truth, instance.config.n);
            write_text_file(cfg.out_dir / "scores" / sanitize(m.name) / (stem + ".json"),
                            canonical_dump(to_json(score)));
            CellKey key{e.n, e.theta, m.name};
            scores.emplace_back(key, std::move(score));
            usages.emplace_back(key, predictions.usage);
        }
    }
    if (scores.empty()) throw EmptyCell("no scored pairs; run cmd_run first");

    auto report = aggregate(scores);
    write_text_file(cfg.out_dir / "reports" / "aggregate.json", canonical_dump(to_json(report)));
    write_text_file(cfg.out_dir / "reports" / "tokens.json",
                    canonical_dump(to_json(token_stats(usages))));
    return report;
}

// ---------------------------------------------------------------------------
// analyze

void cmd_analyze(const ExperimentConfig& cfg, const Manifest& manifest) {
    json per_cell = json::array();
    json items = json::array();
    CategoryDistribution overall;

    for (const auto& m : cfg.models) {
        std::map<std::pair<int, std::string>, CategoryDistribution> cells;
        for (const auto& e : manifest.entries) {
            auto predp = prediction_path(cfg, m.name, entry_stem(e));
            if (!fs::exists(predp)) continue;
            auto instance = load_instance(cfg.out_dir / e.file);
            auto predictions = load_predictions(predp);
            auto dist = error_distribution({{&predictions, &instance}});
            auto& cell = cells[{e.n, e.theta}];
            for (const auto& [cat, count] : dist.counts) {
                cell.counts[cat] += count;
                overall.counts[cat] += count;
            }
            cell.total += dist.total;
            overall.total += dist.total;
            for (const auto& item : categorize_all(predictions, instance)) {
                if (item.category == ErrorCategory::correct) continue;
                items.push_back(json{{"model", m.name},
                                     {"instance", e.file},
                                     {"doc_id", item.doc_id},
                                     {"feature", item.feature},
                                     {"category", category_name(item.category)}});
            }
        }
        for (auto& [key, dist] : cells) {
            if (dist.total > 0)
                for (const auto& [cat, count] : dist.counts)
                    dist.fractions[cat] =
                        static_cast<double>(count) / static_cast<double>(dist.total);
            json c = to_json(dist);
            c["model"] = m.name;
            c["n"] = key.first;
            c["theta"] = key.second;
            per_cell.push_back(c);
        }
    }
    if (overall.total > 0)
        for (const auto& [cat, count] : overall.counts)
            overall.fractions[cat] = static_cast<double>(count) / static_cast<double>(overall.total);

    write_text_file(cfg.out_dir / "reports" / "error_analysis.json",
                    canonical_dump(json{{"schema_version", kSchemaVersion},
                                        {"overall", to_json(overall)},
                                        {"per_cell", per_cell},
                                        {"false_positives", items}}));
}

// ---------------------------------------------------------------------------
// mitigate

void cmd_mitigate(const ExperimentConfig& cfg, const Manifest& manifest,
                  const std::string& judge_name) {
    const ModelSpec* judge_model = nullptr;
    if (judge_name != "oracle") {
        for (const auto& m : cfg.models)
            if (m.name == judge_name) judge_model = &m;
        if (!judge_model) throw ConfigError("unknown judge model: " + judge_name);
        if (judge_model->mock)
            throw ConfigError("mock roster entries cannot act as mitigation judge; use 'oracle'");
    }
    const std::string judge_template =
        cfg.judge_template.empty() ? default_judge_template() : cfg.judge_template;

    HttpProvider http;
    json summary = json::array();
    for (const auto& e : manifest.entries) {
        auto instance = load_instance(cfg.out_dir / e.file);
        const std::string stem = entry_stem(e);
        for (const auto& m : cfg.models) {
            auto predp = prediction_path(cfg, m.name, stem);
            if (!fs::exists(predp)) continue;
            auto predictions = load_predictions(predp);

            Judge judge;
            if (judge_model)
                judge = make_llm_judge(http, judge_model->client, instance, judge_template);
            else
                judge = [&instance](const std::string& f) {
                    return oracle_judge(f, instance) ? JudgeVerdict::distinctive
                                                     : JudgeVerdict::not_distinctive;
                };

            auto result = mitigate(predictions, instance, judge);
            auto before = score_instance(predictions, instance.ground_truth, instance.config.n);
            auto after =
                score_instance(result.filtered, instance.ground_truth, instance.config.n);

            auto dir = cfg.out_dir / "mitigated" / sanitize(m.name);
            write_text_file(dir / (stem + ".json"), canonical_dump(to_json(result.filtered)));
            write_text_file(dir / (stem + ".scores.json"),
                            canonical_dump(json{{"before", to_json(before)},
                                                {"after", to_json(after)},
                                                {"judge_calls", result.judge_calls},
                                                {"flagged", result.flagged.size()}}));
            summary.push_back(json{{"model", m.name},
                                   {"instance", e.file},
                                   {"f1_before", before.f1},
                                   {"f1_after", after.f1},
                                   {"precision_before", before.precision},
                                   {"precision_after", after.precision},
                                   {"recall_before", before.recall},
                                   {"recall_after", after.recall}});
        }
    }
    write_text_file(cfg.out_dir / "reports" / "mitigation.json",
                    canonical_dump(json{{"schema_version", kSchemaVersion},
                                        {"judge", judge_name},
                                        {"pairs", summary}}));
}

// ---------------------------------------------------------------------------
// report

static std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

void cmd_report(const ExperimentConfig& cfg, const Manifest& manifest) {
    // pool id -> domain label, for the overall table's columns
    std::map<std::string, std::string> pool_domain;
    for (const auto& pool_path : cfg.pool_paths) {
        auto pool = load_pool(pool_path);
        const std::string pool_id =
            pool.seed_doc_id.empty() ? pool_path.stem().string() : pool.seed_doc_id;
        pool_domain[pool_id] = domain_name(pool.domain);
    }

    struct Acc {
        double sum = 0;
        int n = 0;
    };
    // (model, domain) -> per-cell f1 means, cells keyed by (pool, n, theta)
    std::map<std::pair<std::string, std::string>, std::map<std::string, Acc>> domain_cells;
    std::map<CellKey, Acc> series;                 // per (n, theta, model) f1
    std::vector<std::pair<CellKey, TokenUsage>> usages;

    for (const auto& e : manifest.entries) {
        auto instance = load_instance(cfg.out_dir / e.file);
        const std::string stem = entry_stem(e);
        const std::string domain =
            pool_domain.count(e.pool_id) ? pool_domain.at(e.pool_id) : "custom";
        for (const auto& m : cfg.models) {
            auto predp = prediction_path(cfg, m.name, stem);
            if (!fs::exists(predp)) continue;
            auto predictions = load_predictions(predp);
            auto score = score_instance(predictions, instance.ground_truth, instance.config.n);

            const std::string cell_id = e.pool_id + "|" + std::to_string(e.n) + "|" + e.theta;
            auto& acc = domain_cells[{m.name, domain}][cell_id];
            acc.sum += score.f1;
            ++acc.n;

            CellKey key{e.n, e.theta, m.name};
            series[key].sum += score.f1;
            ++series[key].n;
            usages.emplace_back(key, predictions.usage);
        }
    }
    if (series.empty()) throw EmptyCell("nothing to report; run cmd_run first");

    // overall table: one row per model, one column per pool domain,
    // unweighted average over that domain's cells
    std::set<std::string> domains;
    for (const auto& [key, cells] : domain_cells) domains.insert(key.second);
    std::ostringstream overall;
    overall << "model";
    for (const auto& d : domains) overall << "," << csv_escape(d);
    overall << "\n";
    for (const auto& m : cfg.models) {
        overall << csv_escape(m.name);
        for (const auto& d : domains) {
            auto it = domain_cells.find({m.name, d});
            if (it == domain_cells.end() || it->second.empty()) {
                overall << ",";
                continue;
            }
            double sum = 0;
            for (const auto& [cell, acc] : it->second) sum += acc.sum / acc.n;
            overall << "," << sum / static_cast<double>(it->second.size());
        }
        overall << "\n";
    }
    write_text_file(cfg.out_dir / "reports" / "table_overall.csv", overall.str());

    std::ostringstream f1s;
    f1s << "model,n,theta,mean_f1,sample_count\n";
    for (const auto& [key, acc] : series)
        f1s << csv_escape(key.model) << "," << key.n << "," << csv_escape(key.theta) << ","
            << acc.sum / acc.n << "," << acc.n << "\n";
    write_text_file(cfg.out_dir / "reports" / "f1_series.csv", f1s.str());

    auto tokens = token_stats(usages);
    std::ostringstream toks;
    toks << "model,n,theta,kind,mean_output_tokens,sample_count\n";
    for (const auto& [key, stats] : tokens.per_cell) {
        if (stats.mean_output_exact)
            toks << csv_escape(key.model) << "," << key.n << "," << csv_escape(key.theta)
                 << ",exact," << *stats.mean_output_exact << "," << stats.exact_count << "\n";
        if (stats.mean_output_estimated)
            toks << csv_escape(key.model) << "," << key.n << "," << csv_escape(key.theta)
                 << ",estimated," << *stats.mean_output_estimated << "," << stats.estimated_count
                 << "\n";
    }
    write_text_file(cfg.out_dir / "reports" / "token_series.csv", toks.str());
}

}  // namespace difbench
