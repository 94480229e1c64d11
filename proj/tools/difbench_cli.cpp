// difbench command-line front end.
//
// Subcommands: synthesize, generate, run, score, analyze, mitigate, report.
// Exit codes: 0 success, 1 validation/config failure, 2 provider failure
// threshold exceeded.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "difbench/experiment.hpp"
#include "difbench/generator.hpp"
#include "difbench/json_io.hpp"
#include "difbench/synthesis.hpp"

namespace fs = std::filesystem;
using namespace difbench;

namespace {

ExperimentConfig load_config(const std::string& config_path, const std::string& out_override,
                             int parallelism_override) {
    auto cfg = ExperimentConfig::load(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (parallelism_override > 0) cfg.parallelism = parallelism_override;
    return cfg;
}

Manifest load_manifest(const ExperimentConfig& cfg) {
    return Manifest::load(cfg.out_dir / "instances" / "manifest.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DiFBench: synthetic benchmarks for distinctive feature mining"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    int parallelism = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file")->required();
        cmd->add_option("--out", out_override, "output directory (overrides config)");
        cmd->add_option("--parallelism", parallelism, "max concurrent provider calls");
    };

    // synthesize
    auto* synth = app.add_subcommand("synthesize", "build a feature pool from a seed document");
    std::string seed_path, pool_out, domain_str = "custom", tmpl_path, model_endpoint, model_id,
                             api_key_env;
    std::vector<std::string> section_labels;
    int candidates = 20;
    synth->add_option("--seed-doc", seed_path, "seed document (plain text)")->required();
    synth->add_option("--pool-out", pool_out, "output pool file")->required();
    synth->add_option("--domain", domain_str, "resume | news_summary | custom");
    synth->add_option("--sections", section_labels,
                      "section labels (required for news_summary/custom)");
    synth->add_option("--template", tmpl_path, "synthesis prompt template file");
    synth->add_option("--endpoint", model_endpoint, "chat-completions endpoint")->required();
    synth->add_option("--model", model_id, "model id")->required();
    synth->add_option("--api-key-env", api_key_env, "credential environment variable");
    synth->add_option("--candidates", candidates, "candidates per section");

    auto* gen = app.add_subcommand("generate", "build benchmark instances over the grid");
    add_common(gen);

    auto* run = app.add_subcommand("run", "query models for every instance");
    add_common(run);
    bool resume = false;
    std::vector<std::string> model_filter;
    std::string mock_behavior;
    run->add_flag("--resume", resume, "skip pairs already archived");
    run->add_option("--models", model_filter, "restrict to these roster names");
    run->add_option("--mock", mock_behavior,
                    "run a single ad-hoc mock model (gold-echo | all-features | fixed-noise | "
                    "malformed) instead of the roster");

    auto* score = app.add_subcommand("score", "score archived predictions");
    add_common(score);

    auto* analyze = app.add_subcommand("analyze", "categorize false positives");
    add_common(analyze);

    auto* mit = app.add_subcommand("mitigate", "verification pass over predictions");
    add_common(mit);
    std::string judge = "oracle";
    mit->add_option("--judge", judge, "'oracle' or a roster model name");

    auto* report = app.add_subcommand("report", "export CSV tables and series");
    add_common(report);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            SectionTemplate tmpl;
            auto domain = parse_domain(domain_str);
            if (domain == Domain::resume)
                tmpl = SectionTemplate::resume();
            else if (section_labels.empty())
                throw ConfigError("--sections is required for non-resume domains");
            else if (domain == Domain::news_summary)
                tmpl = SectionTemplate::news(section_labels);
            else
                tmpl = SectionTemplate::custom(section_labels);

            LlmClient client;
            client.endpoint = model_endpoint;
            client.model_id = model_id;
            client.api_key_env = api_key_env;
            HttpProvider provider;
            const std::string synth_template =
                tmpl_path.empty() ? default_synthesis_template() : read_text_file(tmpl_path);
            auto pool = build_feature_pool(read_text_file(seed_path),
                                           fs::path(seed_path).stem().string(), tmpl, provider,
                                           client, synth_template, candidates);
            save_pool(pool, pool_out);
            std::cout << "pool with " << pool.size() << " features -> " << pool_out << "\n";
            return 0;
        }

        auto cfg = load_config(config_path, out_override, parallelism);

        if (gen->parsed()) {
            auto manifest = cmd_generate(cfg);
            std::cout << manifest.entries.size() << " instances -> "
                      << (cfg.out_dir / "instances").string() << "\n";
        } else if (run->parsed()) {
            if (!mock_behavior.empty()) {
                ModelSpec spec;
                spec.name = "mock-" + mock_behavior;
                spec.mock = mock_behavior_from_name(mock_behavior);
                cfg.models = {spec};
            } else if (!model_filter.empty()) {
                std::vector<ModelSpec> kept;
                for (const auto& m : cfg.models)
                    for (const auto& name : model_filter)
                        if (m.name == name) kept.push_back(m);
                if (kept.empty()) throw ConfigError("--models matched no roster entry");
                cfg.models = std::move(kept);
            }
            auto summary = cmd_run(cfg, load_manifest(cfg), resume);
            std::cout << "pairs: " << summary.total_pairs << " completed: " << summary.completed
                      << " skipped: " << summary.skipped << " failed: " << summary.failed << "\n";
            if (summary.total_pairs > 0 &&
                static_cast<double>(summary.failed) / summary.total_pairs >
                    cfg.provider_failure_threshold)
                return 2;
        } else if (score->parsed()) {
            auto report_data = cmd_score(cfg, load_manifest(cfg));
            std::cout << "mean F1 " << report_data.mean_f1 << " over "
                      << report_data.sample_count << " scored pairs\n";
        } else if (analyze->parsed()) {
            cmd_analyze(cfg, load_manifest(cfg));
            std::cout << "error analysis -> "
                      << (cfg.out_dir / "reports" / "error_analysis.json").string() << "\n";
        } else if (mit->parsed()) {
            cmd_mitigate(cfg, load_manifest(cfg), judge);
            std::cout << "mitigation report -> "
                      << (cfg.out_dir / "reports" / "mitigation.json").string() << "\n";
        } else if (report->parsed()) {
            cmd_report(cfg, load_manifest(cfg));
            std::cout << "reports -> " << (cfg.out_dir / "reports").string() << "\n";
        }
    } catch (const ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
