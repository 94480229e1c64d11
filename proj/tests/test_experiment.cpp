#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "difbench/experiment.hpp"
#include "difbench/generator.hpp"
#include "difbench/json_io.hpp"
#include "test_support.hpp"

using namespace difbench;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig small_config(const fs::path& dir) {
    auto pool = difbench::test::resume_pool("resume-A");
    save_pool(pool, dir / "pool.json");

    ExperimentConfig cfg;
    cfg.n_values = {10, 20};
    cfg.thetas = {Fraction::parse("10%"), Fraction::parse("20%")};
    cfg.samples_per_cell = 2;
    cfg.pool_paths = {dir / "pool.json"};
    cfg.out_dir = dir / "out";
    cfg.master_seed = 99;
    cfg.parallelism = 2;
    ModelSpec mock;
    mock.name = "mock-gold";
    mock.mock = MockBehavior::gold_echo;
    cfg.models = {mock};
    return cfg;
}

}  // namespace

TEST_CASE("seed fan-out is stable and cell-local") {
    auto s = derive_seed(1, "p", 10, "1/10", 0);
    CHECK(s == derive_seed(1, "p", 10, "1/10", 0));
    CHECK(s != derive_seed(1, "p", 10, "1/10", 1));
    CHECK(s != derive_seed(1, "p", 20, "1/10", 0));
    CHECK(s != derive_seed(2, "p", 10, "1/10", 0));
    CHECK(s != derive_seed(1, "q", 10, "1/10", 0));
}

TEST_CASE("experiment config file loading") {
    TempDir dir("difbench_cfgload");
    save_pool(difbench::test::resume_pool(), dir.path / "pool.json");
    json cfg{{"grid", json{{"n", json::array({10, 20, 40})},
                           {"theta", json::array({"10%", "20%"})},
                           {"k", "half-n"}}},
             {"samples_per_cell", 3},
             {"pools", json::array({"pool.json"})},
             {"models", json::array({json{{"name", "gold"}, {"mock", "gold-echo"}},
                                     json{{"name", "real"},
                                          {"endpoint", "https://api.example.com"},
                                          {"model_id", "model-x"},
                                          {"api_key_env", "EXAMPLE_KEY"}}})},
             {"out", "runs"},
             {"master_seed", 7}};
    write_text_file(dir.path / "exp.json", cfg.dump());

    auto loaded = ExperimentConfig::load(dir.path / "exp.json");
    CHECK(loaded.n_values == std::vector<int>{10, 20, 40});
    CHECK(loaded.k_half_n());
    CHECK(loaded.k_for(10) == 5);  // floor(n/2)
    CHECK(loaded.k_for(40) == 20);
    CHECK(loaded.samples_per_cell == 3);
    CHECK(loaded.out_dir == dir.path / "runs");  // relative to the config file
    CHECK(loaded.models.size() == 2);
    CHECK(loaded.models[0].mock.has_value());
    CHECK(loaded.models[1].client.model_id == "model-x");

    SUBCASE("fixed k variant") {
        cfg["grid"]["k"] = 4;
        write_text_file(dir.path / "exp2.json", cfg.dump());
        auto fixed = ExperimentConfig::load(dir.path / "exp2.json");
        CHECK_FALSE(fixed.k_half_n());
        CHECK(fixed.k_for(40) == 4);
    }
}

TEST_CASE("cmd_generate writes the full grid deterministically") {
    TempDir dir("difbench_gen");
    auto cfg = small_config(dir.path);
    cfg.n_values = {10, 20, 40};
    cfg.samples_per_cell = 5;

    auto manifest = cmd_generate(cfg);
    CHECK(manifest.entries.size() == 3 * 2 * 5);  // n x theta x samples
    for (const auto& e : manifest.entries) {
        CHECK(fs::exists(cfg.out_dir / e.file));
        CHECK(e.k == e.n / 2);
    }
    auto reloaded = Manifest::load(cfg.out_dir / "instances" / "manifest.json");
    CHECK(reloaded.entries.size() == manifest.entries.size());

    SUBCASE("rerun is byte-identical") {
        std::map<std::string, std::string> before;
        for (const auto& e : manifest.entries)
            before[e.file] = read_text_file(cfg.out_dir / e.file);
        cmd_generate(cfg);
        for (const auto& [file, content] : before)
            CHECK(read_text_file(cfg.out_dir / file) == content);
    }
    SUBCASE("degenerate cell is rejected with coordinates") {
        cfg.thetas.push_back(Fraction::parse("2.5%"));  // floor(10 * 0.025) = 0
        try {
            cmd_generate(cfg);
            FAIL("expected DegenerateThreshold via ConfigError");
        } catch (const ConfigError& e) {
            std::string msg = e.what();
            CHECK(msg.find("n=10") != std::string::npos);
            CHECK(msg.find("1/40") != std::string::npos);
        }
    }
}

TEST_CASE("gold-echo pipeline scores 1.0 everywhere") {
    TempDir dir("difbench_pipeline");
    auto cfg = small_config(dir.path);
    auto manifest = cmd_generate(cfg);

    auto summary = cmd_run(cfg, manifest, false);
    CHECK(summary.completed == static_cast<int>(manifest.entries.size()));
    CHECK(summary.failed == 0);

    auto report = cmd_score(cfg, manifest);
    CHECK(report.sample_count == static_cast<int>(manifest.entries.size()));
    for (const auto& [key, stats] : report.per_cell) {
        CHECK(stats.mean_f1 == doctest::Approx(1.0));
        CHECK(stats.std_f1 == doctest::Approx(0.0));
    }

    SUBCASE("resumed run skips every archived pair") {
        auto second = cmd_run(cfg, manifest, true);
        CHECK(second.skipped == static_cast<int>(manifest.entries.size()));
        CHECK(second.completed == 0);
    }
    SUBCASE("analyze reports all-correct") {
        cmd_analyze(cfg, manifest);
        auto j = json::parse(read_text_file(cfg.out_dir / "reports" / "error_analysis.json"));
        CHECK(j.at("overall").at("fractions").at("correct").get<double>() ==
              doctest::Approx(1.0));
        CHECK(j.at("false_positives").empty());
    }
    SUBCASE("report emits csv tables") {
        cmd_report(cfg, manifest);
        auto overall = read_text_file(cfg.out_dir / "reports" / "table_overall.csv");
        CHECK(overall.find("model,resume") != std::string::npos);
        CHECK(overall.find("mock-gold,1") != std::string::npos);
        auto series = read_text_file(cfg.out_dir / "reports" / "f1_series.csv");
        CHECK(series.find("model,n,theta,mean_f1,sample_count") != std::string::npos);
        CHECK(series.find("mock-gold,10,1/10,1,2") != std::string::npos);
        CHECK(series.find("mock-gold,20,1/5,1,2") != std::string::npos);
        auto tokens = read_text_file(cfg.out_dir / "reports" / "token_series.csv");
        CHECK(tokens.find("estimated") != std::string::npos);
    }
}

TEST_CASE("malformed mock fails to parse without aborting the run") {
    TempDir dir("difbench_malformed");
    auto cfg = small_config(dir.path);
    cfg.models[0].name = "mock-bad";
    cfg.models[0].mock = MockBehavior::malformed;

    auto manifest = cmd_generate(cfg);
    auto summary = cmd_run(cfg, manifest, false);
    CHECK(summary.completed == static_cast<int>(manifest.entries.size()));

    int checked = 0;
    for (const auto& e : manifest.entries) {
        auto stem = fs::path(e.file).stem().string();
        auto p = predictions_from_json(json::parse(read_text_file(
            cfg.out_dir / "predictions" / "mock-bad" / (stem + ".json"))));
        CHECK(p.parse_status == ParseStatus::failed);
        CHECK(p.per_doc.empty());
        ++checked;
    }
    CHECK(checked == static_cast<int>(manifest.entries.size()));

    auto report = cmd_score(cfg, manifest);
    CHECK(report.mean_f1 == doctest::Approx(0.0));
}

TEST_CASE("mitigation with the oracle judge repairs the all-features mock") {
    TempDir dir("difbench_mitigate");
    auto cfg = small_config(dir.path);
    cfg.models[0].name = "mock-all";
    cfg.models[0].mock = MockBehavior::all_features;
    cfg.n_values = {10};
    cfg.thetas = {Fraction::parse("20%")};

    auto manifest = cmd_generate(cfg);
    cmd_run(cfg, manifest, false);
    cmd_mitigate(cfg, manifest, "oracle");

    auto j = json::parse(read_text_file(cfg.out_dir / "reports" / "mitigation.json"));
    REQUIRE(!j.at("pairs").empty());
    for (const auto& pair : j.at("pairs")) {
        CHECK(pair.at("recall_before").get<double>() == doctest::Approx(1.0));
        CHECK(pair.at("precision_before").get<double>() < 1.0);
        CHECK(pair.at("precision_after").get<double>() == doctest::Approx(1.0));
        CHECK(pair.at("f1_after").get<double>() == doctest::Approx(1.0));
    }

    SUBCASE("mock roster entries cannot act as judge") {
        CHECK_THROWS_AS(cmd_mitigate(cfg, manifest, "mock-all"), ConfigError);
        CHECK_THROWS_AS(cmd_mitigate(cfg, manifest, "nonexistent"), ConfigError);
    }
}
