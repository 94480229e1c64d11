#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "difbench/core.hpp"
#include "difbench/json_io.hpp"
#include "difbench/rng.hpp"
#include "test_support.hpp"

using namespace difbench;
using difbench::test::make_pool;

TEST_CASE("fraction parsing") {
    CHECK(Fraction::parse("1/40") == Fraction(1, 40));
    CHECK(Fraction::parse("2.5%") == Fraction(1, 40));
    CHECK(Fraction::parse("0.05") == Fraction(1, 20));
    CHECK(Fraction::parse("10%") == Fraction(1, 10));
    CHECK(Fraction::parse("20%") == Fraction(1, 5));
    CHECK(Fraction::parse(" 0.20 ") == Fraction(1, 5));
    CHECK(Fraction(2, 80).str() == "1/40");
    CHECK_THROWS(Fraction::parse(""));
    CHECK_THROWS(Fraction::parse("abc"));
    CHECK_THROWS(Fraction(1, 0));
}

TEST_CASE("threshold instantiation for n=40 matches the count form") {
    auto pool = make_pool(6, 20);
    // 2.5%, 5%, 10%, 20% of 40 documents -> 1, 2, 4, 8
    const std::pair<const char*, int> cases[] = {
        {"2.5%", 1}, {"5%", 2}, {"10%", 4}, {"20%", 8}};
    for (const auto& [theta, expected] : cases) {
        GenerationConfig cfg{40, 20, Fraction::parse(theta), 24, 1};
        auto vc = validate_config(cfg, pool);
        CHECK(vc.max_distinctive_freq() == expected);
        CHECK(vc.min_common_freq() == expected + 1);
    }
}

TEST_CASE("validate_config rejects degenerate configurations") {
    auto pool = make_pool(2, 5);  // 10 features

    SUBCASE("floor(n*theta)=0") {
        GenerationConfig cfg{10, 3, Fraction::parse("2.5%"), 8, 1};
        CHECK_THROWS_AS(validate_config(cfg, pool), DegenerateThreshold);
    }
    SUBCASE("no legal common frequency") {
        // floor(4 * 9/10) = 3, min common = 4 = n is fine; theta = 1 is rejected upstream
        GenerationConfig cfg{4, 3, Fraction(9, 10), 8, 1};
        CHECK_NOTHROW(validate_config(cfg, pool));
        CHECK_THROWS_AS(validate_config({4, 3, Fraction(1, 1), 8, 1}, pool), ConfigError);
    }
    SUBCASE("pool too small") {
        GenerationConfig cfg{10, 10, Fraction::parse("20%"), 8, 1};
        CHECK_THROWS_AS(validate_config(cfg, pool), PoolTooSmall);
        cfg.k = 9;  // leaves exactly one common feature
        CHECK_NOTHROW(validate_config(cfg, pool));
    }
    SUBCASE("zero capacity") {
        GenerationConfig cfg{10, 3, Fraction::parse("20%"), 0, 1};
        CHECK_THROWS_AS(validate_config(cfg, pool), CapacityZero);
    }
}

TEST_CASE("validate_config accepts exactly floor(n*theta) in [1, n-1]") {
    auto pool = make_pool(4, 30);
    Rng rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        int n = static_cast<int>(rng.uniform_int(2, 80));
        Fraction theta(rng.uniform_int(1, 99), 100);
        auto floor_val = theta.floor_mul(n);
        GenerationConfig cfg{n, 3, theta, 10, 7};
        bool legal = floor_val >= 1 && floor_val + 1 <= n;
        if (legal)
            CHECK_NOTHROW(validate_config(cfg, pool));
        else
            CHECK_THROWS_AS(validate_config(cfg, pool), ConfigError);
    }
}

TEST_CASE("default_capacity is 4 per section") {
    CHECK(default_capacity(6) == 24);
    CHECK(default_capacity(1) == 4);
    CHECK(default_capacity(9) == 36);
    for (int s = 1; s < 50; ++s) {
        CHECK(default_capacity(s + 1) - default_capacity(s) == 4);  // exactly linear
    }
    CHECK_THROWS_AS(default_capacity(0), ConfigError);
}

TEST_CASE("pool invariants") {
    SUBCASE("duplicate (text, section)") {
        auto pool = make_pool(2, 3);
        pool.features.push_back(pool.features.front());
        CHECK_THROWS_AS(pool.check(), InvariantViolation);
    }
    SUBCASE("unknown section") {
        auto pool = make_pool(2, 3);
        pool.features.push_back(Feature{"stray", "Nonexistent"});
        CHECK_THROWS_AS(pool.check(), InvariantViolation);
    }
    SUBCASE("empty sections list") {
        FeaturePool pool;
        CHECK_THROWS_AS(pool.check(), InvariantViolation);
    }
    SUBCASE("whitespace-only feature text") {
        auto pool = make_pool(1, 1);
        pool.features.push_back(Feature{"   ", pool.sections[0]});
        CHECK_THROWS_AS(pool.check(), InvariantViolation);
    }
    SUBCASE("same text in two sections is allowed") {
        auto pool = make_pool(2, 1);
        pool.features.push_back(Feature{pool.features[0].text, pool.sections[1]});
        CHECK_NOTHROW(pool.check());
    }
}

TEST_CASE("pool save/load round trip") {
    auto pool = make_pool(3, 4, "seed-17", Domain::resume);
    auto path = std::filesystem::temp_directory_path() / "difbench_pool_rt.json";
    save_pool(pool, path);
    auto loaded = load_pool(path);
    CHECK(loaded.sections == pool.sections);
    CHECK(loaded.features == pool.features);
    CHECK(loaded.domain == pool.domain);
    CHECK(loaded.seed_doc_id == pool.seed_doc_id);
    std::filesystem::remove(path);
}

TEST_CASE("config json round trip keeps theta exact") {
    GenerationConfig cfg{40, 20, Fraction::parse("2.5%"), 24, 0xdeadbeefcafe1234ULL};
    auto j = to_json(cfg);
    CHECK(j.at("theta").get<std::string>() == "1/40");
    auto back = config_from_json(j);
    CHECK(back.theta == cfg.theta);
    CHECK(back.rng_seed == cfg.rng_seed);
}
