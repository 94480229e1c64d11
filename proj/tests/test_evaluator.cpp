#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "difbench/evaluator.hpp"
#include "difbench/generator.hpp"
#include "difbench/text.hpp"
#include "test_support.hpp"

using namespace difbench;
using difbench::test::brute_force_score;
using difbench::test::corrupt_predictions;
using difbench::test::make_pool;
using difbench::test::resume_pool;

TEST_CASE("normalize_feature") {
    CHECK(normalize_feature("  NLP experience ") == "NLP experience");
    CHECK(normalize_feature("NLP experience") == "NLP experience");
    CHECK(normalize_feature("nlp experience") != normalize_feature("NLP experience"));
    // decomposed e + combining acute composes to the precomposed form
    CHECK(normalize_feature("re\x65\xcc\x81sum\x65\xcc\x81") == "re\xc3\xa9sum\xc3\xa9");
    CHECK(normalize_feature("  Punct.,;: kept!  ") == "Punct.,;: kept!");
}

static GroundTruth two_doc_truth() {
    GroundTruth truth;
    Feature a{"a", "S"}, b{"b", "S"};
    truth.distinctive = {a, b};
    truth.per_doc_gold[1] = {a, b};
    truth.per_doc_gold[2] = {};
    return truth;
}

TEST_CASE("score_instance basics") {
    auto truth = two_doc_truth();

    SUBCASE("exact predictions give perfect score") {
        PredictionSet p;
        p.per_doc[1] = {"a", "b"};
        auto s = score_instance(p, truth, 2);
        CHECK(s.tp == 2);
        CHECK(s.fp == 0);
        CHECK(s.fn == 0);
        CHECK(s.precision == doctest::Approx(1.0));
        CHECK(s.recall == doctest::Approx(1.0));
        CHECK(s.f1 == doctest::Approx(1.0));
    }
    SUBCASE("one hit, one spurious, one miss") {
        PredictionSet p;
        p.per_doc[1] = {"a", "c"};
        auto s = score_instance(p, truth, 2);
        CHECK(s.tp == 1);
        CHECK(s.fp == 1);
        CHECK(s.fn == 1);
        CHECK(s.f1 == doctest::Approx(0.5));
        CHECK(s.per_doc_detail.at(1).matched == std::vector<std::string>{"a"});
        CHECK(s.per_doc_detail.at(1).spurious == std::vector<std::string>{"c"});
        CHECK(s.per_doc_detail.at(1).missed == std::vector<std::string>{"b"});
    }
    SUBCASE("empty predictions against non-empty gold") {
        PredictionSet p;
        auto s = score_instance(p, truth, 2);
        CHECK(s.precision == 0.0);
        CHECK(s.recall == 0.0);
        CHECK(s.f1 == 0.0);
    }
    SUBCASE("duplicate predictions count once") {
        PredictionSet p;
        p.per_doc[1] = {"a", " a ", "a"};
        auto s = score_instance(p, truth, 2);
        CHECK(s.tp == 1);
        CHECK(s.fp == 0);
    }
}

TEST_CASE("scorer equals the brute-force oracle on random instances") {
    Rng meta(909);
    int cases = 0;
    while (cases < 500) {
        auto pool = make_pool(static_cast<int>(meta.uniform_int(1, 4)),
                              static_cast<int>(meta.uniform_int(3, 10)));
        int n = static_cast<int>(meta.uniform_int(2, 15));
        Fraction theta(meta.uniform_int(1, 50), 100);
        if (theta.floor_mul(n) < 1 || theta.floor_mul(n) + 1 > n) continue;
        int k = static_cast<int>(meta.uniform_int(
            1, std::min<std::int64_t>(static_cast<std::int64_t>(pool.size()) - 1, n)));
        GenerationConfig cfg{n, k, theta, static_cast<int>(meta.uniform_int(2, 12)), meta.next()};
        if (cfg.k > cfg.n * cfg.h) continue;
        BenchmarkInstance inst;
        try {
            inst = build_instance(pool, cfg);
        } catch (const DistinctivePlacementFailure&) {
            continue;  // tight capacity can legitimately refuse a config
        }
        auto preds = corrupt_predictions(inst, meta);

        auto fast = score_instance(preds, inst.ground_truth, n);
        auto slow = brute_force_score(preds, inst.ground_truth, n);
        REQUIRE(fast.tp == slow.tp);
        REQUIRE(fast.fp == slow.fp);
        REQUIRE(fast.fn == slow.fn);
        REQUIRE(fast.f1 == doctest::Approx(slow.f1).epsilon(1e-12));
        ++cases;
    }
}

TEST_CASE("scoring is invariant under document permutation") {
    auto inst = build_instance(resume_pool(), {8, 4, Fraction::parse("25%"), 24, 5});
    Rng rng(6);
    auto preds = corrupt_predictions(inst, rng);
    auto base = score_instance(preds, inst.ground_truth, 8);

    // rotate doc ids by one, consistently on both sides
    auto rotate = [&](int id) { return id % 8 + 1; };
    PredictionSet rotated_preds;
    for (const auto& [doc_id, feats] : preds.per_doc) rotated_preds.per_doc[rotate(doc_id)] = feats;
    GroundTruth rotated_truth = inst.ground_truth;
    rotated_truth.per_doc_gold.clear();
    for (const auto& [doc_id, gold] : inst.ground_truth.per_doc_gold)
        rotated_truth.per_doc_gold[rotate(doc_id)] = gold;

    auto permuted = score_instance(rotated_preds, rotated_truth, 8);
    CHECK(permuted.tp == base.tp);
    CHECK(permuted.fp == base.fp);
    CHECK(permuted.fn == base.fn);
}

TEST_CASE("monotonicity of corrections and noise") {
    auto inst = build_instance(resume_pool(), {8, 4, Fraction::parse("25%"), 24, 5});
    Rng rng(7);
    auto preds = corrupt_predictions(inst, rng);
    auto base = score_instance(preds, inst.ground_truth, 8);

    SUBCASE("adding a missed gold feature never decreases f1") {
        for (const auto& [doc_id, gold] : inst.ground_truth.per_doc_gold) {
            for (const auto& f : gold) {
                auto with = preds;
                with.per_doc[doc_id].push_back(f.text);
                auto s = score_instance(with, inst.ground_truth, 8);
                CHECK(s.f1 >= base.f1 - 1e-12);
            }
        }
    }
    SUBCASE("adding a spurious prediction never increases precision") {
        auto with = preds;
        with.per_doc[1].push_back("definitely-not-a-feature");
        auto s = score_instance(with, inst.ground_truth, 8);
        if (base.tp + base.fp > 0) CHECK(s.precision <= base.precision + 1e-12);
    }
}

TEST_CASE("aggregate") {
    auto score_with_f1 = [](double f1) {
        InstanceScore s;
        s.f1 = f1;
        s.precision = f1;
        s.recall = f1;
        return s;
    };
    CellKey cell_a{10, "1/5", "m"};
    CellKey cell_b{20, "1/5", "m"};

    SUBCASE("singleton cell") {
        auto r = aggregate({{cell_a, score_with_f1(0.5)}});
        CHECK(r.per_cell.at(cell_a).mean_f1 == doctest::Approx(0.5));
        CHECK(r.per_cell.at(cell_a).std_f1 == doctest::Approx(0.0));
        CHECK(r.sample_count == 1);
    }
    SUBCASE("population std over {0, 1}") {
        auto r = aggregate({{cell_a, score_with_f1(0.0)}, {cell_a, score_with_f1(1.0)}});
        CHECK(r.per_cell.at(cell_a).mean_f1 == doctest::Approx(0.5));
        CHECK(r.per_cell.at(cell_a).std_f1 == doctest::Approx(0.5));
    }
    SUBCASE("overall mean is unweighted over cells") {
        auto r = aggregate({{cell_a, score_with_f1(0.2)},
                            {cell_b, score_with_f1(0.4)},
                            {cell_b, score_with_f1(0.4)}});
        CHECK(r.mean_f1 == doctest::Approx(0.3));  // (0.2 + 0.4) / 2, not sample-weighted
    }
}

TEST_CASE("token stats") {
    CellKey cell{10, "1/5", "m"};

    SUBCASE("mean over exact counts") {
        auto r = token_stats({{cell, {5, 100, false}}, {cell, {5, 300, false}}});
        CHECK(r.per_cell.at(cell).mean_output_exact == doctest::Approx(200.0));
        CHECK_FALSE(r.per_cell.at(cell).mean_output_estimated.has_value());
    }
    SUBCASE("empty input reports no cells") {
        auto r = token_stats({});
        CHECK(r.per_cell.empty());
    }
    SUBCASE("exact and estimated are never pooled") {
        auto r = token_stats({{cell, {5, 100, false}}, {cell, {5, 900, true}}});
        CHECK(r.per_cell.at(cell).mean_output_exact == doctest::Approx(100.0));
        CHECK(r.per_cell.at(cell).mean_output_estimated == doctest::Approx(900.0));
        CHECK(r.per_cell.at(cell).exact_count == 1);
        CHECK(r.per_cell.at(cell).estimated_count == 1);
    }
}
