#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "memloop/errors.hpp"
#include "memloop/eval_metrics.hpp"
#include "memloop/llm_gateway.hpp"
#include "memloop/prompts.hpp"
#include "memloop/scenario.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using namespace memloop;

namespace {

std::string random_sentence(std::mt19937& rng, int min_words, int max_words) {
    static const char* kVocab[] = {"blue", "car",  "dance", "studio", "plan",  "river", "hard",
                                   "work", "just", "do",    "it",     "gina",  "jon",   "space",
                                   "a",    "the",  "an",    "on",     "friend", "music"};
    std::uniform_int_distribution<int> length(min_words, max_words);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kVocab) - 1);
    int words = length(rng);
    std::string out;
    for (int i = 0; i < words; ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += kVocab[pick(rng)];
    }
    return out;
}

} // namespace

TEST_CASE("normalize_text applies the stated rules") {
    CHECK(normalize_text("The blue Car!") == std::vector<std::string>{"blue", "car"});
    CHECK(normalize_text("") == std::vector<std::string>{});
    CHECK(normalize_text("Just do it!") == std::vector<std::string>{"just", "do", "it"});
    CHECK(normalize_text("  a  the an  ") == std::vector<std::string>{});
    CHECK(normalize_text("Don't stop,now") == std::vector<std::string>{"dont", "stopnow"});
}

TEST_CASE("f1_score base cases") {
    CHECK(f1_score("paris", "paris") == doctest::Approx(1.0));
    CHECK(f1_score("", "paris") == doctest::Approx(0.0));
    CHECK(f1_score("paris", "") == doctest::Approx(0.0));
    CHECK(f1_score("", "") == doctest::Approx(1.0));
}

TEST_CASE("f1_score hand-derived overlap cases") {
    // A 6-token gold gives precision 1, recall 1/3, F1 exactly 0.5.
    CHECK(f1_score("rehearsing hard", "rehearsing hard and working on plans") ==
          doctest::Approx(0.5).epsilon(1e-12));
    // The longer 7-token gold sentence; checked against the oracle.
    std::string pred = "rehearsing hard";
    std::string gold = "rehearsing hard and working on business plans";
    CHECK(f1_score(pred, gold) == doctest::Approx(oracle::f1(pred, gold)).epsilon(1e-12));
    CHECK(f1_score(pred, gold) == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("bleu1 hand-derived cases") {
    CHECK(bleu1("just do it", "just do it") == doctest::Approx(1.0));
    // p1 = 1, BP = exp(1 - 6/2) = exp(-2).
    CHECK(bleu1("rehearsing hard", "rehearsing hard and working on plans") ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(bleu1("rehearsing hard", "rehearsing hard and working on plans") ==
          doctest::Approx(0.135335).epsilon(1e-5));
    // Clipping: "blue" matches only once against the gold.
    CHECK(bleu1("blue blue car", "blue car") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(bleu1("", "paris") == doctest::Approx(0.0));
    CHECK(bleu1("zebra", "paris") == doctest::Approx(0.0)); // zero overlap, no smoothing
}

TEST_CASE("bleu1 is not symmetric (witness pair)") {
    double forward = bleu1("blue blue car", "blue car");
    double backward = bleu1("blue car", "blue blue car");
    CHECK(forward == doctest::Approx(2.0 / 3.0));
    CHECK(backward == doctest::Approx(std::exp(1.0 - 3.0 / 2.0)).epsilon(1e-12));
    CHECK(forward != backward);
}

TEST_CASE("f1_score is exactly symmetric") {
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        auto a = random_sentence(rng, 0, 10);
        auto b = random_sentence(rng, 0, 10);
        CHECK(f1_score(a, b) == f1_score(b, a));
    }
}

TEST_CASE("f1 and bleu1 match the independent oracles on randomized pairs") {
    std::mt19937 rng(123);
    for (int i = 0; i < 300; ++i) {
        auto a = random_sentence(rng, 0, 12);
        auto b = random_sentence(rng, 0, 12);
        CHECK(std::abs(f1_score(a, b) - oracle::f1(a, b)) < 1e-9);
        CHECK(std::abs(bleu1(a, b) - oracle::bleu1(a, b)) < 1e-9);
    }
}

TEST_CASE("bleu1 never exceeds unigram precision") {
    std::mt19937 rng(99);
    for (int i = 0; i < 200; ++i) {
        auto a = random_sentence(rng, 1, 10);
        auto b = random_sentence(rng, 1, 10);
        double score = bleu1(a, b);
        CHECK(score <= 1.0 + 1e-12);
        CHECK(score >= 0.0);
    }
}

TEST_CASE("pass_rate counts correct verdicts") {
    auto verdict = [](bool correct) {
        Verdict v;
        v.correct = correct;
        v.defect = correct ? "" : "missing";
        return v;
    };
    CHECK(pass_rate({verdict(true), verdict(true)}) == doctest::Approx(1.0));
    CHECK(pass_rate({verdict(false), verdict(false)}) == doctest::Approx(0.0));
    CHECK(pass_rate({verdict(true), verdict(true), verdict(false)}) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK_THROWS_AS(pass_rate({}), Error);
}

TEST_CASE("build_report single row and empty rows") {
    {
        std::vector<MetricRow> rows = {{Category::temporal, "paris", "paris", std::nullopt}};
        auto report = build_report(rows);
        CHECK(report.overall.count == 1);
        CHECK(report.overall.f1_mean == doctest::Approx(1.0));
        CHECK(report.overall.bleu1_mean == doctest::Approx(1.0));
        CHECK(report.per_category.size() == 1);
        CHECK(report.per_category.at(Category::temporal).count == 1);
        CHECK_FALSE(report.pass_rate_value.has_value());
    }
    {
        auto report = build_report({});
        CHECK(report.overall.count == 0);
        CHECK(report.per_category.empty());
    }
}

TEST_CASE("build_report four categories and overall micro mean") {
    std::vector<MetricRow> rows = {
        {Category::multi_hop, "blue car", "blue car", std::nullopt},
        {Category::temporal, "blue car", "red boat", std::nullopt},
        {Category::open_domain, "just do it", "just do it now", std::nullopt},
        {Category::single_hop, "paris", "paris", std::nullopt},
    };
    auto report = build_report(rows);
    CHECK(report.per_category.size() == 4);
    double expected = 0.0;
    for (const auto& row : rows) {
        expected += f1_score(row.predicted, row.gold);
    }
    expected /= 4.0;
    CHECK(report.overall.count == 4);
    CHECK(report.overall.f1_mean == doctest::Approx(expected).epsilon(1e-12));
    for (const auto& [category, stats] : report.per_category) {
        (void)category;
        CHECK(stats.count == 1);
    }
}

TEST_CASE("report means are permutation invariant (exactly)") {
    std::mt19937 rng(17);
    std::vector<MetricRow> rows;
    for (int i = 0; i < 40; ++i) {
        rows.push_back({static_cast<Category>(i % 5), random_sentence(rng, 1, 8),
                        random_sentence(rng, 1, 8), std::nullopt});
    }
    auto report_a = build_report(rows);
    std::shuffle(rows.begin(), rows.end(), rng);
    auto report_b = build_report(rows);
    CHECK(report_a.overall.f1_mean == report_b.overall.f1_mean);
    CHECK(report_a.overall.bleu1_mean == report_b.overall.bleu1_mean);
    CHECK(report_a.overall_macro.f1_mean == report_b.overall_macro.f1_mean);
}

TEST_CASE("score_rows parallel kernel equals serial reference") {
    std::mt19937 rng(23);
    std::vector<MetricRow> rows;
    for (int i = 0; i < 500; ++i) {
        rows.push_back({Category::other, random_sentence(rng, 0, 10),
                        random_sentence(rng, 0, 10), std::nullopt});
    }
    CHECK(score_rows(rows) == score_rows_serial(rows));
}

TEST_CASE("llm_judge parses scripted verdicts") {
    ScenarioBackend backend;
    LlmGateway gateway(backend);
    auto prompts = PromptSet::defaults();

    CHECK(llm_judge("Q?", "Just do it!", "Just do it!", gateway, prompts) == 1);
    CHECK(llm_judge("What phrase?", "Just do it!", "to just do it", gateway, prompts) == 1);
    CHECK(llm_judge("What is Jon working on?",
                    "Jon has been rehearsing hard and working on business plans.",
                    "I cannot answer this question based on the available memory.", gateway,
                    prompts) == 0);
}

TEST_CASE("llm_judge surfaces unparseable verdicts as errors") {
    testutil::StaticBackend backend;
    backend.responses[RoleTag::llm_judge] = "maybe";
    LlmGateway gateway(backend);
    auto prompts = PromptSet::defaults();
    CHECK_THROWS_AS(llm_judge("Q?", "gold", "predicted", gateway, prompts), Error);
}

TEST_CASE("render_report_table lists canonical columns in order") {
    std::vector<MetricRow> rows = {
        {Category::multi_hop, "x", "x", 1},
        {Category::temporal, "x", "x", 1},
        {Category::open_domain, "x", "x", 0},
        {Category::single_hop, "x", "x", 1},
    };
    auto table = render_report_table(build_report(rows));
    auto pos_multi = table.find("Multi-Hop");
    auto pos_temporal = table.find("Temporal");
    auto pos_open = table.find("Open-Domain");
    auto pos_single = table.find("Single-Hop");
    auto pos_average = table.find("Average");
    REQUIRE(pos_multi != std::string::npos);
    CHECK(pos_multi < pos_temporal);
    CHECK(pos_temporal < pos_open);
    CHECK(pos_open < pos_single);
    CHECK(pos_single < pos_average);
    CHECK(table.find("Judge") != std::string::npos);
}
