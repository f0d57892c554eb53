#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ria/bench.hpp"
#include "support/checks.hpp"

using namespace ria;
using testing::raises;

namespace {

std::string corpus_text(const std::vector<ServiceDescriptor>& corpus) {
    std::ostringstream out;
    bench::write_corpus(out, corpus);
    return out.str();
}

}  // namespace

TEST_CASE("corpus generation is seeded and well formed") {
    bench::GenerateParams params;
    params.descriptor_count = 300;
    params.vocabulary = 40;
    params.seed = 42;

    auto corpus = bench::generate_corpus(params);
    REQUIRE(corpus.size() == 300);
    CHECK(corpus.front().id == "svc000000");
    CHECK(corpus.back().id == "svc000299");

    for (const auto& descriptor : corpus) {
        CHECK_NOTHROW(validate_descriptor(descriptor));
        // Own name plus two to four vocabulary draws, deduplicated.
        CHECK(descriptor.keywords.size() >= 2);
        CHECK(descriptor.keywords.size() <= 5);
        CHECK(std::find(descriptor.keywords.begin(), descriptor.keywords.end(),
                        descriptor.id) != descriptor.keywords.end());
        CHECK(descriptor.qos_latency_ms >= 25.0);
        CHECK(descriptor.qos_latency_ms <= 100.0);
        CHECK(descriptor.qos_availability >= 0.90);
        CHECK(descriptor.qos_availability <= 1.0);
    }

    CHECK(corpus_text(corpus) == corpus_text(bench::generate_corpus(params)));
    params.seed = 43;
    CHECK(corpus_text(corpus) != corpus_text(bench::generate_corpus(params)));
}

TEST_CASE("corpus generation rejects empty dimensions") {
    bench::GenerateParams params;
    params.descriptor_count = 0;
    CHECK(raises([&] { bench::generate_corpus(params); }, ErrorCode::InvalidConfig));
    params.descriptor_count = 1;
    params.vocabulary = 0;
    CHECK(raises([&] { bench::generate_corpus(params); }, ErrorCode::InvalidConfig));
}

TEST_CASE("corpus file round-trips through the wire format") {
    bench::GenerateParams params;
    params.descriptor_count = 64;
    params.seed = 9;
    auto corpus = bench::generate_corpus(params);

    std::string text = corpus_text(corpus);
    std::istringstream in(text);
    auto reloaded = bench::load_corpus(in);
    REQUIRE(reloaded.size() == corpus.size());
    CHECK(corpus_text(reloaded) == text);

    // Blank lines between records are tolerated.
    std::istringstream sparse("\n  \n" + text + "\n\n");
    CHECK(bench::load_corpus(sparse).size() == corpus.size());
}

TEST_CASE("queries reuse corpus tokens") {
    bench::GenerateParams params;
    params.descriptor_count = 120;
    params.vocabulary = 25;
    params.seed = 5;
    auto corpus = bench::generate_corpus(params);

    std::set<std::string> known;
    for (const auto& descriptor : corpus) {
        known.insert(descriptor.keywords.begin(), descriptor.keywords.end());
    }

    auto queries = bench::make_queries(corpus, 500, 11);
    REQUIRE(queries.size() == 500);
    for (const auto& query : queries) {
        auto tokens = normalize(query);
        REQUIRE_FALSE(tokens.empty());
        CHECK(tokens.size() <= 2);
        for (const auto& token : tokens) {
            CHECK(known.count(token) == 1);
        }
    }
    CHECK(bench::make_queries(corpus, 500, 11) == queries);
    CHECK(bench::make_queries(corpus, 500, 12) != queries);
}

TEST_CASE("benchmark run compares the three strategies") {
    bench::GenerateParams gen;
    gen.descriptor_count = 200;
    gen.vocabulary = 30;
    gen.seed = 21;
    auto corpus = bench::generate_corpus(gen);

    bench::RunParams params;
    params.query_count = 60;
    params.seed = 31;
    params.top_k = 5;

    bench::RunOutcome outcome = bench::run(corpus, params);
    REQUIRE(outcome.runs.size() == 3);

    const bench::StrategyRun* exited = outcome.find(SelectionStrategy::Exited);
    const bench::StrategyRun* expected = outcome.find(SelectionStrategy::Expected);
    const bench::StrategyRun* normal = outcome.find(SelectionStrategy::Normal);
    REQUIRE(exited != nullptr);
    REQUIRE(expected != nullptr);
    REQUIRE(normal != nullptr);
    CHECK(&outcome.baseline() == exited);

    CHECK(exited->selections == 60);
    REQUIRE(exited->top_choice.size() == 60);
    REQUIRE(expected->top_choice.size() == 60);

    // With an open filter the narrowed pipeline must agree with the
    // exhaustive one on every single pick, score included: QoS alone can
    // never outvote a keyword match under the default weights.
    for (std::size_t i = 0; i < 60; ++i) {
        CHECK(expected->top_choice[i] == exited->top_choice[i]);
        CHECK(expected->top_score[i] == exited->top_score[i]);
        CHECK_FALSE(exited->top_choice[i].empty());
    }

    std::string comparison = outcome.comparison_csv();
    CHECK(comparison.rfind("strategy,selections,mean_latency_ns,speedup_vs_exited,"
                           "top1_agreement_vs_exited\n",
                           0) == 0);
    CHECK(comparison.find("\nexited,60,") != std::string::npos);
    // The baseline agrees with itself; the narrowed pipeline agrees by the
    // scoring-margin argument above.
    std::istringstream lines(comparison);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        if (line.rfind("exited,", 0) == 0 || line.rfind("expected,", 0) == 0) {
            CHECK(line.substr(line.size() - 6) == ",1.000");
        }
    }

    // Every strategy records once per query into the shared metrics.
    REQUIRE(outcome.metrics.rows.size() == 3);
    for (const auto& row : outcome.metrics.rows) {
        CHECK(row.count == 60);
    }
}

TEST_CASE("selection output is deterministic across runs") {
    bench::GenerateParams gen;
    gen.descriptor_count = 150;
    gen.vocabulary = 20;
    gen.seed = 77;
    auto corpus = bench::generate_corpus(gen);

    bench::RunParams params;
    params.query_count = 40;
    params.seed = 13;

    std::string first = bench::run(corpus, params).selections_csv();
    std::string second = bench::run(corpus, params).selections_csv();
    CHECK(first == second);
    CHECK(first.rfind("strategy,query,chosen,score\n", 0) == 0);

    params.seed = 14;
    CHECK(bench::run(corpus, params).selections_csv() != first);
}

TEST_CASE("empty outcome has no baseline") {
    bench::RunOutcome outcome;
    CHECK(raises([&] { outcome.baseline(); }, ErrorCode::InvalidConfig));
    CHECK(raises([&] { outcome.comparison_csv(); }, ErrorCode::InvalidConfig));
}

TEST_CASE("rate histogram totals the band columns") {
    bench::GenerateParams gen;
    gen.descriptor_count = 80;
    gen.seed = 3;
    auto corpus = bench::generate_corpus(gen);

    bench::RunParams params;
    params.query_count = 25;
    bench::RunOutcome outcome = bench::run(corpus, params);

    std::string histogram = bench::rate_histogram(outcome.metrics.to_csv());
    std::istringstream lines(histogram);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "band,count");
    std::uint64_t total = 0;
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        total += parse_uint(line.substr(comma + 1), ErrorCode::InvalidConfig);
        ++rows;
    }
    CHECK(rows == 4);
    CHECK(total == 75);  // three strategies x 25 queries
}

TEST_CASE("rate histogram rejects malformed metrics") {
    CHECK(raises([] { bench::rate_histogram(""); }, ErrorCode::InvalidConfig));
    CHECK(raises([] { bench::rate_histogram("strategy,count\nexpected,3\n"); },
                 ErrorCode::InvalidConfig));
    std::string header = std::string(MetricsReport::kCsvHeader) + "\n";
    CHECK(raises([&] { bench::rate_histogram(header + "expected,1,2\n"); },
                 ErrorCode::InvalidConfig));
    CHECK(raises(
        [&] { bench::rate_histogram(header + "expected,1,2,3,4,5,6,many,0,0,0\n"); },
        ErrorCode::InvalidConfig));
}
