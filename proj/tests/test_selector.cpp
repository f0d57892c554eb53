#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "ria/selector.hpp"
#include "support/checks.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace ria;
using testing::raises;

namespace {

ServiceDescriptor descriptor(const char* id, std::vector<std::string> keywords,
                             double latency_ms = 100.0, double availability = 0.99) {
    ServiceDescriptor d;
    d.id = id;
    d.name = id;
    d.keywords = std::move(keywords);
    d.qos_latency_ms = latency_ms;
    d.qos_availability = availability;
    return d;
}

std::vector<PriorityScore> random_scores(Rng& rng) {
    std::int64_t n = rng.next_between(0, 30);
    std::vector<PriorityScore> out;
    for (std::int64_t i = 0; i < n; ++i) {
        PriorityScore s;
        s.descriptor_id = "s" + std::to_string(i);
        s.score = static_cast<double>(rng.next_between(0, 20)) / 20.0;
        out.push_back(std::move(s));
    }
    for (std::size_t i = out.size(); i > 1; --i) {
        std::swap(out[i - 1], out[rng.next_below(i)]);
    }
    return out;
}

}  // namespace

TEST_CASE("weights must be non-negative and sum to one") {
    CHECK_NOTHROW(Weights{}.validate());
    CHECK_NOTHROW(relevance_only_weights().validate());
    CHECK(raises([] { Weights{0.5, 0.5, 0.5, -0.5}.validate(); },
                 ErrorCode::WeightSumInvalid));
    CHECK(raises([] { Weights{0.5, 0.2, 0.2, 0.2}.validate(); },
                 ErrorCode::WeightSumInvalid));
    Weights defaults;
    CHECK(defaults.relevance == 0.55);
    CHECK(defaults.latency == 0.20);
    CHECK(defaults.availability == 0.20);
    CHECK(defaults.hint == 0.05);
}

TEST_CASE("latency normalization") {
    CHECK(latency_norm(0.0) == 1.0);
    CHECK(latency_norm(100.0) == 0.5);
    CHECK(latency_norm(300.0) == 0.25);
    // Strictly decreasing.
    CHECK(latency_norm(10.0) > latency_norm(11.0));
}

TEST_CASE("score_candidate combines the four components") {
    ServiceRequest request = make_request("weather", "", 0);
    ServiceDescriptor d = descriptor("svc", {"weather"}, 100.0, 0.8);
    Candidate candidate{"svc", 0.5};

    PriorityScore relevance_only =
        score_candidate(candidate, d, request, relevance_only_weights());
    CHECK(relevance_only.score == 0.5);
    CHECK(relevance_only.components.relevance == 0.5);
    CHECK(relevance_only.components.latency_norm == 0.5);
    CHECK(relevance_only.components.availability == 0.8);
    CHECK(relevance_only.components.hint_boost == 0.0);

    PriorityScore weighted = score_candidate(candidate, d, request, Weights{});
    CHECK(weighted.score == Catch::Approx(0.535).epsilon(1e-12));
    CHECK(weighted.score == 0.55 * 0.5 + 0.20 * 0.5 + 0.20 * 0.8 + 0.05 * 0.0);
}

TEST_CASE("perfect components give score one, absent ones zero") {
    ServiceRequest request = make_request("weather", "", 9);
    ServiceDescriptor ideal = descriptor("svc", {"weather"}, 0.0, 1.0);
    PriorityScore top = score_candidate(Candidate{"svc", 1.0}, ideal, request, Weights{});
    CHECK(top.score == 1.0);
    CHECK(top.components.hint_boost == 1.0);

    ServiceRequest plain = make_request("weather", "", 0);
    ServiceDescriptor worst = descriptor("svc", {"weather"}, 1e12, 0.0);
    PriorityScore bottom = score_candidate(Candidate{"svc", 0.0}, worst, plain, Weights{});
    CHECK(bottom.score >= 0.0);
    CHECK(bottom.score < 1e-9);
}

TEST_CASE("hint boost scales with the hint") {
    ServiceDescriptor d = descriptor("svc", {"weather"});
    double previous = -1.0;
    for (int hint = 0; hint <= 9; ++hint) {
        ServiceRequest request = make_request("weather", "", hint);
        PriorityScore s = score_candidate(Candidate{"svc", 0.5}, d, request, Weights{});
        CHECK(s.components.hint_boost == static_cast<double>(hint) / 9.0);
        CHECK(s.score > previous);
        previous = s.score;
    }
}

TEST_CASE("invalid weights are rejected at scoring time") {
    ServiceRequest request = make_request("weather");
    ServiceDescriptor d = descriptor("svc", {"weather"});
    CHECK(raises(
        [&] { score_candidate(Candidate{"svc", 0.5}, d, request, Weights{1, 1, 1, 1}); },
        ErrorCode::WeightSumInvalid));
}

TEST_CASE("sort_scores orders by score then id") {
    std::vector<PriorityScore> scored(4);
    scored[0].descriptor_id = "b";
    scored[0].score = 0.5;
    scored[1].descriptor_id = "a";
    scored[1].score = 0.5;
    scored[2].descriptor_id = "c";
    scored[2].score = 0.9;
    scored[3].descriptor_id = "d";
    scored[3].score = 0.1;
    sort_scores(scored);
    CHECK(scored[0].descriptor_id == "c");
    CHECK(scored[1].descriptor_id == "a");
    CHECK(scored[2].descriptor_id == "b");
    CHECK(scored[3].descriptor_id == "d");
}

TEST_CASE("select_top equals the insertion-sort oracle and the sort prefix") {
    Rng rng(808);
    for (int round = 0; round < 300; ++round) {
        std::vector<PriorityScore> scored = random_scores(rng);
        std::size_t k = static_cast<std::size_t>(rng.next_between(1, 35));

        std::vector<PriorityScore> top = select_top(scored, k);
        std::vector<PriorityScore> expect = testing::oracle_top_k(scored, k);
        REQUIRE(top.size() == expect.size());
        for (std::size_t i = 0; i < top.size(); ++i) {
            CHECK(top[i].descriptor_id == expect[i].descriptor_id);
            CHECK(top[i].score == expect[i].score);
        }

        std::vector<PriorityScore> full = scored;
        sort_scores(full);
        CHECK(top.size() == std::min(k, full.size()));
        for (std::size_t i = 0; i < top.size(); ++i) {
            CHECK(top[i].descriptor_id == full[i].descriptor_id);
        }
    }
}

TEST_CASE("normal strategy ranks by relevance alone and never truncates") {
    RegistryIndex registry;
    registry.register_descriptor(descriptor("a", {"weather", "news"}, 10.0, 1.0));
    registry.register_descriptor(descriptor("b", {"weather"}, 500.0, 0.2));
    registry.register_descriptor(descriptor("c", {"sports"}, 1.0, 1.0));

    ServiceRequest request = make_request("weather");
    request.id = "r1";
    SelectionResult result = run_pipeline(request, registry.view(),
                                          SelectionStrategy::Normal, {}, {}, 1);
    // k=1 must not truncate: Normal keeps every mapped candidate.
    REQUIRE(result.ranked.size() == 2);
    // b matches {weather} exactly (jaccard 1.0), a only half; QoS would have
    // said a, relevance-only says b.
    CHECK(result.ranked[0].descriptor_id == "b");
    CHECK(result.ranked[0].score == result.ranked[0].components.relevance);
    CHECK(result.ranked[1].descriptor_id == "a");
    CHECK(result.chosen == "b");
    CHECK(result.trace.d_count == 3);
    CHECK(result.trace.m_removed == 1);
    CHECK(result.trace.f_removed == 0);
    CHECK(result.reserve.empty());
}

TEST_CASE("exited strategy scores every descriptor including zero relevance") {
    RegistryIndex registry;
    registry.register_descriptor(descriptor("a", {"weather"}, 10.0, 1.0));
    registry.register_descriptor(descriptor("b", {"sports"}, 10.0, 1.0));

    ServiceRequest request = make_request("weather");
    SelectionResult result = run_pipeline(request, registry.view(),
                                          SelectionStrategy::Exited, {}, {}, 10);
    REQUIRE(result.ranked.size() == 2);
    CHECK(result.trace.d_count == 2);
    CHECK(result.trace.m_removed == 0);
    CHECK(result.trace.f_removed == 0);
    CHECK(result.ranked[1].components.relevance == 0.0);
}

TEST_CASE("expected strategy filters then scores and keeps the reserve") {
    RegistryIndex registry;
    registry.register_descriptor(descriptor("a", {"weather", "x", "y", "z"}, 10.0, 1.0));
    registry.register_descriptor(descriptor("b", {"weather"}, 10.0, 1.0));
    registry.register_descriptor(descriptor("c", {"news"}, 10.0, 1.0));

    ServiceRequest request = make_request("weather");
    FilterCriteria criteria;
    criteria.min_relevance = 0.5;  // drops a (0.25), keeps b (1.0)
    SelectionResult result = run_pipeline(request, registry.view(),
                                          SelectionStrategy::Expected, criteria, {}, 10);
    REQUIRE(result.ranked.size() == 1);
    CHECK(result.ranked[0].descriptor_id == "b");
    CHECK(result.chosen == "b");
    CHECK(result.reserve == std::vector<std::string>{"a"});
    CHECK(result.trace.d_count == 3);
    CHECK(result.trace.m_removed == 1);
    CHECK(result.trace.f_removed == 1);
    CHECK(result.trace.s_aggregate == 1.0 / 3.0);
}

TEST_CASE("expected equals exited minus the zero-relevance tail") {
    Rng rng(909);
    for (int round = 0; round < 200; ++round) {
        std::vector<ServiceDescriptor> descriptors = testing::random_registry(rng, 25);
        RegistryIndex registry;
        for (const auto& d : descriptors) registry.register_descriptor(d);
        ServiceRequest request = testing::random_request(rng);
        Weights weights = testing::random_weights(rng);

        RegistryIndex::View view = registry.view();
        SelectionResult exited = run_pipeline(request, view, SelectionStrategy::Exited, {},
                                              weights, descriptors.size() + 1);
        SelectionResult expected = run_pipeline(request, view, SelectionStrategy::Expected, {},
                                                weights, descriptors.size() + 1);

        std::vector<PriorityScore> positive;
        for (const auto& entry : exited.ranked) {
            if (entry.components.relevance > 0.0) positive.push_back(entry);
        }
        REQUIRE(expected.ranked.size() == positive.size());
        for (std::size_t i = 0; i < positive.size(); ++i) {
            CHECK(expected.ranked[i].descriptor_id == positive[i].descriptor_id);
            CHECK(expected.ranked[i].score == positive[i].score);
        }
    }
}

TEST_CASE("select_with_strategy advances state and records failure") {
    RegistryIndex registry;
    registry.register_descriptor(descriptor("a", {"weather"}));
    RequestStore store;
    std::string id = store.ingest(make_request("weather", "alice")).request_id;

    SelectionResult result =
        select_with_strategy(store, id, registry, SelectionStrategy::Expected);
    CHECK(result.chosen == "a");
    CHECK(store.get(id).state == RequestState::Selected);

    // Duplicate ingest re-runs selection without tripping the state machine.
    store.ingest(make_request("weather", "alice"));
    CHECK_NOTHROW(select_with_strategy(store, id, registry, SelectionStrategy::Expected));
    CHECK(store.get(id).state == RequestState::Selected);

    CHECK(raises([&] { select_with_strategy(store, "999", registry,
                                            SelectionStrategy::Expected); },
                 ErrorCode::NotFound));

    // A pipeline failure marks the request Failed and rethrows.
    std::string doomed = store.ingest(make_request("weather", "bob")).request_id;
    CHECK(raises(
        [&] {
            select_with_strategy(store, doomed, registry, SelectionStrategy::Expected, {},
                                 Weights{1, 1, 1, 1});
        },
        ErrorCode::WeightSumInvalid));
    CHECK(store.get(doomed).state == RequestState::Failed);
}

TEST_CASE("trace invariants hold on every pipeline run") {
    Rng rng(910);
    for (int round = 0; round < 200; ++round) {
        std::vector<ServiceDescriptor> descriptors = testing::random_registry(rng, 20);
        RegistryIndex registry;
        for (const auto& d : descriptors) registry.register_descriptor(d);
        ServiceRequest request = testing::random_request(rng);
        FilterCriteria criteria;
        criteria.min_relevance = static_cast<double>(rng.next_between(0, 5)) / 10.0;

        SelectionResult result = run_pipeline(request, registry.view(),
                                              SelectionStrategy::Expected, criteria, {},
                                              descriptors.size() + 1);
        const StageTrace& t = result.trace;
        CHECK(t.d_count == descriptors.size());
        CHECK(t.m_removed + t.f_removed <= t.d_count);
        CHECK(t.s_aggregate == stage_aggregate(t.d_count, t.m_removed, t.f_removed));
        CHECK(3.0 * t.s_aggregate == static_cast<double>(t.survivors()));
        CHECK(result.ranked.size() == t.survivors());
        if (result.ranked.empty()) {
            CHECK_FALSE(result.chosen.has_value());
        } else {
            CHECK(result.chosen == result.ranked.front().descriptor_id);
        }
    }
}
