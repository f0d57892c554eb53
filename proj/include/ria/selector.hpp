#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ria/error.hpp"
#include "ria/filter.hpp"
#include "ria/metrics.hpp"
#include "ria/model.hpp"
#include "ria/registry.hpp"
#include "ria/request_store.hpp"

namespace ria {

struct Weights {
    double relevance = 0.55;
    double latency = 0.20;
    double availability = 0.20;
    double hint = 0.05;

    void validate() const {
        double sum = relevance + latency + availability + hint;
        if (relevance < 0.0 || latency < 0.0 || availability < 0.0 || hint < 0.0 ||
            std::fabs(sum - 1.0) > 1e-9) {
            raise(ErrorCode::WeightSumInvalid,
                  "weights must be non-negative and sum to 1, sum=" + std::to_string(sum));
        }
    }
};

// Relevance-only weights used by the Normal strategy.
inline Weights relevance_only_weights() { return Weights{1.0, 0.0, 0.0, 0.0}; }

struct SelectionResult {
    std::vector<PriorityScore> ranked;    // score desc, ties by id asc
    std::optional<std::string> chosen;    // ranked.front() when non-empty
    std::vector<std::string> reserve;     // filter-removed ids, id asc
    StageTrace trace;
};

inline double latency_norm(double qos_latency_ms) {
    return 1.0 / (1.0 + qos_latency_ms / 100.0);
}

inline PriorityScore score_candidate(const Candidate& candidate,
                                     const ServiceDescriptor& descriptor,
                                     const ServiceRequest& request,
                                     const Weights& weights) {
    weights.validate();
    PriorityScore out;
    out.descriptor_id = candidate.descriptor_id;
    out.components.relevance = candidate.relevance;
    out.components.latency_norm = latency_norm(descriptor.qos_latency_ms);
    out.components.availability = descriptor.qos_availability;
    out.components.hint_boost = static_cast<double>(request.priority_hint) / 9.0;
    double score = weights.relevance * out.components.relevance +
                   weights.latency * out.components.latency_norm +
                   weights.availability * out.components.availability +
                   weights.hint * out.components.hint_boost;
    out.score = std::clamp(score, 0.0, 1.0);
    return out;
}

inline void sort_scores(std::vector<PriorityScore>& scored) {
    std::sort(scored.begin(), scored.end(), [](const PriorityScore& a, const PriorityScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.descriptor_id < b.descriptor_id;
    });
}

// Highest k scores in descending order; equal to sorting the whole list and
// taking a prefix.
inline std::vector<PriorityScore> select_top(std::vector<PriorityScore> scored, std::size_t k) {
    sort_scores(scored);
    if (scored.size() > k) scored.resize(k);
    return scored;
}

namespace detail {

class StageClock {
public:
    std::uint64_t lap() {
        auto now = std::chrono::steady_clock::now();
        auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(now - mark_).count();
        mark_ = now;
        return static_cast<std::uint64_t>(ns);
    }

private:
    std::chrono::steady_clock::time_point mark_ = std::chrono::steady_clock::now();
};

inline void finish_result(SelectionResult& result) {
    if (!result.ranked.empty()) {
        result.chosen = result.ranked.front().descriptor_id;
    }
    result.trace.s_aggregate =
        stage_aggregate(result.trace.d_count, result.trace.m_removed, result.trace.f_removed);
}

}  // namespace detail

// Pure pipeline given a registry view: strategies share the scoring
// function but differ in which candidates reach it.
//   Normal   — map only, ranked by relevance alone.
//   Exited   — exhaustive scan of every descriptor, no index, no filter.
//   Expected — map, filter, score, top-k; filtered-out ids kept as reserve.
inline SelectionResult run_pipeline(const ServiceRequest& request,
                                    const RegistryIndex::View& view,
                                    SelectionStrategy strategy,
                                    const FilterCriteria& criteria,
                                    const Weights& weights,
                                    std::size_t k) {
    weights.validate();
    SelectionResult result;
    result.trace.request_id = request.id;
    detail::StageClock clock;

    switch (strategy) {
        case SelectionStrategy::Normal: {
            MapOutcome mapped = map_request(request, view);
            result.trace.d_count = mapped.d_count;
            result.trace.m_removed = mapped.m_removed;
            result.trace.map_ns = clock.lap();
            Weights relevance_only = relevance_only_weights();
            result.ranked.reserve(mapped.candidates.size());
            for (const auto& candidate : mapped.candidates) {
                result.ranked.push_back(score_candidate(
                    candidate, *view.find(candidate.descriptor_id), request, relevance_only));
            }
            sort_scores(result.ranked);
            result.trace.select_ns = clock.lap();
            break;
        }
        case SelectionStrategy::Exited: {
            result.trace.d_count = view.size();
            result.ranked.reserve(view.size());
            for (const auto& [id, descriptor] : view.descriptors()) {
                Candidate candidate{id, relevance(request, descriptor)};
                result.ranked.push_back(score_candidate(candidate, descriptor, request, weights));
            }
            sort_scores(result.ranked);
            result.trace.select_ns = clock.lap();
            break;
        }
        case SelectionStrategy::Expected: {
            MapOutcome mapped = map_request(request, view);
            result.trace.d_count = mapped.d_count;
            result.trace.m_removed = mapped.m_removed;
            result.trace.map_ns = clock.lap();

            FilterOutcome filtered = filter_candidates(std::move(mapped.candidates), criteria);
            result.trace.f_removed = filtered.f_removed;
            result.reserve = std::move(filtered.removed_ids);
            result.trace.filter_ns = clock.lap();

            std::vector<PriorityScore> scored;
            scored.reserve(filtered.kept.size());
            for (const auto& candidate : filtered.kept) {
                scored.push_back(score_candidate(
                    candidate, *view.find(candidate.descriptor_id), request, weights));
            }
            result.ranked = select_top(std::move(scored), k);
            result.trace.select_ns = clock.lap();
            break;
        }
    }

    detail::finish_result(result);
    return result;
}

// Store-aware selection: looks the request up, runs the pipeline against a
// consistent registry snapshot and advances the stored state. State moves
// are monotone so a duplicate ingest can re-run selection without tripping
// the forward-only invariant.
inline SelectionResult select_with_strategy(RequestStore& store,
                                            const std::string& request_id,
                                            const RegistryIndex& registry,
                                            SelectionStrategy strategy,
                                            const FilterCriteria& criteria = {},
                                            const Weights& weights = {},
                                            std::size_t k = 10) {
    StoredRequest stored = store.get(request_id);  // NotFound
    try {
        weights.validate();
        SelectionResult result;
        {
            RegistryIndex::View view = registry.view();
            result = run_pipeline(stored.request, view, strategy, criteria, weights, k);
        }
        switch (strategy) {
            case SelectionStrategy::Normal:
                store.ensure_state_at_least(request_id, RequestState::Mapped);
                break;
            case SelectionStrategy::Exited:
                break;
            case SelectionStrategy::Expected:
                store.ensure_state_at_least(request_id, RequestState::Filtered);
                break;
        }
        store.ensure_state_at_least(request_id, RequestState::Selected);
        return result;
    } catch (const Error&) {
        store.ensure_state_at_least(request_id, RequestState::Failed);
        throw;
    }
}

}  // namespace ria
