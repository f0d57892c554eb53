#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "ria/model.hpp"

namespace ria {

struct FilterCriteria {
    double min_relevance = 0.0;
    std::optional<std::size_t> max_candidates;  // unset = unlimited
};

struct FilterOutcome {
    std::vector<Candidate> kept;             // relevance desc, ties by id asc
    std::vector<std::string> removed_ids;    // id asc
    std::uint64_t f_removed = 0;
};

// Select-then-order: threshold on relevance, sort survivors, truncate.
inline FilterOutcome filter_candidates(std::vector<Candidate> candidates,
                                       const FilterCriteria& criteria) {
    FilterOutcome outcome;
    std::size_t input_size = candidates.size();

    auto kept_end = std::stable_partition(
        candidates.begin(), candidates.end(),
        [&](const Candidate& c) { return c.relevance >= criteria.min_relevance; });

    std::sort(candidates.begin(), kept_end, [](const Candidate& a, const Candidate& b) {
        if (a.relevance != b.relevance) return a.relevance > b.relevance;
        return a.descriptor_id < b.descriptor_id;
    });

    std::size_t keep = static_cast<std::size_t>(kept_end - candidates.begin());
    if (criteria.max_candidates && *criteria.max_candidates < keep) {
        keep = *criteria.max_candidates;
    }

    outcome.kept.assign(candidates.begin(), candidates.begin() + keep);
    for (auto it = candidates.begin() + keep; it != candidates.end(); ++it) {
        outcome.removed_ids.push_back(it->descriptor_id);
    }
    std::sort(outcome.removed_ids.begin(), outcome.removed_ids.end());
    outcome.f_removed = input_size - outcome.kept.size();
    return outcome;
}

}  // namespace ria
