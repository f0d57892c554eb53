#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "ria/error.hpp"
#include "ria/model.hpp"

namespace ria {

inline double jaccard(const std::vector<std::string>& sorted_unique_a,
                      const std::vector<std::string>& sorted_unique_b) {
    if (sorted_unique_a.empty() || sorted_unique_b.empty()) return 0.0;
    std::size_t intersection = 0;
    std::size_t i = 0, j = 0;
    while (i < sorted_unique_a.size() && j < sorted_unique_b.size()) {
        int cmp = sorted_unique_a[i].compare(sorted_unique_b[j]);
        if (cmp == 0) {
            ++intersection;
            ++i;
            ++j;
        } else if (cmp < 0) {
            ++i;
        } else {
            ++j;
        }
    }
    std::size_t unions = sorted_unique_a.size() + sorted_unique_b.size() - intersection;
    return static_cast<double>(intersection) / static_cast<double>(unions);
}

inline double relevance(const ServiceRequest& request, const ServiceDescriptor& descriptor) {
    return jaccard(request.token_set, descriptor.keywords);
}

// UDDI stand-in: descriptor table plus an inverted keyword index. The index
// is only an acceleration structure; mapping correctness is defined by a
// linear scan over all descriptors.
class RegistryIndex {
public:
    std::uint64_t register_descriptor(ServiceDescriptor descriptor) {
        validate_descriptor(descriptor);
        std::unique_lock lock(mutex_);
        if (descriptors_.contains(descriptor.id)) {
            raise(ErrorCode::DuplicateId, descriptor.id);
        }
        for (const auto& keyword : descriptor.keywords) {
            inverted_[keyword].push_back(descriptor.id);
        }
        std::string id = descriptor.id;
        descriptors_.emplace(std::move(id), std::move(descriptor));
        return ++version_;
    }

    // Consistent read snapshot; holds a shared lock for its lifetime, so
    // registrations wait until all outstanding views are gone.
    class View {
    public:
        explicit View(const RegistryIndex& index)
            : index_(index), lock_(index.mutex_) {}

        std::uint64_t version() const { return index_.version_; }
        std::size_t size() const { return index_.descriptors_.size(); }

        const ServiceDescriptor* find(const std::string& id) const {
            auto it = index_.descriptors_.find(id);
            return it == index_.descriptors_.end() ? nullptr : &it->second;
        }

        const std::vector<std::string>* postings(const std::string& token) const {
            auto it = index_.inverted_.find(token);
            return it == index_.inverted_.end() ? nullptr : &it->second;
        }

        // Id-ordered iteration.
        const std::map<std::string, ServiceDescriptor>& descriptors() const {
            return index_.descriptors_;
        }

    private:
        const RegistryIndex& index_;
        std::shared_lock<std::shared_mutex> lock_;
    };

    View view() const { return View(*this); }

    std::size_t size() const { return View(*this).size(); }
    std::uint64_t version() const { return View(*this).version(); }

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, ServiceDescriptor> descriptors_;
    std::map<std::string, std::vector<std::string>> inverted_;
    std::uint64_t version_ = 0;
};

struct MapOutcome {
    std::vector<Candidate> candidates;  // relevance > 0, ordered by id
    std::uint64_t d_count = 0;
    std::uint64_t m_removed = 0;
};

// Mapping stage: every descriptor sharing at least one token with the
// request becomes a candidate with its Jaccard relevance; the rest count as
// mapping-eliminated.
inline MapOutcome map_request(const ServiceRequest& request, const RegistryIndex::View& view) {
    MapOutcome outcome;
    outcome.d_count = view.size();

    std::vector<std::string> hit_ids;
    for (const auto& token : request.token_set) {
        if (const auto* ids = view.postings(token)) {
            hit_ids.insert(hit_ids.end(), ids->begin(), ids->end());
        }
    }
    std::sort(hit_ids.begin(), hit_ids.end());
    hit_ids.erase(std::unique(hit_ids.begin(), hit_ids.end()), hit_ids.end());

    outcome.candidates.reserve(hit_ids.size());
    for (const auto& id : hit_ids) {
        const ServiceDescriptor* descriptor = view.find(id);
        outcome.candidates.push_back(Candidate{id, relevance(request, *descriptor)});
    }
    outcome.m_removed = outcome.d_count - outcome.candidates.size();
    return outcome;
}

}  // namespace ria
