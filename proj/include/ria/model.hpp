#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ria/error.hpp"

namespace ria {

// Tokenization rule shared by requests and descriptors: lowercase, split on
// non-alphanumeric runs, drop empties. The result is the multiset in sorted
// canonical form.
inline std::vector<std::string> normalize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z')) {
            current.push_back(static_cast<char>(c));
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    std::sort(tokens.begin(), tokens.end());
    return tokens;
}

inline std::vector<std::string> deduplicate(std::vector<std::string> sorted_tokens) {
    sorted_tokens.erase(std::unique(sorted_tokens.begin(), sorted_tokens.end()),
                        sorted_tokens.end());
    return sorted_tokens;
}

inline std::string join_tokens(const std::vector<std::string>& tokens, char sep = ' ') {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(sep);
        out += t;
    }
    return out;
}

inline std::int64_t monotonic_now_ns() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct ServiceRequest {
    std::string id;          // assigned by the store on ingest
    std::string message_id;  // wire-level id, may be empty
    std::string query;
    std::vector<std::string> tokens;     // normalize(query), sorted multiset
    std::vector<std::string> token_set;  // deduplicated tokens
    int priority_hint = 0;               // 0..9, 0 = none
    std::string requester;
    std::int64_t received_at = 0;  // monotonic ns
};

inline ServiceRequest make_request(std::string query, std::string requester = "",
                                   int priority_hint = 0, std::string message_id = "") {
    if (priority_hint < 0 || priority_hint > 9) {
        raise(ErrorCode::OutOfRange,
              "priority_hint must be in 0..9, got " + std::to_string(priority_hint));
    }
    ServiceRequest request;
    request.message_id = std::move(message_id);
    request.query = std::move(query);
    request.tokens = normalize(request.query);
    request.token_set = deduplicate(request.tokens);
    request.priority_hint = priority_hint;
    request.requester = std::move(requester);
    request.received_at = monotonic_now_ns();
    return request;
}

struct ServiceDescriptor {
    std::string id;
    std::string name;
    std::vector<std::string> keywords;  // normalized token set, sorted unique
    std::string port_name;
    std::string ip_address;
    int rec_port = 80;
    std::string country;
    double qos_latency_ms = 100.0;
    double qos_availability = 0.99;
};

inline void validate_descriptor(const ServiceDescriptor& descriptor) {
    if (descriptor.id.empty()) {
        raise(ErrorCode::InvalidDescriptor, "empty id");
    }
    if (descriptor.keywords.empty()) {
        raise(ErrorCode::InvalidDescriptor, "empty keyword set for " + descriptor.id);
    }
    if (descriptor.rec_port < 1 || descriptor.rec_port > 65535) {
        raise(ErrorCode::InvalidDescriptor,
              "rec_port out of range for " + descriptor.id);
    }
    if (descriptor.qos_latency_ms < 0.0) {
        raise(ErrorCode::InvalidDescriptor, "negative latency for " + descriptor.id);
    }
    if (descriptor.qos_availability < 0.0 || descriptor.qos_availability > 1.0) {
        raise(ErrorCode::InvalidDescriptor,
              "availability outside [0,1] for " + descriptor.id);
    }
}

struct Candidate {
    std::string descriptor_id;
    double relevance = 0.0;  // in [0,1]
};

struct ScoreComponents {
    double relevance = 0.0;
    double latency_norm = 0.0;
    double availability = 0.0;
    double hint_boost = 0.0;
};

struct PriorityScore {
    std::string descriptor_id;
    double score = 0.0;  // weighted sum of components, clamped to [0,1]
    ScoreComponents components;
};

enum class QosBand { Poor = 0, Average = 1, Good = 2, Excellent = 3 };

inline const char* to_string(QosBand band) {
    switch (band) {
        case QosBand::Poor: return "Poor";
        case QosBand::Average: return "Average";
        case QosBand::Good: return "Good";
        case QosBand::Excellent: return "Excellent";
    }
    return "Poor";
}

// Per-request stage accounting. d_count is the registry size at mapping
// time, m_removed the mapping-eliminated count, f_removed the
// filter-eliminated count; s_aggregate = (d - m - f) / 3.
struct StageTrace {
    std::string request_id;
    std::uint64_t d_count = 0;
    std::uint64_t m_removed = 0;
    std::uint64_t f_removed = 0;
    double s_aggregate = 0.0;
    std::uint64_t map_ns = 0;
    std::uint64_t filter_ns = 0;
    std::uint64_t select_ns = 0;

    std::uint64_t total_ns() const { return map_ns + filter_ns + select_ns; }
    std::uint64_t survivors() const { return d_count - m_removed - f_removed; }
};

}  // namespace ria
