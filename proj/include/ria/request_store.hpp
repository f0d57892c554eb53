#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ria/error.hpp"
#include "ria/format.hpp"
#include "ria/model.hpp"
#include "ria/xml.hpp"

namespace ria {

enum class RequestState { New = 0, Mapped = 1, Filtered = 2, Selected = 3, Failed = 4 };

inline const char* to_string(RequestState state) {
    switch (state) {
        case RequestState::New: return "New";
        case RequestState::Mapped: return "Mapped";
        case RequestState::Filtered: return "Filtered";
        case RequestState::Selected: return "Selected";
        case RequestState::Failed: return "Failed";
    }
    return "New";
}

inline RequestState request_state_from_string(std::string_view name) {
    if (name == "New") return RequestState::New;
    if (name == "Mapped") return RequestState::Mapped;
    if (name == "Filtered") return RequestState::Filtered;
    if (name == "Selected") return RequestState::Selected;
    if (name == "Failed") return RequestState::Failed;
    raise(ErrorCode::CorruptSnapshot, "unknown state '" + std::string(name) + "'");
}

struct StoredRequest {
    ServiceRequest request;
    RequestState state = RequestState::New;
    std::uint64_t merge_count = 1;
};

// Ingest-and-dedup store. Duplicate key is (requester, normalized token
// multiset); a repeat arrival bumps merge_count instead of creating a new
// record. Ids are monotonically increasing integers rendered as decimal
// strings. Writes are serialized, reads are concurrent.
class RequestStore {
public:
    struct IngestOutcome {
        std::string request_id;
        bool was_duplicate = false;
    };

    IngestOutcome ingest(ServiceRequest request) {
        if (request.tokens.empty()) {
            raise(ErrorCode::EmptyQuery, "query has no tokens: '" + request.query + "'");
        }
        std::unique_lock lock(mutex_);
        std::string key = dedup_key(request.requester, request.tokens);
        if (auto it = by_key_.find(key); it != by_key_.end()) {
            entries_.at(it->second).merge_count += 1;
            return {it->second, true};
        }
        std::string id = std::to_string(next_id_++);
        request.id = id;
        entries_.emplace(id, StoredRequest{std::move(request), RequestState::New, 1});
        by_key_.emplace(std::move(key), id);
        return {std::move(id), false};
    }

    StoredRequest get(const std::string& request_id) const {
        std::shared_lock lock(mutex_);
        return locked_get(request_id);
    }

    // Strictly forward transition; Failed is reachable from any live state.
    StoredRequest advance_state(const std::string& request_id, RequestState new_state) {
        std::unique_lock lock(mutex_);
        StoredRequest& entry = locked_entry(request_id);
        if (static_cast<int>(new_state) <= static_cast<int>(entry.state)) {
            raise(ErrorCode::IllegalTransition,
                  std::string(to_string(entry.state)) + " -> " + to_string(new_state) +
                      " for request " + request_id);
        }
        entry.state = new_state;
        return entry;
    }

    // Monotone variant used by pipeline re-runs on duplicate ingest: never
    // moves backward, no-ops when the entry is already at or past the target.
    StoredRequest ensure_state_at_least(const std::string& request_id, RequestState floor) {
        std::unique_lock lock(mutex_);
        StoredRequest& entry = locked_entry(request_id);
        if (static_cast<int>(floor) > static_cast<int>(entry.state)) {
            entry.state = floor;
        }
        return entry;
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }

    void snapshot_save(const std::string& path) const {
        std::shared_lock lock(mutex_);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::IoError, "cannot open '" + path + "' for writing");
        out.write(kMagic, 4);
        // Records go out in numeric id order so identical stores serialize
        // identically.
        for (const auto& [numeric_id, id] : ordered_ids()) {
            (void)numeric_id;
            std::string payload = encode_record(entries_.at(id));
            write_u32(out, static_cast<std::uint32_t>(payload.size()));
            out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        }
        out.flush();
        if (!out) raise(ErrorCode::IoError, "short write to '" + path + "'");
    }

    // Replaces the store contents. Returns the record count.
    std::size_t snapshot_load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) raise(ErrorCode::IoError, "cannot open '" + path + "' for reading");
        std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
        if (in.bad()) raise(ErrorCode::IoError, "read failure on '" + path + "'");

        if (bytes.size() < 4 || bytes.compare(0, 4, kMagic) != 0) {
            raise(ErrorCode::CorruptSnapshot, "bad magic in '" + path + "'");
        }
        std::unordered_map<std::string, StoredRequest> entries;
        std::unordered_map<std::string, std::string> by_key;
        std::uint64_t max_id = 0;
        std::size_t pos = 4;
        while (pos < bytes.size()) {
            if (bytes.size() - pos < 4) {
                raise(ErrorCode::CorruptSnapshot, "truncated record header");
            }
            std::uint32_t len = read_u32(bytes, pos);
            pos += 4;
            if (bytes.size() - pos < len) {
                raise(ErrorCode::CorruptSnapshot, "truncated record payload");
            }
            StoredRequest record = decode_record(std::string_view(bytes).substr(pos, len));
            pos += len;
            std::uint64_t numeric = parse_uint(record.request.id, ErrorCode::CorruptSnapshot);
            max_id = std::max(max_id, numeric);
            std::string key = dedup_key(record.request.requester, record.request.tokens);
            std::string id = record.request.id;
            if (!entries.emplace(id, std::move(record)).second) {
                raise(ErrorCode::CorruptSnapshot, "duplicate id " + id);
            }
            by_key.emplace(std::move(key), std::move(id));
        }

        std::unique_lock lock(mutex_);
        entries_ = std::move(entries);
        by_key_ = std::move(by_key);
        next_id_ = max_id + 1;
        return entries_.size();
    }

private:
    static constexpr const char kMagic[5] = "RIA1";

    static std::string dedup_key(const std::string& requester,
                                 const std::vector<std::string>& tokens) {
        // Tokens are alphanumeric, so 0x1f cannot collide with content.
        std::string key = requester;
        for (const auto& t : tokens) {
            key.push_back('\x1f');
            key += t;
        }
        return key;
    }

    StoredRequest& locked_entry(const std::string& request_id) {
        auto it = entries_.find(request_id);
        if (it == entries_.end()) {
            raise(ErrorCode::NotFound, "request " + request_id);
        }
        return it->second;
    }

    StoredRequest locked_get(const std::string& request_id) const {
        auto it = entries_.find(request_id);
        if (it == entries_.end()) {
            raise(ErrorCode::NotFound, "request " + request_id);
        }
        return it->second;
    }

    std::vector<std::pair<std::uint64_t, std::string>> ordered_ids() const {
        std::vector<std::pair<std::uint64_t, std::string>> ids;
        ids.reserve(entries_.size());
        for (const auto& [id, entry] : entries_) {
            (void)entry;
            ids.emplace_back(parse_uint(id, ErrorCode::IoError), id);
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    // Record payload: the wire module's service-query XML shape extended
    // with the stored fields.
    static std::string encode_record(const StoredRequest& entry) {
        xml::Node root;
        root.name = "service";
        root.attributes.emplace_back("requestid", entry.request.id);
        auto add = [&root](const char* name, std::string value) {
            xml::Node child;
            child.name = name;
            child.text = std::move(value);
            root.children.push_back(std::move(child));
        };
        add("requester", entry.request.requester);
        add("query", entry.request.query);
        add("messageid", entry.request.message_id);
        add("priorityhint", std::to_string(entry.request.priority_hint));
        add("receivedat", std::to_string(entry.request.received_at));
        add("state", to_string(entry.state));
        add("mergecount", std::to_string(entry.merge_count));
        return xml::serialize(root);
    }

    static StoredRequest decode_record(std::string_view payload) {
        xml::Node root;
        try {
            root = xml::parse(payload);
        } catch (const Error&) {
            raise(ErrorCode::CorruptSnapshot, "record is not valid XML");
        }
        if (root.local_name() != "service") {
            raise(ErrorCode::CorruptSnapshot, "unexpected record root");
        }
        const std::string* id = root.attribute("requestid");
        if (!id) raise(ErrorCode::CorruptSnapshot, "record missing requestid");
        auto field = [&root](const char* name) -> std::string {
            const xml::Node* child = root.child(name);
            if (!child) {
                raise(ErrorCode::CorruptSnapshot, std::string("record missing ") + name);
            }
            return child->text;
        };
        StoredRequest entry;
        entry.request.id = *id;
        entry.request.requester = field("requester");
        entry.request.query = field("query");
        entry.request.message_id = field("messageid");
        entry.request.priority_hint = static_cast<int>(
            parse_int(field("priorityhint"), ErrorCode::CorruptSnapshot));
        entry.request.received_at = parse_int(field("receivedat"), ErrorCode::CorruptSnapshot);
        entry.request.tokens = normalize(entry.request.query);
        entry.request.token_set = deduplicate(entry.request.tokens);
        entry.state = request_state_from_string(field("state"));
        entry.merge_count = parse_uint(field("mergecount"), ErrorCode::CorruptSnapshot);
        if (entry.merge_count == 0) {
            raise(ErrorCode::CorruptSnapshot, "merge_count must be >= 1");
        }
        return entry;
    }

    static void write_u32(std::ofstream& out, std::uint32_t value) {
        char buf[4] = {static_cast<char>(value & 0xff),
                       static_cast<char>((value >> 8) & 0xff),
                       static_cast<char>((value >> 16) & 0xff),
                       static_cast<char>((value >> 24) & 0xff)};
        out.write(buf, 4);
    }

    static std::uint32_t read_u32(const std::string& bytes, std::size_t pos) {
        auto b = [&](std::size_t i) {
            return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i]));
        };
        return b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
    }

    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, StoredRequest> entries_;
    std::unordered_map<std::string, std::string> by_key_;  // dedup key -> id
    std::uint64_t next_id_ = 1;
};

}  // namespace ria
