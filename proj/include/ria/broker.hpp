#pragma once

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>

#include "ria/error.hpp"
#include "ria/format.hpp"
#include "ria/metrics.hpp"
#include "ria/model.hpp"
#include "ria/registry.hpp"
#include "ria/request_store.hpp"
#include "ria/selector.hpp"
#include "ria/wire.hpp"
#include "ria/xml.hpp"

namespace ria {

struct BrokerConfig {
    std::string listen_host = "127.0.0.1";
    int listen_port = 8780;
    Weights weights;
    FilterCriteria criteria;
    std::size_t top_k = 10;

    void apply_listen(const std::string& host_port) {
        auto colon = host_port.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == host_port.size()) {
            raise(ErrorCode::InvalidConfig, "listen must be host:port, got '" + host_port + "'");
        }
        std::int64_t port = parse_int(host_port.substr(colon + 1), ErrorCode::InvalidConfig);
        if (port < 1 || port > 65535) {
            raise(ErrorCode::InvalidConfig, "listen port outside 1..65535");
        }
        listen_host = host_port.substr(0, colon);
        listen_port = static_cast<int>(port);
    }
};

// key=value config, one pair per line, '#' starts a comment.
inline BrokerConfig load_config(std::istream& in) {
    BrokerConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        auto end = line.find_last_not_of(" \t\r");
        std::string entry = line.substr(begin, end - begin + 1);
        auto eq = entry.find('=');
        if (eq == std::string::npos) {
            raise(ErrorCode::InvalidConfig,
                  "line " + std::to_string(line_no) + ": expected key=value");
        }
        std::string key = entry.substr(0, eq);
        std::string value = entry.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) {
            value.erase(value.begin());
        }
        if (key == "listen") {
            config.apply_listen(value);
        } else if (key == "w_relevance") {
            config.weights.relevance = parse_double(value, ErrorCode::InvalidConfig);
        } else if (key == "w_latency") {
            config.weights.latency = parse_double(value, ErrorCode::InvalidConfig);
        } else if (key == "w_availability") {
            config.weights.availability = parse_double(value, ErrorCode::InvalidConfig);
        } else if (key == "w_hint") {
            config.weights.hint = parse_double(value, ErrorCode::InvalidConfig);
        } else if (key == "min_relevance") {
            config.criteria.min_relevance = parse_double(value, ErrorCode::InvalidConfig);
            if (config.criteria.min_relevance < 0.0 || config.criteria.min_relevance > 1.0) {
                raise(ErrorCode::InvalidConfig, "min_relevance outside [0,1]");
            }
        } else if (key == "max_candidates") {
            std::int64_t n = parse_int(value, ErrorCode::InvalidConfig);
            if (n == 0) {
                config.criteria.max_candidates.reset();  // 0 = unlimited
            } else if (n < 1) {
                raise(ErrorCode::InvalidConfig, "max_candidates must be >= 1 or 0");
            } else {
                config.criteria.max_candidates = static_cast<std::size_t>(n);
            }
        } else if (key == "k") {
            std::int64_t k = parse_int(value, ErrorCode::InvalidConfig);
            if (k < 1) raise(ErrorCode::InvalidConfig, "k must be >= 1");
            config.top_k = static_cast<std::size_t>(k);
        } else {
            raise(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
        }
    }
    config.weights.validate();
    return config;
}

inline BrokerConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open config '" + path + "'");
    return load_config(in);
}

// RIA_LISTEN takes precedence over the config file.
inline void apply_env_overrides(BrokerConfig& config) {
    if (const char* listen = std::getenv("RIA_LISTEN")) {
        config.apply_listen(listen);
    }
}

// Network front-end over the pipeline. One instance owns the request
// store, the registry and the metrics; handlers run on httplib's worker
// pool, so everything they touch is already concurrency-safe.
class Broker {
public:
    explicit Broker(BrokerConfig config) : config_(std::move(config)) {
        config_.weights.validate();
        server_.new_task_queue = [] { return new httplib::ThreadPool(32); };
        // Long-lived clients keep one connection for their whole session;
        // responses are small, so Nagle only adds latency.
        server_.set_keep_alive_max_count(100000);
        server_.set_tcp_nodelay(true);
        bind_routes();
    }

    RequestStore& store() { return store_; }
    RegistryIndex& registry() { return registry_; }
    MetricsRegistry& metrics() { return metrics_; }
    const BrokerConfig& config() const { return config_; }

    // Blocking serve on the configured address.
    bool run() { return server_.listen(config_.listen_host, config_.listen_port); }

    // Background serve on an ephemeral port; returns the bound port.
    int start_background() {
        int port = server_.bind_to_any_port(config_.listen_host);
        if (port < 0) raise(ErrorCode::IoError, "cannot bind " + config_.listen_host);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port;
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    ~Broker() { stop(); }

private:
    static void fail(httplib::Response& res, int status, const Error& error) {
        res.status = status;
        std::string body = error.name();
        if (!error.detail().empty()) {
            body += ": ";
            body += error.detail();
        }
        res.set_content(body, "text/plain");
    }

    static int status_for(const Error& error) {
        switch (error.code()) {
            case ErrorCode::EmptyQuery: return 422;
            case ErrorCode::NotFound: return 404;
            case ErrorCode::DuplicateId: return 409;
            case ErrorCode::IoError:
            case ErrorCode::CorruptSnapshot: return 500;
            default: return 400;
        }
    }

    void bind_routes() {
        server_.Post("/requests", [this](const httplib::Request& req, httplib::Response& res) {
            handle_request(req, res);
        });
        server_.Post("/registry", [this](const httplib::Request& req, httplib::Response& res) {
            handle_register(req, res);
        });
        server_.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
            res.set_content(metrics_.report().to_csv(), "text/csv");
        });
        server_.Get(R"(/requests/([^/]+))",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        handle_lookup(req, res);
                    });
    }

    void handle_request(const httplib::Request& req, httplib::Response& res) {
        try {
            SelectionStrategy strategy = SelectionStrategy::Expected;
            if (req.has_param("strategy")) {
                strategy = strategy_from_string(req.get_param_value("strategy"));
            }
            ServiceRequest request = request_from_body(req.body);
            auto [request_id, was_duplicate] = store_.ingest(std::move(request));
            (void)was_duplicate;  // duplicates re-run selection on the live registry
            SelectionResult result = select_with_strategy(
                store_, request_id, registry_, strategy, config_.criteria, config_.weights,
                config_.top_k);
            double final_score = result.ranked.empty() ? 0.0 : result.ranked.front().score;
            metrics_.record(result.trace, final_score, strategy);
            res.status = 200;
            res.set_content(wire::serialize_result(result), "application/xml");
        } catch (const Error& error) {
            fail(res, status_for(error), error);
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(std::string("Internal: ") + e.what(), "text/plain");
        }
    }

    static ServiceRequest request_from_body(const std::string& body) {
        // Two entry points: a SOAP envelope carrying free text, or a
        // structured service query. Dispatch on the root element.
        bool is_query = false;
        try {
            xml::Node root = xml::parse(body);
            is_query = root.local_name() == "service";
        } catch (const Error&) {
            // fall through; parse_envelope reports the malformed document
        }
        if (is_query) {
            wire::QueryDocument query = wire::parse_query(body);
            return make_request(query.query_text(), query.requester, 0, query.request_id);
        }
        wire::Envelope envelope = wire::parse_envelope(body);
        return make_request(envelope.body_query, "", 0, envelope.message_id);
    }

    void handle_register(const httplib::Request& req, httplib::Response& res) {
        try {
            ServiceDescriptor descriptor = wire::parse_descriptor(req.body);
            std::string id = descriptor.id;
            std::uint64_t version = registry_.register_descriptor(std::move(descriptor));
            xml::Node node;
            node.name = "registered";
            node.attributes.emplace_back("id", id);
            node.attributes.emplace_back("version", std::to_string(version));
            res.status = 201;
            res.set_content(xml::serialize(node), "application/xml");
        } catch (const Error& error) {
            fail(res, status_for(error), error);
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(std::string("Internal: ") + e.what(), "text/plain");
        }
    }

    void handle_lookup(const httplib::Request& req, httplib::Response& res) {
        try {
            StoredRequest stored = store_.get(req.matches[1]);
            xml::Node node;
            node.name = "request";
            node.attributes.emplace_back("id", stored.request.id);
            node.attributes.emplace_back("state", to_string(stored.state));
            node.attributes.emplace_back("mergecount", std::to_string(stored.merge_count));
            node.attributes.emplace_back("requester", stored.request.requester);
            res.status = 200;
            res.set_content(xml::serialize(node), "application/xml");
        } catch (const Error& error) {
            fail(res, status_for(error), error);
        }
    }

    BrokerConfig config_;
    RequestStore store_;
    RegistryIndex registry_;
    MetricsRegistry metrics_;
    httplib::Server server_;
    std::thread thread_;
};

}  // namespace ria
