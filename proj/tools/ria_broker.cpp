#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "ria/bench.hpp"
#include "ria/broker.hpp"

// Serves the selection pipeline over HTTP. Configuration precedence:
// built-in defaults, then --config file, then RIA_LISTEN, then flags.
int main(int argc, char** argv) {
    CLI::App app{"QoS-aware service request broker"};
    std::string config_path;
    std::string listen;
    std::string registry_path;
    std::optional<double> w_relevance;
    std::optional<double> w_latency;
    std::optional<double> w_availability;
    std::optional<double> w_hint;
    std::optional<double> min_relevance;
    std::optional<std::int64_t> max_candidates;
    std::optional<std::int64_t> top_k;

    app.add_option("--config", config_path, "key=value configuration file");
    app.add_option("--listen", listen, "bind address as host:port");
    app.add_option("--registry", registry_path, "descriptor file to preload, one per line");
    app.add_option("--k", top_k, "ranked candidates kept per selection");
    app.add_option("--min-relevance", min_relevance, "relevance floor for the filter stage");
    app.add_option("--max-candidates", max_candidates, "filter-stage cap, 0 for unlimited");
    app.add_option("--w-relevance", w_relevance, "priority weight on relevance");
    app.add_option("--w-latency", w_latency, "priority weight on latency");
    app.add_option("--w-availability", w_availability, "priority weight on availability");
    app.add_option("--w-hint", w_hint, "priority weight on the requester hint");
    CLI11_PARSE(app, argc, argv);

    try {
        ria::BrokerConfig config =
            config_path.empty() ? ria::BrokerConfig{} : ria::load_config_file(config_path);
        ria::apply_env_overrides(config);
        if (!listen.empty()) config.apply_listen(listen);
        if (w_relevance) config.weights.relevance = *w_relevance;
        if (w_latency) config.weights.latency = *w_latency;
        if (w_availability) config.weights.availability = *w_availability;
        if (w_hint) config.weights.hint = *w_hint;
        if (min_relevance) {
            if (*min_relevance < 0.0 || *min_relevance > 1.0) {
                ria::raise(ria::ErrorCode::InvalidConfig, "--min-relevance outside [0,1]");
            }
            config.criteria.min_relevance = *min_relevance;
        }
        if (max_candidates) {
            if (*max_candidates < 0) {
                ria::raise(ria::ErrorCode::InvalidConfig, "--max-candidates must be >= 0");
            }
            if (*max_candidates == 0) {
                config.criteria.max_candidates.reset();
            } else {
                config.criteria.max_candidates = static_cast<std::size_t>(*max_candidates);
            }
        }
        if (top_k) {
            if (*top_k < 1) ria::raise(ria::ErrorCode::InvalidConfig, "--k must be >= 1");
            config.top_k = static_cast<std::size_t>(*top_k);
        }
        config.weights.validate();

        ria::Broker broker(std::move(config));
        if (!registry_path.empty()) {
            std::ifstream in(registry_path);
            if (!in) {
                ria::raise(ria::ErrorCode::IoError, "cannot open registry '" + registry_path + "'");
            }
            std::vector<ria::ServiceDescriptor> corpus = ria::bench::load_corpus(in);
            for (auto& descriptor : corpus) {
                broker.registry().register_descriptor(std::move(descriptor));
            }
            std::fprintf(stderr, "preloaded %zu descriptors\n", corpus.size());
        }
        std::fprintf(stderr, "listening on %s:%d\n", broker.config().listen_host.c_str(),
                     broker.config().listen_port);
        if (!broker.run()) {
            std::fprintf(stderr, "cannot listen on %s:%d\n", broker.config().listen_host.c_str(),
                         broker.config().listen_port);
            return 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
