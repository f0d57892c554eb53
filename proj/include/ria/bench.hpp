#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ria/error.hpp"
#include "ria/format.hpp"
#include "ria/metrics.hpp"
#include "ria/model.hpp"
#include "ria/registry.hpp"
#include "ria/request_store.hpp"
#include "ria/rng.hpp"
#include "ria/selector.hpp"
#include "ria/wire.hpp"

namespace ria::bench {

struct GenerateParams {
    std::size_t descriptor_count = 1000;
    std::size_t vocabulary = 200;
    double zipf_exponent = 1.1;
    std::uint64_t seed = 1;
};

// Synthetic registry. Each service keeps its own name token plus two to
// four vocabulary tokens drawn from a rank-frequency curve, so popular
// tokens fan out across many services while most stay rare. QoS numbers
// sit in a band narrow enough that keyword relevance, not luck of the
// QoS draw, decides who wins a selection.
inline std::vector<ServiceDescriptor> generate_corpus(const GenerateParams& params) {
    if (params.descriptor_count == 0) {
        raise(ErrorCode::InvalidConfig, "descriptor_count must be >= 1");
    }
    if (params.vocabulary == 0) raise(ErrorCode::InvalidConfig, "vocabulary must be >= 1");
    Rng rng(params.seed);
    ZipfSampler zipf(params.vocabulary, params.zipf_exponent);
    std::vector<ServiceDescriptor> corpus;
    corpus.reserve(params.descriptor_count);
    for (std::size_t i = 0; i < params.descriptor_count; ++i) {
        char name[24];
        std::snprintf(name, sizeof(name), "svc%06zu", i);
        ServiceDescriptor descriptor;
        descriptor.id = name;
        descriptor.name = name;
        std::vector<std::string> keywords{descriptor.name};
        std::int64_t draws = rng.next_between(2, 4);
        for (std::int64_t d = 0; d < draws; ++d) {
            keywords.push_back("w" + std::to_string(zipf.sample(rng)));
        }
        std::sort(keywords.begin(), keywords.end());
        descriptor.keywords = deduplicate(std::move(keywords));
        descriptor.qos_latency_ms = rng.next_double_between(25.0, 100.0);
        descriptor.qos_availability = rng.next_double_between(0.90, 1.0);
        corpus.push_back(std::move(descriptor));
    }
    return corpus;
}

// One descriptor per line, in the same document format /registry accepts.
inline void write_corpus(std::ostream& out, const std::vector<ServiceDescriptor>& corpus) {
    for (const auto& descriptor : corpus) {
        out << wire::serialize_descriptor(descriptor) << '\n';
    }
}

inline std::vector<ServiceDescriptor> load_corpus(std::istream& in) {
    std::vector<ServiceDescriptor> corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        corpus.push_back(wire::parse_descriptor(line));
    }
    return corpus;
}

// Queries reuse tokens the corpus actually contains, drawn uniformly from
// the distinct-token set, so every query maps to at least one service.
inline std::vector<std::string> make_queries(const std::vector<ServiceDescriptor>& corpus,
                                             std::size_t count, std::uint64_t seed) {
    std::set<std::string> distinct;
    for (const auto& descriptor : corpus) {
        distinct.insert(descriptor.keywords.begin(), descriptor.keywords.end());
    }
    if (distinct.empty()) raise(ErrorCode::InvalidConfig, "corpus has no keywords");
    std::vector<std::string> tokens(distinct.begin(), distinct.end());
    Rng rng(seed);
    std::vector<std::string> queries;
    queries.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::string query = tokens[rng.next_below(tokens.size())];
        if (rng.next_between(1, 2) == 2) {
            query += ' ';
            query += tokens[rng.next_below(tokens.size())];
        }
        queries.push_back(std::move(query));
    }
    return queries;
}

struct RunParams {
    std::size_t query_count = 100;
    std::uint64_t seed = 7;
    std::size_t top_k = 10;
    FilterCriteria criteria;
    Weights weights;
    std::vector<SelectionStrategy> strategies = {SelectionStrategy::Exited,
                                                 SelectionStrategy::Expected,
                                                 SelectionStrategy::Normal};
};

struct StrategyRun {
    SelectionStrategy strategy = SelectionStrategy::Expected;
    std::uint64_t selections = 0;
    double mean_latency_ns = 0.0;
    std::vector<std::string> top_choice;  // per query, empty when nothing ranked
    std::vector<double> top_score;
};

struct RunOutcome {
    std::vector<StrategyRun> runs;
    MetricsReport metrics;

    const StrategyRun* find(SelectionStrategy strategy) const {
        for (const auto& run : runs) {
            if (run.strategy == strategy) return &run;
        }
        return nullptr;
    }

    // The exhaustive strategy is the quality baseline: it scores the whole
    // registry, so its top pick is the one the others are measured against.
    const StrategyRun& baseline() const {
        if (runs.empty()) raise(ErrorCode::InvalidConfig, "no strategies were run");
        const StrategyRun* exited = find(SelectionStrategy::Exited);
        return exited ? *exited : runs.front();
    }

    std::string comparison_csv() const {
        const StrategyRun& base = baseline();
        std::string csv =
            "strategy,selections,mean_latency_ns,speedup_vs_exited,top1_agreement_vs_exited\n";
        for (const auto& run : runs) {
            double speedup = run.mean_latency_ns > 0.0
                                 ? base.mean_latency_ns / run.mean_latency_ns
                                 : 1.0;
            std::size_t agreed = 0;
            for (std::size_t i = 0; i < run.top_choice.size(); ++i) {
                if (run.top_choice[i] == base.top_choice[i]) ++agreed;
            }
            double agreement = run.top_choice.empty()
                                   ? 1.0
                                   : static_cast<double>(agreed) / run.top_choice.size();
            csv += to_string(run.strategy);
            csv += ',';
            csv += std::to_string(run.selections);
            csv += ',';
            csv += std::to_string(static_cast<std::uint64_t>(std::llround(run.mean_latency_ns)));
            csv += ',';
            csv += format_fixed(speedup, 3);
            csv += ',';
            csv += format_fixed(agreement, 3);
            csv += '\n';
        }
        return csv;
    }

    // Per-query picks; no timings, so two same-seed runs must match byte
    // for byte.
    std::string selections_csv() const {
        std::string csv = "strategy,query,chosen,score\n";
        for (const auto& run : runs) {
            for (std::size_t i = 0; i < run.top_choice.size(); ++i) {
                csv += to_string(run.strategy);
                csv += ',';
                csv += std::to_string(i);
                csv += ',';
                csv += run.top_choice[i].empty() ? "-" : run.top_choice[i];
                csv += ',';
                csv += format_fixed(run.top_score[i], 6);
                csv += '\n';
            }
        }
        return csv;
    }
};

inline RunOutcome run(const std::vector<ServiceDescriptor>& corpus, const RunParams& params) {
    params.weights.validate();
    RegistryIndex registry;
    for (const auto& descriptor : corpus) registry.register_descriptor(descriptor);

    std::vector<std::string> queries = make_queries(corpus, params.query_count, params.seed);
    RequestStore store;
    std::vector<std::string> ids;
    ids.reserve(queries.size());
    for (const auto& query : queries) {
        ids.push_back(store.ingest(make_request(query, "bench")).request_id);
    }

    MetricsRegistry metrics;
    RunOutcome outcome;
    for (SelectionStrategy strategy : params.strategies) {
        StrategyRun run;
        run.strategy = strategy;
        run.top_choice.reserve(ids.size());
        run.top_score.reserve(ids.size());
        std::uint64_t total_ns = 0;
        for (const auto& id : ids) {
            SelectionResult result = select_with_strategy(store, id, registry, strategy,
                                                          params.criteria, params.weights,
                                                          params.top_k);
            double score = result.ranked.empty() ? 0.0 : result.ranked.front().score;
            metrics.record(result.trace, score, strategy);
            run.top_choice.push_back(result.chosen.value_or(std::string()));
            run.top_score.push_back(score);
            total_ns += result.trace.total_ns();
        }
        run.selections = ids.size();
        run.mean_latency_ns =
            ids.empty() ? 0.0 : static_cast<double>(total_ns) / static_cast<double>(ids.size());
        outcome.runs.push_back(std::move(run));
    }
    outcome.metrics = metrics.report();
    return outcome;
}

// Collapse a metrics CSV into per-band totals across all strategy rows.
inline std::string rate_histogram(const std::string& metrics_csv) {
    std::vector<std::string> lines;
    std::size_t begin = 0;
    while (begin <= metrics_csv.size()) {
        std::size_t end = metrics_csv.find('\n', begin);
        if (end == std::string::npos) end = metrics_csv.size();
        if (end > begin) lines.push_back(metrics_csv.substr(begin, end - begin));
        begin = end + 1;
    }
    if (lines.empty()) raise(ErrorCode::InvalidConfig, "metrics CSV is empty");

    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(start));
                return cells;
            }
            cells.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
    };

    const std::vector<std::string> header = split(lines.front());
    const char* bands[] = {"excellent", "good", "average", "poor"};
    std::size_t column[4];
    for (std::size_t b = 0; b < 4; ++b) {
        auto it = std::find(header.begin(), header.end(), bands[b]);
        if (it == header.end()) {
            raise(ErrorCode::InvalidConfig, std::string("metrics CSV lacks column '") + bands[b] +
                                                "'");
        }
        column[b] = static_cast<std::size_t>(it - header.begin());
    }

    std::uint64_t totals[4] = {0, 0, 0, 0};
    for (std::size_t row = 1; row < lines.size(); ++row) {
        const std::vector<std::string> cells = split(lines[row]);
        if (cells.size() != header.size()) {
            raise(ErrorCode::InvalidConfig,
                  "metrics CSV row " + std::to_string(row) + " has wrong cell count");
        }
        for (std::size_t b = 0; b < 4; ++b) {
            totals[b] += parse_uint(cells[column[b]], ErrorCode::InvalidConfig);
        }
    }

    std::string out = "band,count\n";
    for (std::size_t b = 0; b < 4; ++b) {
        out += bands[b];
        out += ',';
        out += std::to_string(totals[b]);
        out += '\n';
    }
    return out;
}

}  // namespace ria::bench
