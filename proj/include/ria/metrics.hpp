#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "ria/error.hpp"
#include "ria/format.hpp"
#include "ria/model.hpp"
#include "ria/rng.hpp"

namespace ria {

enum class SelectionStrategy { Normal = 0, Exited = 1, Expected = 2 };

inline const char* to_string(SelectionStrategy strategy) {
    switch (strategy) {
        case SelectionStrategy::Normal: return "normal";
        case SelectionStrategy::Exited: return "exited";
        case SelectionStrategy::Expected: return "expected";
    }
    return "expected";
}

inline SelectionStrategy strategy_from_string(std::string_view name) {
    if (name == "normal") return SelectionStrategy::Normal;
    if (name == "exited") return SelectionStrategy::Exited;
    if (name == "expected") return SelectionStrategy::Expected;
    raise(ErrorCode::InvalidStrategy, "'" + std::string(name) +
                                          "' (expected normal|exited|expected)");
}

// S = (D - M - F) / 3: one third of the candidates that survive mapping and
// filtering.
inline double stage_aggregate(std::uint64_t d, std::uint64_t m, std::uint64_t f) {
    if (m + f > d) {
        raise(ErrorCode::NegativeSurvivors,
              "m+f=" + std::to_string(m + f) + " exceeds d=" + std::to_string(d));
    }
    return static_cast<double>(d - m - f) / 3.0;
}

// Rating bands over a [0,1] score.
inline QosBand rate(double score) {
    if (!(score >= 0.0 && score <= 1.0)) {
        raise(ErrorCode::OutOfRange, "score " + format_double(score));
    }
    if (score >= 0.85) return QosBand::Excellent;
    if (score >= 0.65) return QosBand::Good;
    if (score >= 0.40) return QosBand::Average;
    return QosBand::Poor;
}

struct StrategyReport {
    SelectionStrategy strategy = SelectionStrategy::Normal;
    std::uint64_t count = 0;
    std::uint64_t mean_ns = 0;
    std::uint64_t median_ns = 0;
    std::uint64_t p95_ns = 0;
    double throughput_rps = 0.0;
    double mean_s = 0.0;
    std::array<std::uint64_t, 4> bands{};  // indexed by QosBand

    std::uint64_t band(QosBand b) const { return bands[static_cast<std::size_t>(b)]; }
};

struct MetricsReport {
    std::vector<StrategyReport> rows;  // strategies with at least one record

    static constexpr const char* kCsvHeader =
        "strategy,count,mean_ns,median_ns,p95_ns,throughput_rps,mean_s,"
        "excellent,good,average,poor";

    std::string to_csv() const {
        std::string out = kCsvHeader;
        out.push_back('\n');
        for (const auto& row : rows) {
            out += to_string(row.strategy);
            out.push_back(',');
            out += std::to_string(row.count);
            out.push_back(',');
            out += std::to_string(row.mean_ns);
            out.push_back(',');
            out += std::to_string(row.median_ns);
            out.push_back(',');
            out += std::to_string(row.p95_ns);
            out.push_back(',');
            out += format_fixed(row.throughput_rps, 3);
            out.push_back(',');
            out += format_fixed(row.mean_s, 6);
            out.push_back(',');
            out += std::to_string(row.band(QosBand::Excellent));
            out.push_back(',');
            out += std::to_string(row.band(QosBand::Good));
            out.push_back(',');
            out += std::to_string(row.band(QosBand::Average));
            out.push_back(',');
            out += std::to_string(row.band(QosBand::Poor));
            out.push_back('\n');
        }
        return out;
    }
};

// Accumulates per-strategy latency, aggregate and rating-band counters.
// record() is called from concurrent pipeline executions; report() returns
// a consistent snapshot.
class MetricsRegistry {
public:
    static constexpr std::size_t kReservoirCapacity = 65536;

    void record(const StageTrace& trace, double final_score, SelectionStrategy strategy) {
        std::uint64_t latency = trace.total_ns();
        std::int64_t now = monotonic_now_ns();
        QosBand band = rate(std::clamp(final_score, 0.0, 1.0));

        std::lock_guard lock(mutex_);
        Slot& slot = slots_[static_cast<std::size_t>(strategy)];
        slot.count += 1;
        slot.latency_sum += latency;
        slot.s_sum += trace.s_aggregate;
        slot.bands[static_cast<std::size_t>(band)] += 1;
        if (slot.count == 1) slot.first_ns = now;
        slot.last_ns = now;

        // Bounded reservoir (algorithm R) for the percentile samples.
        if (slot.samples.size() < kReservoirCapacity) {
            slot.samples.push_back(latency);
        } else {
            std::uint64_t j = slot.rng.next_below(slot.count);
            if (j < kReservoirCapacity) slot.samples[j] = latency;
        }
    }

    MetricsReport report() const {
        std::lock_guard lock(mutex_);
        MetricsReport report;
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            const Slot& slot = slots_[i];
            if (slot.count == 0) continue;
            StrategyReport row;
            row.strategy = static_cast<SelectionStrategy>(i);
            row.count = slot.count;
            row.mean_ns = static_cast<std::uint64_t>(
                slot.latency_sum / static_cast<long double>(slot.count) + 0.5L);
            std::vector<std::uint64_t> sorted = slot.samples;
            std::sort(sorted.begin(), sorted.end());
            row.median_ns = nearest_rank(sorted, 0.50);
            row.p95_ns = nearest_rank(sorted, 0.95);
            row.throughput_rps = throughput(slot);
            row.mean_s = static_cast<double>(slot.s_sum / static_cast<long double>(slot.count));
            row.bands = slot.bands;
            report.rows.push_back(row);
        }
        return report;
    }

private:
    struct Slot {
        std::uint64_t count = 0;
        long double latency_sum = 0.0L;
        long double s_sum = 0.0L;
        std::array<std::uint64_t, 4> bands{};
        std::vector<std::uint64_t> samples;
        std::int64_t first_ns = 0;
        std::int64_t last_ns = 0;
        Rng rng{0x5eedf00dULL};
    };

    static std::uint64_t nearest_rank(const std::vector<std::uint64_t>& sorted, double p) {
        if (sorted.empty()) return 0;
        auto rank = static_cast<std::size_t>(
            std::ceil(p * static_cast<double>(sorted.size())));
        rank = std::clamp<std::size_t>(rank, 1, sorted.size());
        return sorted[rank - 1];
    }

    static double throughput(const Slot& slot) {
        std::int64_t span = slot.last_ns - slot.first_ns;
        if (span > 0) {
            return static_cast<double>(slot.count) * 1e9 / static_cast<double>(span);
        }
        // Single record (or zero span): rate implied by the mean latency.
        long double mean = slot.latency_sum / static_cast<long double>(slot.count);
        if (mean <= 0.0L) return 0.0;
        return static_cast<double>(1e9L / mean);
    }

    mutable std::mutex mutex_;
    std::array<Slot, 3> slots_;
};

}  // namespace ria
