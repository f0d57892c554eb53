#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ria {

// splitmix64. Standard-library engines and distributions are not
// bit-reproducible across implementations, and seeded runs must produce
// byte-identical corpora on any machine, so the generator is pinned here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) {
        // Rejection on the biased tail keeps the draw uniform.
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t next_between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_double_between(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    std::uint64_t fork() { return next_u64(); }

private:
    std::uint64_t state_;
};

// Rank-frequency sampler over {0, .., size-1} with weight 1/(rank+1)^s,
// inverse-CDF via binary search on the cumulative table.
class ZipfSampler {
public:
    ZipfSampler(std::size_t size, double exponent) : cumulative_(size) {
        double total = 0.0;
        for (std::size_t rank = 0; rank < size; ++rank) {
            total += 1.0 / std::pow(static_cast<double>(rank + 1), exponent);
            cumulative_[rank] = total;
        }
        for (auto& c : cumulative_) c /= total;
        cumulative_.back() = 1.0;
    }

    std::size_t sample(Rng& rng) const {
        double u = rng.next_double();
        std::size_t lo = 0, hi = cumulative_.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cumulative_[mid] < u) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        return lo;
    }

private:
    std::vector<double> cumulative_;
};

}  // namespace ria
