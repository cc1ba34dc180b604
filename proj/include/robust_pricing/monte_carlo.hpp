#pragma once

// Seeded, schedule-independent Monte Carlo accumulation.
//
// Samples are split into fixed-size chunks; chunk i draws from its own
// generator seeded from (seed, i), and partial statistics are merged in chunk
// order. The result is bit-identical whatever the number of worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace robust_pricing {

inline constexpr std::uint64_t kChunkSize = 1u << 15;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Per-chunk random stream. Uniforms use the top 53 bits so they do not depend
/// on the standard library's distribution implementations.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t chunk) : engine_(splitmix64(seed ^ splitmix64(chunk + 1))) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/// Running mean and sum of squared deviations (Welford), mergeable (Chan et al.).
struct RunningStats {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const RunningStats& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(n + o.n);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / total;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
    }

    double sample_variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const { return n > 0 ? std::sqrt(sample_variance() / static_cast<double>(n)) : 0.0; }
};

inline unsigned worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Runs `body(stream, stats_array)` once per sample, chunked as described above.
/// `Stats` is an aggregate of RunningStats with a merge(const Stats&) member.
template <class Stats, class Body>
Stats run_chunked(std::uint64_t n_samples, std::uint64_t seed, Body body) {
    const std::uint64_t n_chunks = (n_samples + kChunkSize - 1) / kChunkSize;
    std::vector<Stats> partial(n_chunks);
    auto run_chunk = [&](std::uint64_t c) {
        Stream stream(seed, c);
        const std::uint64_t begin = c * kChunkSize;
        const std::uint64_t end = std::min(n_samples, begin + kChunkSize);
        for (std::uint64_t i = begin; i < end; ++i) body(stream, partial[c]);
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), n_chunks));
    if (workers <= 1) {
        for (std::uint64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::uint64_t c = w; c < n_chunks; c += workers) run_chunk(c);
            });
        for (auto& t : pool) t.join();
    }
    Stats total{};
    for (const auto& p : partial) total.merge(p);
    return total;
}

}  // namespace robust_pricing
