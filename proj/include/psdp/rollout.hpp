#pragma once

#include "psdp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace psdp {

struct RolloutStats {
    double mean_cost = 0.0;
    double std_error = 0.0;
    std::size_t num_paths = 0;
    std::size_t horizon = 0;
    std::uint64_t seed = 0;
    const char* rng_algorithm = kRngAlgorithm;
};

namespace detail {

struct KahanAccumulator {
    double sum = 0.0;
    double compensation = 0.0;

    void add(double v) {
        const double y = v - compensation;
        const double t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    }
};

/// Runs `path_cost(path_index)` for every path, in parallel over fixed-size
/// chunks, and reduces with compensated summation in path order. Costs are
/// materialized per path so the two-pass variance is exact for identical
/// costs and the result does not depend on the thread count.
inline RolloutStats aggregate_paths(std::size_t num_paths, std::size_t horizon, std::uint64_t seed,
                                    const std::function<double(std::size_t)>& path_cost) {
    RolloutStats stats;
    stats.num_paths = num_paths;
    stats.horizon = horizon;
    stats.seed = seed;
    if (num_paths == 0)
        return stats;

    std::vector<double> costs(num_paths);
    constexpr std::size_t kChunk = 1024;
    const std::size_t num_chunks = (num_paths + kChunk - 1) / kChunk;
    const std::size_t num_threads =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), num_chunks));

    if (num_threads == 1) {
        for (std::size_t p = 0; p < num_paths; ++p)
            costs[p] = path_cost(p);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(num_threads);
        std::atomic<std::size_t> next_chunk{0};
        for (std::size_t w = 0; w < num_threads; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t chunk = next_chunk.fetch_add(1);
                    if (chunk >= num_chunks)
                        return;
                    const std::size_t begin = chunk * kChunk;
                    const std::size_t end = std::min(begin + kChunk, num_paths);
                    for (std::size_t p = begin; p < end; ++p)
                        costs[p] = path_cost(p);
                }
            });
        }
        for (auto& t : workers)
            t.join();
    }

    KahanAccumulator total;
    for (double c : costs)
        total.add(c);
    stats.mean_cost = total.sum / static_cast<double>(num_paths);

    if (num_paths > 1) {
        KahanAccumulator squares;
        for (double c : costs) {
            const double d = c - stats.mean_cost;
            squares.add(d * d);
        }
        const double variance = std::max(0.0, squares.sum / static_cast<double>(num_paths - 1));
        stats.std_error = std::sqrt(variance / static_cast<double>(num_paths));
    }
    return stats;
}

} // namespace detail

} // namespace psdp
