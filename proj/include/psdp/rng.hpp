#pragma once

#include <cstdint>
#include <vector>

namespace psdp {

/// Identifier of the generator below, recorded in reports and CSV output so
/// results can be tied to the exact bit stream that produced them.
inline constexpr const char* kRngAlgorithm = "splitmix64-ctr-v1";

/// Counter-based generator: output k of stream (seed, stream) is the
/// SplitMix64 finalizer applied to a mix of seed, stream, and k. Streams are
/// independent by construction and any output can be computed directly from
/// its index, so parallel consumers never share state.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : base_(mix(seed ^ 0x9e3779b97f4a7c15ULL, stream)) {}

    std::uint64_t next_u64() { return at(counter_++); }

    /// Output at an absolute counter position, independent of calls so far.
    std::uint64_t at(std::uint64_t counter) const { return finalize(base_ + counter * 0x9e3779b97f4a7c15ULL); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    /// Index drawn from a finite distribution given by nonnegative weights
    /// summing to ~1 (inverse CDF walk; the last index absorbs roundoff).
    std::size_t next_index(const std::vector<double>& probs) {
        const double u = next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc)
                return i;
        }
        return probs.empty() ? 0 : probs.size() - 1;
    }

private:
    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        return finalize(finalize(a) ^ (b + 0x9e3779b97f4a7c15ULL));
    }

    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

} // namespace psdp
