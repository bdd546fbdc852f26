#pragma once

// Finite-statistics coincidence counts. Every setting draws from its own
// counter-based stream keyed by (seed, setting_index), so results do not depend
// on evaluation order.

#include <cstdint>

namespace homtomo {

struct TrialPlan {
    std::uint64_t trials_per_setting;
    std::uint64_t seed;
};

struct RateEstimate {
    std::uint64_t count;
    std::uint64_t trials;
    double rate;
    double std_error;
};

/// count ~ Binomial(trials, p); rate = count / trials,
/// std_error = sqrt(rate (1 - rate) / trials).
RateEstimate sample_rate(double p, const TrialPlan& plan, std::uint64_t setting_index);

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace homtomo
