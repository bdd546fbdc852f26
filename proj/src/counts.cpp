#include "homtomo/counts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "homtomo/error.hpp"

namespace homtomo {

namespace {

constexpr double kProbabilityTol = 1e-12;
constexpr double kTwo64 = 18446744073709551616.0;

}  // namespace

RateEstimate sample_rate(double p, const TrialPlan& plan, std::uint64_t setting_index) {
    if (!(p >= -kProbabilityTol && p <= 1.0 + kProbabilityTol)) {
        std::ostringstream msg;
        msg << "probability " << p << " outside [0, 1]";
        fail(ErrorKind::invalid_argument, msg.str());
    }
    require(plan.trials_per_setting >= 1, ErrorKind::invalid_argument, "trials_per_setting must be >= 1");
    p = std::clamp(p, 0.0, 1.0);

    std::uint64_t count = 0;
    if (p >= 1.0) {
        count = plan.trials_per_setting;
    } else if (p > 0.0) {
        // Bernoulli trial i succeeds iff u_i < p * 2^64; exact integer comparison.
        const double scaled = std::ldexp(p, 64);
        const std::uint64_t threshold = scaled >= kTwo64 ? std::numeric_limits<std::uint64_t>::max()
                                                         : static_cast<std::uint64_t>(scaled);
        const std::uint64_t key = mix64(plan.seed ^ mix64(setting_index ^ 0x6a09e667f3bcc909ULL));
        for (std::uint64_t i = 0; i < plan.trials_per_setting; ++i) {
            if (mix64(key + i * 0x9e3779b97f4a7c15ULL) < threshold) {
                ++count;
            }
        }
    }
    const double trials = static_cast<double>(plan.trials_per_setting);
    const double rate = static_cast<double>(count) / trials;
    return RateEstimate{count, plan.trials_per_setting, rate, std::sqrt(rate * (1.0 - rate) / trials)};
}

}  // namespace homtomo
