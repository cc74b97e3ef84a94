#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chainprop/analytic.hpp"
#include "chainprop/propsim.hpp"
#include "chainprop/rng.hpp"

namespace chainprop {

// Fraction of repetitions with an event, with a 95% normal-approximation interval.
struct Frequency {
    double value = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t hits = 0;

    static Frequency from_counts(std::size_t hits, std::size_t trials);
    double standard_error(std::size_t trials) const;
};

struct ForkStatistics {
    double delta = 0.0;
    std::size_t repetitions = 0;
    std::uint64_t seed = 0;
    std::vector<double> times;         // interval starts 0, delta, 2 delta, ...
    std::vector<Frequency> interval;   // >= 1 conflicting block in [t, t + delta)
    std::vector<Frequency> cumulative; // >= 1 conflicting block in [0, t + delta)
};

struct ForkSimOptions {
    double pi_u = 0.0;
    double delta = 1.0;
    double horizon = 1.0;
    std::size_t repetitions = 1;
    std::uint64_t seed = 0;
    // Per-node mining rates in trace order; overrides pi_u when non-empty.
    std::vector<double> node_rates;
};

// Poisson mining on susceptible nodes. Repetition r mines over traces[r % traces.size()]
// using its own stream derived from (seed, r). A node is susceptible in [t, t + delta)
// when its receive time exceeds t.
ForkStatistics simulate_forks(std::span<const PropagationTrace> traces, const ForkSimOptions& options);
ForkStatistics simulate_forks(const PropagationTrace& trace, const ForkSimOptions& options);

struct RaceOutcome {
    long honest = 0;
    long adversary = 0;
    long lead = 0;  // adversary - honest
    double window = 1.0;
};

RaceOutcome sample_race(double honest_rate, double adversary_rate, double window, Rng& rng);

struct RaceEstimate {
    int lead_required = 1;     // smallest k >= 1 with P(lead >= k) <= epsilon
    double tail_at_required = 0.0;
    std::optional<RobustLevel> analytic;  // absent where the closed form is singular
};

// Block race over a unit window between aggregate honest and adversary rates.
// Throws InvalidParameter when both rates are zero.
RaceEstimate estimate_race_lead(double honest_rate, double adversary_rate, double epsilon, std::size_t repetitions,
                                std::uint64_t seed);

// Race with honest rate gamma * activated and adversary rate lambda_adv * e_adv.
RaceEstimate estimate_robust_level_mc(double activated, const ModelParams& params, std::size_t repetitions,
                                      std::uint64_t seed);

}  // namespace chainprop
