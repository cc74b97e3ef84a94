#include "chainprop/forksim.hpp"

#include <algorithm>
#include <cmath>

#include "chainprop/errors.hpp"

namespace chainprop {

namespace {

constexpr double z95 = 1.959963984540054;

}  // namespace

Frequency Frequency::from_counts(std::size_t hits, std::size_t trials) {
    Frequency f;
    f.hits = hits;
    if (trials == 0) return f;
    f.value = static_cast<double>(hits) / static_cast<double>(trials);
    const double half = z95 * f.standard_error(trials);
    f.ci_lo = std::max(0.0, f.value - half);
    f.ci_hi = std::min(1.0, f.value + half);
    return f;
}

double Frequency::standard_error(std::size_t trials) const {
    return std::sqrt(value * (1.0 - value) / static_cast<double>(trials));
}

ForkStatistics simulate_forks(std::span<const PropagationTrace> traces, const ForkSimOptions& options) {
    if (traces.empty()) throw InvalidParameter("at least one trace is required");
    if (!(options.delta > 0.0)) throw InvalidParameter("interval length must be > 0");
    if (options.horizon < options.delta) throw InvalidParameter("horizon must be >= delta");
    if (!(options.pi_u >= 0.0)) throw InvalidParameter("mining rate must be >= 0");
    if (options.repetitions < 1) throw InvalidParameter("repetitions must be >= 1");
    const std::size_t nodes = traces.front().size();
    for (const auto& tr : traces) {
        if (tr.size() != nodes) throw MismatchError("traces differ in node count");
    }
    if (!options.node_rates.empty() && options.node_rates.size() != nodes) {
        throw MismatchError("node_rates must have one entry per node");
    }

    std::vector<double> mine_prob(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double rate = options.node_rates.empty() ? options.pi_u : options.node_rates[i];
        if (rate < 0.0) throw InvalidParameter("mining rate must be >= 0");
        mine_prob[i] = -std::expm1(-rate * options.delta);
    }

    const auto intervals = static_cast<std::size_t>(std::floor(options.horizon / options.delta + 1e-9));
    std::vector<std::size_t> interval_hits(intervals, 0);
    std::vector<std::size_t> first_fork_hist(intervals, 0);

    for (std::size_t r = 0; r < options.repetitions; ++r) {
        const PropagationTrace& trace = traces[r % traces.size()];
        Rng rng(derive_seed(options.seed, Stream::mining, r));
        bool forked_before = false;
        for (std::size_t k = 0; k < intervals; ++k) {
            const double t = static_cast<double>(k) * options.delta;
            bool forked = false;
            for (std::size_t i = 0; i < nodes && !forked; ++i) {
                if (trace.receive_time[i] > t && mine_prob[i] > 0.0) forked = rng.bernoulli(mine_prob[i]);
            }
            if (!forked) continue;
            ++interval_hits[k];
            if (!forked_before) {
                ++first_fork_hist[k];
                forked_before = true;
            }
        }
    }

    ForkStatistics stats;
    stats.delta = options.delta;
    stats.repetitions = options.repetitions;
    stats.seed = options.seed;
    std::size_t cumulative_hits = 0;
    for (std::size_t k = 0; k < intervals; ++k) {
        cumulative_hits += first_fork_hist[k];
        stats.times.push_back(static_cast<double>(k) * options.delta);
        stats.interval.push_back(Frequency::from_counts(interval_hits[k], options.repetitions));
        stats.cumulative.push_back(Frequency::from_counts(cumulative_hits, options.repetitions));
    }
    return stats;
}

ForkStatistics simulate_forks(const PropagationTrace& trace, const ForkSimOptions& options) {
    return simulate_forks(std::span<const PropagationTrace>(&trace, 1), options);
}

RaceOutcome sample_race(double honest_rate, double adversary_rate, double window, Rng& rng) {
    RaceOutcome out;
    out.window = window;
    out.honest = rng.poisson(honest_rate * window);
    out.adversary = rng.poisson(adversary_rate * window);
    out.lead = out.adversary - out.honest;
    return out;
}

RaceEstimate estimate_race_lead(double honest_rate, double adversary_rate, double epsilon, std::size_t repetitions,
                                std::uint64_t seed) {
    if (honest_rate < 0.0 || adversary_rate < 0.0) throw InvalidParameter("race rates must be >= 0");
    if (honest_rate == 0.0 && adversary_rate == 0.0) throw InvalidParameter("race rates are both zero");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidParameter("epsilon must lie in (0, 1)");
    if (repetitions < 1) throw InvalidParameter("repetitions must be >= 1");

    Rng rng(derive_seed(seed, Stream::race, 0));
    std::vector<long> leads(repetitions);
    for (auto& lead : leads) lead = sample_race(honest_rate, adversary_rate, 1.0, rng).lead;
    std::sort(leads.begin(), leads.end());

    const auto n = static_cast<double>(repetitions);
    RaceEstimate est;
    for (long k = 1;; ++k) {
        const auto at_least = leads.end() - std::lower_bound(leads.begin(), leads.end(), k);
        const double tail = static_cast<double>(at_least) / n;
        if (tail <= epsilon) {
            est.lead_required = static_cast<int>(k);
            est.tail_at_required = tail;
            break;
        }
    }
    return est;
}

RaceEstimate estimate_robust_level_mc(double activated, const ModelParams& params, std::size_t repetitions,
                                      std::uint64_t seed) {
    if (activated < 1.0) throw InvalidParameter("activated count must be >= 1");
    RaceEstimate est = estimate_race_lead(params.gamma * activated, params.lambda_adv * params.e_adv,
                                          params.epsilon, repetitions, seed);
    try {
        est.analytic = robust_level_for_degree(activated, params);
    } catch (const DomainError&) {
        est.analytic.reset();
    }
    return est;
}

}  // namespace chainprop
