#include "chainprop/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chainprop/errors.hpp"
#include "chainprop/topology.hpp"

namespace chainprop {

namespace {

void require_layer(int j) {
    if (j < 0) throw InvalidParameter("layer index must be >= 0, got " + std::to_string(j));
}

// Index k with t == k*delta, or throws.
long grid_index(double t, double delta) {
    const double k = t / delta;
    const double rounded = std::round(k);
    if (std::abs(k - rounded) > 1e-9 * std::max(1.0, std::abs(k))) {
        throw DomainError("t must be a multiple of delta");
    }
    return static_cast<long>(rounded);
}

}  // namespace

void ModelParams::validate() const {
    if (!(beta > 0.0)) throw InvalidParameter("beta must be > 0");
    if (!(delta_s > 0.0)) throw InvalidParameter("delta_s must be > 0");
    if (!(delta_l >= delta_s)) throw InvalidParameter("delta_l must be >= delta_s");
    if (!(c > 0.0 && c <= 1.0)) throw InvalidParameter("c must lie in (0, 1]");
    if (!(delta > 0.0)) throw InvalidParameter("delta must be > 0");
    if (!(pi_u >= 0.0)) throw InvalidParameter("pi_u must be >= 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidParameter("epsilon must lie in (0, 1)");
    if (!(gamma > 0.0)) throw InvalidParameter("gamma must be > 0");
    if (!(lambda_adv > 0.0)) throw InvalidParameter("lambda_adv must be > 0");
    if (e_adv < 1) throw InvalidParameter("e_adv must be >= 1");
    if (!(horizon >= 0.0)) throw InvalidParameter("horizon must be >= 0");
}

LayerStats LayerStats::for_layer(int j) {
    require_layer(j);
    LayerStats s;
    s.j = j;
    s.population = static_cast<double>(analytic_layer_population(j));
    s.pair_count = j == 0 ? 0.0 : static_cast<double>(analytic_layer_population(j - 1)) * s.population;
    s.contact_rate = 4.0 / (s.population - 1.0);
    return s;
}

double pair_count_closed_form(int j) {
    require_layer(j);
    return 9.0 * std::ldexp(1.0, 4 * j - 4) + 9.0 * std::ldexp(1.0, 3 * j - 3) + std::ldexp(1.0, 2 * j - 1);
}

double long_link_layer_probability(int j, double beta) {
    if (j < 2) throw InvalidParameter("long-link layer probability is defined for j >= 2");
    if (!(beta > 0.0)) throw InvalidParameter("beta must be > 0");
    const double q = std::pow(3.0 * std::ldexp(1.0, j - 1), -beta);
    // (1-q)^f via log1p keeps the tiny-q regime (large beta) exact.
    return -std::expm1(pair_count_closed_form(j) * std::log1p(-q));
}

double tau_long(int j, const ModelParams& params) {
    switch (params.tau_policy) {
        case TauPolicy::fixed:
            return params.delta_l;
        case TauPolicy::offset:
            return params.delta_l + params.c * params.delta_s * std::ldexp(1.0, j - 2);
    }
    return params.delta_l;
}

double adjacent_propagation_time(int j, const ModelParams& params) {
    require_layer(j);
    if (j <= 1) return params.delta_s;
    const double p_long = long_link_layer_probability(j, params.beta);
    const double short_part = params.c * params.delta_s * std::ldexp(1.0, j - 2);
    return p_long * tau_long(j, params) + (1.0 - p_long) * short_part;
}

double activation_time(int j, const ModelParams& params) {
    require_layer(j);
    if (j == 0) return params.delta_s;
    double t = 2.0 * params.delta_s;
    for (int k = 2; k <= j; ++k) t += adjacent_propagation_time(k, params);
    return t;
}

ActivationSchedule ActivationSchedule::build(int max_layer, const ModelParams& params) {
    require_layer(max_layer);
    ActivationSchedule s;
    s.max_layer = max_layer;
    double t = 0.0;
    for (int j = 0; j <= max_layer; ++j) {
        const double apt = adjacent_propagation_time(j, params);
        t += apt;
        s.apt.push_back(apt);
        s.cumulative.push_back(t);
    }
    return s;
}

double local_activation_degree(double omega, const LayerStats& stats) {
    const double n = stats.population;
    return n / (1.0 + (n - 1.0) * std::exp(-stats.contact_rate * n * omega));
}

double local_activation_degree(int j, double omega) {
    if (j < 1) throw InvalidParameter("local activation degree is defined for layers j >= 1");
    if (omega < 0.0) throw DomainError("elapsed time must be >= 0");
    return local_activation_degree(omega, LayerStats::for_layer(j));
}

double global_activation_degree(double t, const ModelParams& params, const ActivationSchedule& schedule,
                                double total) {
    if (t < 0.0) throw DomainError("activation degree is defined for t >= 0");
    const int last = schedule.max_layer;
    double degree = 1.0;
    if (t >= schedule.at(0)) degree = 5.0;
    if (last >= 1 && t >= schedule.at(1)) degree = 13.0;
    if (last >= 2 && t >= schedule.at(2)) {
        const int first = params.variant == ActivationVariant::paper_literal ? 3 : 2;
        for (int j = first; j <= last; ++j) {
            if (t < schedule.at(j)) break;
            degree += local_activation_degree(j, t - schedule.at(j));
        }
    }
    return std::min(degree, total);
}

double susceptible_count(double t, double total, const ModelParams& params, const ActivationSchedule& schedule) {
    return std::max(0.0, total - global_activation_degree(t, params, schedule, total));
}

double fork_probability(double rate_sum, double delta) {
    if (!(delta > 0.0)) throw InvalidParameter("interval length must be > 0");
    if (rate_sum < 0.0) throw InvalidParameter("mining rate must be >= 0");
    return -std::expm1(-delta * rate_sum);
}

double fork_prob_unit(double t, const ModelParams& params, const ActivationSchedule& schedule, double total) {
    return fork_probability(susceptible_count(t, total, params, schedule) * params.pi_u, params.delta);
}

double fork_prob_cumulative(double t, const ModelParams& params, const ActivationSchedule& schedule,
                            double total) {
    if (!(params.delta > 0.0)) throw InvalidParameter("interval length must be > 0");
    if (t < 0.0) throw DomainError("t must be >= 0");
    const long last = grid_index(t, params.delta);
    if (params.horizon > 0.0 && t > params.horizon - params.delta + 1e-9 * params.delta) {
        throw DomainError("t must not exceed horizon - delta");
    }
    double susceptible_sum = 0.0;
    for (long k = 0; k <= last; ++k) {
        susceptible_sum += susceptible_count(static_cast<double>(k) * params.delta, total, params, schedule);
    }
    return fork_probability(params.pi_u * susceptible_sum, params.delta);
}

RobustLevel robust_level_for_degree(double activated, const ModelParams& params, LogBase base) {
    const double ratio = params.gamma * activated / (params.lambda_adv * static_cast<double>(params.e_adv));
    if (!(ratio > 0.0)) throw DomainError("honest/adversary power ratio must be > 0");
    if (ratio == 1.0) throw SingularityError("honest/adversary power ratio equals 1; robust level is unbounded");
    const auto lg = [base](double x) { return base == LogBase::natural ? std::log(x) : std::log10(x); };
    RobustLevel out;
    out.value = -lg(params.epsilon) / lg(ratio);
    out.regime = ratio > 1.0 ? RobustLevel::Regime::valid : RobustLevel::Regime::honest_minority;
    return out;
}

RobustLevel robust_level(double t, const ModelParams& params, const ActivationSchedule& schedule, double total,
                         LogBase base) {
    return robust_level_for_degree(global_activation_degree(t, params, schedule, total), params, base);
}

}  // namespace chainprop
