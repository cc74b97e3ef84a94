#pragma once

#include <cstdint>
#include <vector>

namespace chainprop {

// How long layer j takes to hear the chain over a long-range link.
enum class TauPolicy {
    fixed,   // tau = delta_l: the first activated node of layer j-1 holds the long link
    offset,  // tau = delta_l + c * delta_s * 2^(j-2): the long link sits one relay away
};

// Which layers contribute logistic growth once layer 2 is reached.
enum class ActivationVariant {
    paper_literal,   // constant 13, logistic terms from layer 3
    include_layer2,  // constant 13, logistic terms from layer 2
};

struct ModelParams {
    double beta = 1.0;
    double delta_s = 1.0;
    double delta_l = 1.5;
    double c = 1.0;         // discounting factor on the short-range traversal
    double delta = 1.0;     // interval length for fr/FR
    double pi_u = 0.0;      // per-node mining rate
    double epsilon = 0.1;   // vulnerability threshold
    double gamma = 1.0;     // honest per-node computing power
    double lambda_adv = 1.0;
    int e_adv = 20;
    TauPolicy tau_policy = TauPolicy::fixed;
    ActivationVariant variant = ActivationVariant::paper_literal;
    double horizon = 0.0;   // T_all; 0 means unbounded

    // Throws InvalidParameter on any violated range.
    void validate() const;
};

struct LayerStats {
    int j = 0;
    double population = 0.0;    // N_j
    double pair_count = 0.0;    // f_j = N_{j-1} * N_j
    double contact_rate = 0.0;  // alpha_j = 4 / (N_j - 1)

    static LayerStats for_layer(int j);
};

// Closed form 9*2^(4j-4) + 9*2^(3j-3) + 2^(2j-1). Agrees with N_{j-1} N_j for j >= 2.
double pair_count_closed_form(int j);

// Lower bound on P_l^j: 1 - (1 - (3*2^(j-1))^-beta)^{f_j}, for j >= 2.
double long_link_layer_probability(int j, double beta);

double tau_long(int j, const ModelParams& params);

// E[T_j]. Layers 0 and 1 take exactly delta_s; deeper layers use the
// lower-bound expression as a point estimate, so the result is optimistic.
double adjacent_propagation_time(int j, const ModelParams& params);

// E[T(j)], the absolute time layer j first hears the chain.
double activation_time(int j, const ModelParams& params);

struct ActivationSchedule {
    std::vector<double> apt;         // index j -> E[T_j]
    std::vector<double> cumulative;  // index j -> E[T(j)]
    int max_layer = 0;

    static ActivationSchedule build(int max_layer, const ModelParams& params);
    double at(int j) const { return cumulative.at(static_cast<std::size_t>(j)); }
};

// Logistic solution of dI/dw = alpha_j I (N_j - I), I(0) = 1.
double local_activation_degree(int j, double omega);
double local_activation_degree(double omega, const LayerStats& stats);

// I(t), clamped to `total`. I(0) = 1 (the creator alone).
double global_activation_degree(double t, const ModelParams& params, const ActivationSchedule& schedule,
                                double total);

// S(t) = total - I(t), floored at 0.
double susceptible_count(double t, double total, const ModelParams& params, const ActivationSchedule& schedule);

// 1 - exp(-delta * lambda) for aggregate susceptible mining rate lambda.
double fork_probability(double rate_sum, double delta);

// fr(t) under uniform computing power.
double fork_prob_unit(double t, const ModelParams& params, const ActivationSchedule& schedule, double total);

// FR(t) = 1 - exp(-delta * pi_u * sum_{w = 0, delta, ..., t} S(w)). `t` must be a
// multiple of delta in [0, horizon - delta].
double fork_prob_cumulative(double t, const ModelParams& params, const ActivationSchedule& schedule,
                            double total);

enum class LogBase { natural, ten };

struct RobustLevel {
    enum class Regime {
        valid,            // gamma I / (Lambda e) > 1
        honest_minority,  // ratio in (0, 1): the formula turns negative
    };
    double value = 0.0;
    Regime regime = Regime::valid;
};

// theta = -log(epsilon) / log(gamma I / (Lambda e)).
// Throws DomainError for ratio <= 0 and SingularityError for ratio == 1.
RobustLevel robust_level_for_degree(double activated, const ModelParams& params, LogBase base = LogBase::natural);

RobustLevel robust_level(double t, const ModelParams& params, const ActivationSchedule& schedule, double total,
                         LogBase base = LogBase::natural);

}  // namespace chainprop
