#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chainprop/analytic.hpp"
#include "chainprop/forksim.hpp"
#include "chainprop/topology.hpp"

namespace chainprop {

inline constexpr const char* version = "0.1.0";

enum class Scenario { activation_degree, fork_unit, fork_cumulative, robust_level };

Scenario parse_scenario(const std::string& name);
std::string to_string(Scenario s);
ActivationVariant parse_variant(const std::string& name);
std::string to_string(ActivationVariant v);
TauPolicy parse_tau_policy(const std::string& name);
std::string to_string(TauPolicy p);

struct ExperimentConfig {
    Scenario scenario = Scenario::activation_degree;
    GridShape shape = GridShape::diamond(8);
    std::vector<double> beta_values{1.0};
    // 1.0 keeps delta_s/delta_l as configured; 1.1 scales both by 1.1.
    std::vector<double> delay_ratio_values{1.0};
    std::size_t repetitions = 50;
    std::uint64_t seed = 1;
    // beta is taken per cell from beta_values. delta defaults to delta_s.
    ModelParams model{};
    bool pi_u_auto = true;         // pi_u = 1 / (10 * delta_s * N_total)
    bool adjacent_layer_scope = false;
    std::size_t race_repetitions = 2000;
    std::filesystem::path output_dir = "out";

    // Throws ConfigError.
    void validate() const;
    // Canonical text of every field that affects results (output_dir excluded).
    std::string canonical() const;
    std::uint64_t hash() const;
};

// Flat INI-style text: [experiment], [model] and [variants] sections of
// `key = value` lines. Unknown sections or keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct CurveComparison {
    double max_abs_gap = 0.0;
    double mean_abs_gap = 0.0;
    double fraction_within_ci = 0.0;
};

// Analytic series against a simulated mean with its CI band, on a shared grid.
// Throws MismatchError when the grids differ.
CurveComparison compare_curves(const std::vector<double>& analytic_times, const std::vector<double>& analytic,
                               const std::vector<double>& simulated_times, const std::vector<double>& simulated_mean,
                               const std::vector<double>& ci_lo, const std::vector<double>& ci_hi);

struct MeanWithCi {
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

MeanWithCi mean_with_ci(const std::vector<double>& samples);

struct CellResult {
    double beta = 0.0;
    double delay_ratio = 1.0;
    ModelParams params{};
    double total = 0.0;
    std::vector<double> times;

    std::vector<double> analytic_I;
    std::vector<MeanWithCi> sim_I;

    std::vector<double> analytic_fr;
    std::vector<double> analytic_FR;
    std::optional<ForkStatistics> sim_forks;

    std::vector<std::optional<RobustLevel>> theta;
    std::vector<int> mc_k;

    std::optional<double> analytic_full_activation;  // first grid time with I(t) = total
    double sim_mean_full_activation = 0.0;           // mean of per-run max receive time
    CurveComparison activation_gap{};
    std::filesystem::path csv_path;
};

struct RunReport {
    ExperimentConfig config;
    std::uint64_t config_hash = 0;
    double delta = 0.0;
    double horizon = 0.0;  // T_all
    std::vector<CellResult> cells;
    std::filesystem::path summary_path;
};

// Runs every (beta, delay ratio) cell and writes one CSV per cell plus
// summary.txt into config.output_dir. Deterministic given the config.
RunReport run_experiment(const ExperimentConfig& config);

// Invariant checks over a finished run; returns one message per violation.
std::vector<std::string> check_report(const RunReport& report);

// Shortest round-trip decimal text for CSV output.
std::string format_number(double v);

}  // namespace chainprop
