// chainprop command line: run and validate experiment configs, export topologies.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chainprop/errors.hpp"
#include "chainprop/harness.hpp"
#include "chainprop/topology.hpp"

namespace {

enum ExitCode : int { ok = 0, config_error = 1, runtime_error = 2, check_failed = 3 };

}  // namespace

int main(int argc, char** argv) {
    using namespace chainprop;

    CLI::App app{"Main-chain propagation and fork analysis on lattice overlays"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));

    auto* run = app.add_subcommand("run", "Run an experiment and write CSVs plus summary.txt");
    std::string run_config;
    std::string scenario;
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    std::string out_dir;
    std::string variant;
    bool check = false;
    run->add_option("--config", run_config, "Experiment config file")->required()->check(CLI::ExistingFile);
    auto* scenario_opt = run->add_option("--scenario", scenario, "Override the scenario");
    auto* seed_opt = run->add_option("--seed", seed, "Override the base seed");
    auto* reps_opt = run->add_option("--reps", reps, "Override the repetition count");
    auto* out_opt = run->add_option("--out", out_dir, "Override the output directory");
    auto* variant_opt = run->add_option("--variant", variant, "Activation-degree variant")
                            ->check(CLI::IsMember({"paper_literal", "include_layer2"}));
    run->add_flag("--check", check, "Exit with status 3 when run invariants fail");

    auto* validate = app.add_subcommand("validate", "Parse and validate a config file");
    std::string validate_config;
    validate->add_option("--config", validate_config, "Experiment config file")->required();

    auto* export_topo = app.add_subcommand("export-topology", "Sample a topology and print its edge list");
    std::string shape_text;
    double beta = 1.0;
    std::uint64_t topo_seed = 0;
    std::string scope_text = "all_pairs";
    std::string topo_out;
    export_topo->add_option("--shape", shape_text, "square:N or diamond:R")->required();
    export_topo->add_option("--beta", beta, "Long-range factor")->required();
    export_topo->add_option("--seed", topo_seed, "Sampling seed")->required();
    export_topo->add_option("--scope", scope_text, "all_pairs or adjacent_layers:X:Y");
    export_topo->add_option("--out", topo_out, "Output file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    ExperimentConfig config;
    try {
        if (*validate) {
            config = load_config(validate_config);
            std::cout << "ok " << config.canonical() << '\n';
            return ok;
        }
        if (*export_topo) {
            const Topology topo =
                Topology::build(GridShape::parse(shape_text), beta, LongRangeScope::parse(scope_text), topo_seed);
            if (topo_out.empty()) {
                topo.write_edge_list(std::cout);
            } else {
                std::ofstream os(topo_out);
                if (!os) throw Error("cannot write " + topo_out);
                topo.write_edge_list(os);
            }
            return ok;
        }
        config = load_config(run_config);
        if (*scenario_opt) config.scenario = parse_scenario(scenario);
        if (*seed_opt) config.seed = seed;
        if (*reps_opt) config.repetitions = reps;
        if (*out_opt) config.output_dir = out_dir;
        if (*variant_opt) config.model.variant = parse_variant(variant);
        config.validate();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const InvalidParameter& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return runtime_error;
    }

    try {
        const RunReport report = run_experiment(config);
        for (const auto& cell : report.cells) std::cout << cell.csv_path.string() << '\n';
        std::cout << report.summary_path.string() << '\n';
        if (check) {
            const auto problems = check_report(report);
            for (const auto& p : problems) std::cerr << "check failed: " << p << '\n';
            if (!problems.empty()) return check_failed;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return runtime_error;
    }
    return ok;
}
