#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chainprop/errors.hpp"
#include "chainprop/harness.hpp"

using namespace chainprop;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("chainprop_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    std::getline(in, line);  // provenance
    std::getline(in, line);  // columns
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cols.push_back(c);
        rows.push_back(cols);
    }
    return rows;
}

double as_double(const std::string& s) {
    double v = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

ExperimentConfig small_config(Scenario scenario, const std::string& dir) {
    ExperimentConfig cfg;
    cfg.scenario = scenario;
    cfg.shape = GridShape::diamond(4);
    cfg.beta_values = {1.0, 10.0};
    cfg.delay_ratio_values = {1.0, 1.1};
    cfg.repetitions = 6;
    cfg.seed = 17;
    cfg.race_repetitions = 300;
    cfg.output_dir = scratch_dir(dir);
    return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
    const std::string text = R"([experiment]
scenario = fork_cumulative
shape = diamond:16
beta_values = 1, 10
delay_ratio_values = 1.0,1.1
repetitions = 50
seed = 42
output_dir = results/fork

[model]
delta_s = 1
delta_l = 1.5
c = 0.75
pi_u = 0.002
epsilon = 0.1
e_adv = 20

[variants]
tau_l_policy = offset
activation_variant = include_layer2
long_range_scope = adjacent_layers
)";
    const ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.scenario == Scenario::fork_cumulative);
    CHECK(cfg.shape == GridShape::diamond(16));
    CHECK(cfg.beta_values == std::vector<double>{1.0, 10.0});
    CHECK(cfg.delay_ratio_values == std::vector<double>{1.0, 1.1});
    CHECK(cfg.repetitions == 50);
    CHECK(cfg.seed == 42);
    CHECK(cfg.output_dir == fs::path("results/fork"));
    CHECK(cfg.model.c == 0.75);
    CHECK(cfg.model.delta == 1.0);
    CHECK(!cfg.pi_u_auto);
    CHECK(cfg.model.pi_u == 0.002);
    CHECK(cfg.model.tau_policy == TauPolicy::offset);
    CHECK(cfg.model.variant == ActivationVariant::include_layer2);
    CHECK(cfg.adjacent_layer_scope);

    const ExperimentConfig defaults = parse_config_text("[experiment]\nscenario = robust_level\n[variants]\n");
    CHECK(defaults.pi_u_auto);
    CHECK(defaults.repetitions == 50);
    CHECK(defaults.model.c == 1.0);
    CHECK(defaults.model.variant == ActivationVariant::paper_literal);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config_text("[experiment]\nscenaro = fork_unit\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[experiment]\nscenario = plots\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[extras]\nfoo = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("seed = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[experiment]\nrepetitions = many\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[experiment]\nrepetitions = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[experiment]\nbeta_values = 1, -2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[experiment]\ndelay_ratio_values = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[experiment]\nshape = circle:3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[model]\ndelta_l = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[variants]\nlong_range_scope = some\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[experiment\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("config hash ignores the output directory") {
    ExperimentConfig a;
    ExperimentConfig b;
    b.output_dir = "elsewhere";
    CHECK(a.hash() == b.hash());
    b.seed = 2;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("compare curves") {
    const std::vector<double> t{0, 1, 2, 3};
    const std::vector<double> y{1, 5, 13, 20};
    const std::vector<double> lo{0, 4, 12, 19};
    const std::vector<double> hi{2, 6, 14, 21};
    const CurveComparison same = compare_curves(t, y, t, y, lo, hi);
    CHECK(same.max_abs_gap == 0.0);
    CHECK(same.mean_abs_gap == 0.0);
    CHECK(same.fraction_within_ci == 1.0);

    std::vector<double> shifted = y;
    for (double& v : shifted) v += 2.0;
    const CurveComparison off = compare_curves(t, shifted, t, y, lo, hi);
    CHECK(off.max_abs_gap == 2.0);
    CHECK(off.mean_abs_gap == 2.0);
    CHECK(off.fraction_within_ci == 0.0);

    CHECK_THROWS_AS(compare_curves(t, y, {0, 1, 2}, {1, 5, 13}, {0, 4, 12}, {2, 6, 14}), MismatchError);
    CHECK_THROWS_AS(compare_curves(t, y, {0, 1, 2, 3.5}, y, lo, hi), MismatchError);
}

TEST_CASE("mean with confidence interval") {
    const MeanWithCi m = mean_with_ci({2.0, 4.0, 6.0});
    CHECK(m.mean == 4.0);
    CHECK(m.ci_lo == doctest::Approx(4.0 - 1.959963984540054 * 2.0 / std::sqrt(3.0)));
    CHECK(m.ci_hi == doctest::Approx(4.0 + 1.959963984540054 * 2.0 / std::sqrt(3.0)));
    const MeanWithCi one = mean_with_ci({7.0});
    CHECK(one.ci_lo == 7.0);
    CHECK(one.ci_hi == 7.0);
}

TEST_CASE("number formatting round-trips") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(1.5) == "1.5");
    CHECK(format_number(1.1) == "1.1");
    CHECK(format_number(std::nan("")) == "nan");
    for (double v : {1.0 / 3.0, 0.09516258196404048, 144.99999999, 1e-300}) CHECK(as_double(format_number(v)) == v);
}

TEST_CASE("activation scenario output") {
    const ExperimentConfig cfg = small_config(Scenario::activation_degree, "activation");
    const RunReport report = run_experiment(cfg);
    CHECK(report.cells.size() == 4);
    CHECK(check_report(report).empty());
    const auto steps = static_cast<std::size_t>(std::llround(report.horizon / report.delta));
    for (const CellResult& cell : report.cells) {
        CHECK(fs::exists(cell.csv_path));
        const std::string text = read_file(cell.csv_path);
        CHECK(text.rfind("# chainprop ", 0) == 0);
        CHECK(text.find("config_hash=") != std::string::npos);
        CHECK(text.find("seed=17") != std::string::npos);
        CHECK(text.find("\nt,analytic_I,sim_mean_I,sim_ci_lo,sim_ci_hi\n") != std::string::npos);
        const auto rows = csv_rows(cell.csv_path);
        CHECK(rows.size() == steps + 1);
        CHECK(as_double(rows.back()[2]) == 41.0);
        CHECK(as_double(rows.front()[1]) == 1.0);
    }
    CHECK(fs::exists(report.summary_path));
    CHECK(read_file(report.summary_path).find("sim_mean_full_activation") != std::string::npos);
}

TEST_CASE("fork scenario output") {
    const ExperimentConfig cfg = small_config(Scenario::fork_unit, "fork");
    const RunReport report = run_experiment(cfg);
    CHECK(check_report(report).empty());
    const auto steps = static_cast<std::size_t>(std::llround(report.horizon / report.delta));
    for (const CellResult& cell : report.cells) {
        CHECK(cell.params.pi_u == doctest::Approx(1.0 / (10.0 * 41.0)));
        const std::string text = read_file(cell.csv_path);
        CHECK(text.find("\nt,analytic_fr,analytic_FR,sim_fr,sim_fr_ci_lo,sim_fr_ci_hi,sim_FR\n") != std::string::npos);
        const auto rows = csv_rows(cell.csv_path);
        CHECK(rows.size() == steps);
        for (const auto& row : rows) {
            CHECK(row.size() == 7);
            for (std::size_t c = 1; c < row.size(); ++c) {
                CHECK(as_double(row[c]) >= 0.0);
                CHECK(as_double(row[c]) <= 1.0);
            }
        }
    }
}

TEST_CASE("robust level table follows the closed form") {
    const ExperimentConfig cfg = small_config(Scenario::robust_level, "robust");
    const RunReport report = run_experiment(cfg);
    CHECK(check_report(report).empty());
    for (const CellResult& cell : report.cells) {
        const auto rows = csv_rows(cell.csv_path);
        CHECK(rows.size() == cell.times.size());
        for (const auto& row : rows) {
            const double activated = as_double(row[1]);
            const double ratio = activated / 20.0;
            if (ratio <= 1.0) {
                CHECK(row[2] == "nan");
            } else {
                const double theta = -std::log(0.1) / std::log(ratio);
                CHECK(std::abs(as_double(row[2]) - theta) <= 1e-12 * std::max(1.0, theta));
            }
            CHECK(std::stoi(row[3]) >= 1);
        }
    }
}

TEST_CASE("identical configs give byte-identical outputs") {
    for (Scenario s : {Scenario::activation_degree, Scenario::fork_cumulative, Scenario::robust_level}) {
        ExperimentConfig a = small_config(s, "det_a");
        ExperimentConfig b = small_config(s, "det_b");
        const RunReport ra = run_experiment(a);
        const RunReport rb = run_experiment(b);
        REQUIRE(ra.cells.size() == rb.cells.size());
        for (std::size_t i = 0; i < ra.cells.size(); ++i) {
            CHECK(read_file(ra.cells[i].csv_path) == read_file(rb.cells[i].csv_path));
        }
        CHECK(read_file(ra.summary_path) == read_file(rb.summary_path));
    }
}

TEST_CASE("unwritable output directory is reported") {
    const fs::path blocker = scratch_dir("blocker");
    { std::ofstream(blocker) << "x"; }
    ExperimentConfig cfg = small_config(Scenario::activation_degree, "unused");
    cfg.output_dir = blocker / "sub";
    CHECK_THROWS_AS(run_experiment(cfg), Error);
    fs::remove(blocker);
}
