#include "chainprop/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "chainprop/errors.hpp"
#include "chainprop/propsim.hpp"
#include "chainprop/rng.hpp"

namespace chainprop {

namespace fs = std::filesystem;

namespace {

constexpr double z95 = 1.959963984540054;

std::string trim(std::string s) {
    const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError("'" + key + "' expects a non-negative integer, got '" + text + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("'" + key + "' must list at least one value");
    return out;
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_number(values[i]);
    }
    return out;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

std::string cell_stem(Scenario scenario, double beta, double ratio) {
    return to_string(scenario) + "_beta" + format_number(beta) + "_ratio" + format_number(ratio);
}

bool is_fork(Scenario s) { return s == Scenario::fork_unit || s == Scenario::fork_cumulative; }

}  // namespace

Scenario parse_scenario(const std::string& name) {
    if (name == "activation_degree") return Scenario::activation_degree;
    if (name == "fork_unit") return Scenario::fork_unit;
    if (name == "fork_cumulative") return Scenario::fork_cumulative;
    if (name == "robust_level") return Scenario::robust_level;
    throw ConfigError("unknown scenario '" + name + "'");
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::activation_degree: return "activation_degree";
        case Scenario::fork_unit: return "fork_unit";
        case Scenario::fork_cumulative: return "fork_cumulative";
        case Scenario::robust_level: return "robust_level";
    }
    return "?";
}

ActivationVariant parse_variant(const std::string& name) {
    if (name == "paper_literal") return ActivationVariant::paper_literal;
    if (name == "include_layer2") return ActivationVariant::include_layer2;
    throw ConfigError("unknown activation variant '" + name + "'");
}

std::string to_string(ActivationVariant v) {
    return v == ActivationVariant::paper_literal ? "paper_literal" : "include_layer2";
}

TauPolicy parse_tau_policy(const std::string& name) {
    if (name == "fixed") return TauPolicy::fixed;
    if (name == "offset") return TauPolicy::offset;
    throw ConfigError("unknown tau_l policy '" + name + "'");
}

std::string to_string(TauPolicy p) { return p == TauPolicy::fixed ? "fixed" : "offset"; }

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void ExperimentConfig::validate() const {
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (race_repetitions < 1) throw ConfigError("race_repetitions must be >= 1");
    if (beta_values.empty()) throw ConfigError("beta_values must not be empty");
    if (delay_ratio_values.empty()) throw ConfigError("delay_ratio_values must not be empty");
    for (double b : beta_values) {
        if (!(b > 0.0)) throw ConfigError("every beta must be > 0");
    }
    for (double r : delay_ratio_values) {
        if (!(r > 0.0)) throw ConfigError("every delay ratio must be > 0");
    }
    if (shape.kind() == GridShape::Kind::diamond ? shape.size() < 2 : shape.size() < 3) {
        throw ConfigError("grid must place some node at distance >= 2 from its centre");
    }
    try {
        ModelParams probe = model;
        probe.beta = beta_values.front();
        probe.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what());
    }
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    os << "scenario=" << to_string(scenario) << ";shape=" << shape.to_string() << ";beta_values=" << join(beta_values)
       << ";delay_ratio_values=" << join(delay_ratio_values) << ";repetitions=" << repetitions << ";seed=" << seed
       << ";race_repetitions=" << race_repetitions << ";delta_s=" << format_number(model.delta_s)
       << ";delta_l=" << format_number(model.delta_l) << ";c=" << format_number(model.c)
       << ";delta=" << format_number(model.delta) << ";pi_u=" << (pi_u_auto ? "auto" : format_number(model.pi_u))
       << ";epsilon=" << format_number(model.epsilon) << ";gamma=" << format_number(model.gamma)
       << ";lambda_adv=" << format_number(model.lambda_adv) << ";e_adv=" << model.e_adv
       << ";tau_l_policy=" << to_string(model.tau_policy) << ";activation_variant=" << to_string(model.variant)
       << ";long_range_scope=" << (adjacent_layer_scope ? "adjacent_layers" : "all_pairs");
    return os.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical()); }

ExperimentConfig parse_config_text(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }

    ExperimentConfig cfg;
    std::optional<double> delta;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("key '" + section + "' must sit inside a section");
        }
        for (const auto& [key, node] : body) {
            const std::string value = trim(node.data());
            const std::string full = section + "." + key;
            if (section == "experiment") {
                if (key == "scenario") cfg.scenario = parse_scenario(value);
                else if (key == "shape") {
                    try {
                        cfg.shape = GridShape::parse(value);
                    } catch (const InvalidParameter& e) {
                        throw ConfigError(e.what());
                    }
                } else if (key == "beta_values") cfg.beta_values = parse_list(full, value);
                else if (key == "delay_ratio_values") cfg.delay_ratio_values = parse_list(full, value);
                else if (key == "repetitions") cfg.repetitions = parse_unsigned(full, value);
                else if (key == "seed") cfg.seed = parse_unsigned(full, value);
                else if (key == "race_repetitions") cfg.race_repetitions = parse_unsigned(full, value);
                else if (key == "output_dir") cfg.output_dir = value;
                else throw ConfigError("unknown key '" + full + "'");
            } else if (section == "model") {
                if (key == "delta_s") cfg.model.delta_s = parse_double(full, value);
                else if (key == "delta_l") cfg.model.delta_l = parse_double(full, value);
                else if (key == "c") cfg.model.c = parse_double(full, value);
                else if (key == "delta") delta = parse_double(full, value);
                else if (key == "pi_u") {
                    cfg.pi_u_auto = value == "auto";
                    if (!cfg.pi_u_auto) cfg.model.pi_u = parse_double(full, value);
                } else if (key == "epsilon") cfg.model.epsilon = parse_double(full, value);
                else if (key == "gamma") cfg.model.gamma = parse_double(full, value);
                else if (key == "lambda_adv") cfg.model.lambda_adv = parse_double(full, value);
                else if (key == "e_adv") cfg.model.e_adv = static_cast<int>(parse_unsigned(full, value));
                else throw ConfigError("unknown key '" + full + "'");
            } else if (section == "variants") {
                if (key == "tau_l_policy") cfg.model.tau_policy = parse_tau_policy(value);
                else if (key == "activation_variant") cfg.model.variant = parse_variant(value);
                else if (key == "long_range_scope") {
                    if (value == "all_pairs") cfg.adjacent_layer_scope = false;
                    else if (value == "adjacent_layers") cfg.adjacent_layer_scope = true;
                    else throw ConfigError("long_range_scope must be all_pairs or adjacent_layers");
                } else throw ConfigError("unknown key '" + full + "'");
            } else {
                throw ConfigError("unknown section [" + section + "]");
            }
        }
    }
    cfg.model.delta = delta.value_or(cfg.model.delta_s);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

CurveComparison compare_curves(const std::vector<double>& analytic_times, const std::vector<double>& analytic,
                               const std::vector<double>& simulated_times, const std::vector<double>& simulated_mean,
                               const std::vector<double>& ci_lo, const std::vector<double>& ci_hi) {
    const std::size_t n = analytic_times.size();
    if (analytic.size() != n || simulated_times.size() != n || simulated_mean.size() != n || ci_lo.size() != n ||
        ci_hi.size() != n) {
        throw MismatchError("curves must share one time grid");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(analytic_times[i] - simulated_times[i]) > 1e-9 * std::max(1.0, std::abs(analytic_times[i]))) {
            throw MismatchError("curves sampled at different times");
        }
    }
    CurveComparison out;
    if (n == 0) return out;
    std::size_t within = 0;
    double gap_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double gap = std::abs(analytic[i] - simulated_mean[i]);
        out.max_abs_gap = std::max(out.max_abs_gap, gap);
        gap_sum += gap;
        if (analytic[i] >= ci_lo[i] && analytic[i] <= ci_hi[i]) ++within;
    }
    out.mean_abs_gap = gap_sum / static_cast<double>(n);
    out.fraction_within_ci = static_cast<double>(within) / static_cast<double>(n);
    return out;
}

MeanWithCi mean_with_ci(const std::vector<double>& samples) {
    MeanWithCi out;
    if (samples.empty()) return out;
    const auto n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double s : samples) sum += s;
    out.mean = sum / n;
    double ss = 0.0;
    for (double s : samples) ss += (s - out.mean) * (s - out.mean);
    const double sd = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const double half = z95 * sd / std::sqrt(n);
    out.ci_lo = out.mean - half;
    out.ci_hi = out.mean + half;
    return out;
}

namespace {

void write_csv(const RunReport& report, const CellResult& cell) {
    std::ofstream os(cell.csv_path, std::ios::binary);
    if (!os) throw Error("cannot write " + cell.csv_path.string());
    const ExperimentConfig& cfg = report.config;
    os << "# chainprop " << version << " config_hash=" << hex(report.config_hash) << " seed=" << cfg.seed
       << " scenario=" << to_string(cfg.scenario) << " shape=" << cfg.shape.to_string()
       << " beta=" << format_number(cell.beta) << " delay_ratio=" << format_number(cell.delay_ratio)
       << " repetitions=" << cfg.repetitions << '\n';
    const auto& f = format_number;
    switch (cfg.scenario) {
        case Scenario::activation_degree:
            os << "t,analytic_I,sim_mean_I,sim_ci_lo,sim_ci_hi\n";
            for (std::size_t k = 0; k < cell.times.size(); ++k) {
                os << f(cell.times[k]) << ',' << f(cell.analytic_I[k]) << ',' << f(cell.sim_I[k].mean) << ','
                   << f(cell.sim_I[k].ci_lo) << ',' << f(cell.sim_I[k].ci_hi) << '\n';
            }
            break;
        case Scenario::fork_unit:
        case Scenario::fork_cumulative: {
            os << "t,analytic_fr,analytic_FR,sim_fr,sim_fr_ci_lo,sim_fr_ci_hi,sim_FR\n";
            const ForkStatistics& sim = *cell.sim_forks;
            for (std::size_t k = 0; k < sim.times.size(); ++k) {
                os << f(sim.times[k]) << ',' << f(cell.analytic_fr[k]) << ',' << f(cell.analytic_FR[k]) << ','
                   << f(sim.interval[k].value) << ',' << f(sim.interval[k].ci_lo) << ','
                   << f(sim.interval[k].ci_hi) << ',' << f(sim.cumulative[k].value) << '\n';
            }
            break;
        }
        case Scenario::robust_level:
            os << "t,analytic_I,theta,mc_k\n";
            for (std::size_t k = 0; k < cell.times.size(); ++k) {
                const auto& th = cell.theta[k];
                const bool valid = th && th->regime == RobustLevel::Regime::valid;
                os << f(cell.times[k]) << ',' << f(cell.analytic_I[k]) << ','
                   << (valid ? f(th->value) : std::string("nan")) << ',' << cell.mc_k[k] << '\n';
            }
            break;
    }
}

void write_summary(const RunReport& report) {
    std::ofstream os(report.summary_path, std::ios::binary);
    if (!os) throw Error("cannot write " + report.summary_path.string());
    const ExperimentConfig& cfg = report.config;
    const auto& f = format_number;
    os << "# chainprop " << version << " config_hash=" << hex(report.config_hash) << " seed=" << cfg.seed << '\n';
    os << "scenario " << to_string(cfg.scenario) << '\n';
    os << "shape " << cfg.shape.to_string() << " nodes " << cfg.shape.node_count() << '\n';
    os << "repetitions " << cfg.repetitions << '\n';
    os << "delta " << f(report.delta) << " T_all " << f(report.horizon) << '\n';
    for (const CellResult& cell : report.cells) {
        os << "\n[beta=" << f(cell.beta) << " delay_ratio=" << f(cell.delay_ratio) << "]\n";
        os << "pi_u " << f(cell.params.pi_u) << '\n';
        os << "analytic_full_activation "
           << (cell.analytic_full_activation ? f(*cell.analytic_full_activation) : std::string("none")) << '\n';
        os << "sim_mean_full_activation " << f(cell.sim_mean_full_activation) << '\n';
        os << "activation_max_abs_gap " << f(cell.activation_gap.max_abs_gap) << '\n';
        os << "activation_mean_abs_gap " << f(cell.activation_gap.mean_abs_gap) << '\n';
        os << "activation_fraction_within_ci " << f(cell.activation_gap.fraction_within_ci) << '\n';
        if (cell.sim_forks) {
            const ForkStatistics& sim = *cell.sim_forks;
            for (std::size_t k = 0; k < sim.times.size(); ++k) {
                os << "fork t=" << f(sim.times[k]) << " fr=" << f(sim.interval[k].value) << " ["
                   << f(sim.interval[k].ci_lo) << ',' << f(sim.interval[k].ci_hi)
                   << "] FR=" << f(sim.cumulative[k].value) << " [" << f(sim.cumulative[k].ci_lo) << ','
                   << f(sim.cumulative[k].ci_hi) << "]\n";
            }
        }
        if (!cell.theta.empty()) {
            for (std::size_t k = 0; k < cell.times.size(); ++k) {
                const auto& th = cell.theta[k];
                os << "theta t=" << f(cell.times[k]) << ' '
                   << (!th ? std::string("singular")
                           : th->regime == RobustLevel::Regime::valid ? f(th->value)
                                                                       : "honest_minority(" + f(th->value) + ")")
                   << " mc_k=" << cell.mc_k[k] << '\n';
            }
        }
    }
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    RunReport report;
    report.config = config;
    report.config_hash = config.hash();

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec || !fs::is_directory(config.output_dir)) {
        throw Error("cannot create output directory " + config.output_dir.string());
    }

    const GridShape& shape = config.shape;
    const NodeId source = shape.center();
    const LongRangeScope scope =
        config.adjacent_layer_scope ? LongRangeScope::adjacent_layers(source) : LongRangeScope::all_pairs();
    const double total = static_cast<double>(shape.node_count());
    const double delta = config.model.delta;
    report.delta = delta;

    // Topologies depend only on (beta, repetition), so every delay ratio reuses them.
    std::map<double, std::vector<Topology>> topologies;
    for (double beta : config.beta_values) {
        auto& list = topologies[beta];
        if (!list.empty()) continue;
        for (std::size_t r = 0; r < config.repetitions; ++r) {
            list.push_back(Topology::build(shape, beta, scope, derive_seed(config.seed, Stream::topology, r)));
        }
    }
    const LayerDecomposition layers = decompose_layers(topologies.begin()->second.front(), source);

    struct Pending {
        double beta;
        double ratio;
        std::vector<PropagationTrace> traces;
    };
    std::vector<Pending> pending;
    double latest = 0.0;
    for (double beta : config.beta_values) {
        for (double ratio : config.delay_ratio_values) {
            Pending p{beta, ratio, {}};
            for (const Topology& topo : topologies[beta]) {
                p.traces.push_back(simulate_propagation(topo, source, config.model.delta_s * ratio,
                                                        config.model.delta_l * ratio));
                latest = std::max(latest, p.traces.back().max_receive_time());
            }
            pending.push_back(std::move(p));
        }
    }
    const auto steps = std::max<long>(1, static_cast<long>(std::ceil(latest / delta - 1e-9)));
    report.horizon = static_cast<double>(steps) * delta;

    for (Pending& p : pending) {
        CellResult cell;
        cell.beta = p.beta;
        cell.delay_ratio = p.ratio;
        cell.total = total;
        cell.params = config.model;
        cell.params.beta = p.beta;
        cell.params.delta_s = config.model.delta_s * p.ratio;
        cell.params.delta_l = config.model.delta_l * p.ratio;
        cell.params.delta = delta;
        cell.params.horizon = report.horizon;
        if (config.pi_u_auto) cell.params.pi_u = 1.0 / (10.0 * config.model.delta_s * total);
        const ActivationSchedule schedule = ActivationSchedule::build(layers.max_layer, cell.params);

        double full_sum = 0.0;
        for (const auto& tr : p.traces) full_sum += tr.max_receive_time();
        cell.sim_mean_full_activation = full_sum / static_cast<double>(p.traces.size());

        std::vector<double> sim_mean, sim_lo, sim_hi;
        for (long k = 0; k <= steps; ++k) {
            const double t = static_cast<double>(k) * delta;
            cell.times.push_back(t);
            const double analytic = global_activation_degree(t, cell.params, schedule, total);
            cell.analytic_I.push_back(analytic);
            if (!cell.analytic_full_activation && analytic >= total) cell.analytic_full_activation = t;
            std::vector<double> degrees;
            degrees.reserve(p.traces.size());
            for (const auto& tr : p.traces) degrees.push_back(static_cast<double>(empirical_activation_degree(tr, t)));
            cell.sim_I.push_back(mean_with_ci(degrees));
            sim_mean.push_back(cell.sim_I.back().mean);
            sim_lo.push_back(cell.sim_I.back().ci_lo);
            sim_hi.push_back(cell.sim_I.back().ci_hi);
        }
        cell.activation_gap = compare_curves(cell.times, cell.analytic_I, cell.times, sim_mean, sim_lo, sim_hi);

        if (is_fork(config.scenario)) {
            for (long k = 0; k < steps; ++k) {
                const double t = static_cast<double>(k) * delta;
                cell.analytic_fr.push_back(fork_prob_unit(t, cell.params, schedule, total));
                cell.analytic_FR.push_back(fork_prob_cumulative(t, cell.params, schedule, total));
            }
            ForkSimOptions opts;
            opts.pi_u = cell.params.pi_u;
            opts.delta = delta;
            opts.horizon = report.horizon;
            opts.repetitions = config.repetitions;
            opts.seed = config.seed;
            cell.sim_forks = simulate_forks(p.traces, opts);
        }

        if (config.scenario == Scenario::robust_level) {
            for (std::size_t k = 0; k < cell.times.size(); ++k) {
                const double activated = cell.analytic_I[k];
                try {
                    cell.theta.emplace_back(robust_level_for_degree(activated, cell.params));
                } catch (const DomainError&) {
                    cell.theta.emplace_back(std::nullopt);
                }
                const RaceEstimate race = estimate_robust_level_mc(activated, cell.params, config.race_repetitions,
                                                                   splitmix64(config.seed + k));
                cell.mc_k.push_back(race.lead_required);
            }
        }

        cell.csv_path = config.output_dir / (cell_stem(config.scenario, p.beta, p.ratio) + ".csv");
        report.cells.push_back(std::move(cell));
    }

    for (const CellResult& cell : report.cells) write_csv(report, cell);
    report.summary_path = config.output_dir / "summary.txt";
    write_summary(report);
    return report;
}

std::vector<std::string> check_report(const RunReport& report) {
    std::vector<std::string> problems;
    const auto steps = static_cast<std::size_t>(std::llround(report.horizon / report.delta));
    for (const CellResult& cell : report.cells) {
        const std::string tag = "[beta=" + format_number(cell.beta) + " ratio=" + format_number(cell.delay_ratio) + "] ";
        if (cell.times.size() != steps + 1) problems.push_back(tag + "time grid length mismatch");
        for (std::size_t k = 1; k < cell.times.size(); ++k) {
            if (cell.sim_I[k].mean < cell.sim_I[k - 1].mean) problems.push_back(tag + "simulated I(t) decreases");
            if (cell.analytic_I[k] < cell.analytic_I[k - 1]) problems.push_back(tag + "analytic I(t) decreases");
        }
        if (!cell.sim_I.empty() && cell.sim_I.back().mean != cell.total) {
            problems.push_back(tag + "simulation does not reach full activation by T_all");
        }
        for (double v : cell.analytic_I) {
            if (v > cell.total) problems.push_back(tag + "analytic I(t) exceeds node count");
        }
        if (cell.sim_forks) {
            const ForkStatistics& sim = *cell.sim_forks;
            if (sim.times.size() != steps) problems.push_back(tag + "fork grid length mismatch");
            for (std::size_t k = 0; k < sim.times.size(); ++k) {
                for (const Frequency* fq : {&sim.interval[k], &sim.cumulative[k]}) {
                    if (fq->value < 0.0 || fq->value > 1.0) problems.push_back(tag + "frequency outside [0,1]");
                }
                if (k > 0) {
                    if (sim.cumulative[k].value < sim.cumulative[k - 1].value) {
                        problems.push_back(tag + "simulated FR decreases");
                    }
                    if (cell.analytic_FR[k] < cell.analytic_FR[k - 1]) problems.push_back(tag + "analytic FR decreases");
                    if (cell.analytic_fr[k] > cell.analytic_fr[k - 1]) problems.push_back(tag + "analytic fr increases");
                }
            }
        }
        double last_theta = std::numeric_limits<double>::infinity();
        for (const auto& th : cell.theta) {
            if (!th || th->regime != RobustLevel::Regime::valid) continue;
            if (th->value > last_theta) problems.push_back(tag + "theta increases while I(t) grows");
            last_theta = th->value;
        }
    }
    return problems;
}

}  // namespace chainprop
