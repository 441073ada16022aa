#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <optional>
#include <sstream>

#include "monoreg/error.hpp"
#include "monoreg/experiment.hpp"
#include "monoreg/functions.hpp"
#include "monoreg/io.hpp"
#include "monoreg/projection.hpp"
#include "monoreg/simbench.hpp"
#include "monoreg/testing.hpp"

namespace monoreg::cli {

namespace {

using nlohmann::json;

/// Flags shared by the sampling subcommands. Empty strings / unset optionals keep the defaults.
struct CommonFlags {
    std::uint64_t seed = 1;
    std::string j_rule;
    std::optional<std::size_t> m_draws;
    std::string sigma_mode;
    std::string prior_file;
    std::string out;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool sampling = true) {
    cmd->add_option("--seed", f.seed, "Random seed (64-bit)");
    if (sampling) {
        cmd->add_option("--j-rule", f.j_rule, "ceil-n14 | ceil-n14-log | optimal-rate | fixed:<J>");
        cmd->add_option("--m-draws", f.m_draws, "Posterior draws")->check(CLI::PositiveNumber);
        cmd->add_option("--sigma-mode", f.sigma_mode, "plug-in | inverse-gamma | known:<sigma>");
        cmd->add_option("--prior-file", f.prior_file, "Prior hyperparameters (JSON or key = value)");
        cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores); output does not depend on it");
    }
    cmd->add_option("--out", f.out, "Output path (default: standard output)");
}

PriorConfig load_prior(const CommonFlags& f) {
    return f.prior_file.empty() ? PriorConfig{} : load_prior_file(f.prior_file);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(text)) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != item.size() || v == 0) {
            throw ConfigError("invalid sample size '" + item + "'");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) {
        throw ConfigError("empty list of sample sizes");
    }
    return out;
}

std::vector<FunctionId> parse_functions(const std::string& text) {
    std::vector<FunctionId> out;
    for (const auto& item : split_list(text)) {
        out.push_back(parse_function_id(item));
    }
    if (out.empty()) {
        throw ConfigError("empty list of functions");
    }
    return out;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty()) {
        out << content;
    } else {
        write_text_file(path, content);
    }
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------------------------

struct FitArgs {
    CommonFlags common;
    std::string data;
    bool distances = false;
    std::string draws_out;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const Dataset data = load_dataset(a.data);
    const PriorConfig prior = load_prior(a.common);
    EstimateConfig cfg;
    if (!a.common.j_rule.empty()) {
        cfg.j_rule = JRule::parse(a.common.j_rule);
    }
    if (a.common.m_draws) {
        cfg.m_draws = *a.common.m_draws;
    }
    if (!a.common.sigma_mode.empty()) {
        cfg.sigma_mode = parse_sigma_mode(a.common.sigma_mode);
    }
    cfg.threads = a.common.threads;

    const BpFit fit = bp_estimate(data, prior, cfg, a.common.seed);
    const StepFunction& est = fit.estimate;

    json j;
    j["command"] = "fit";
    j["config"] = {{"data", a.data},
                   {"n", data.size()},
                   {"d", data.dim()},
                   {"J", est.grid.resolution()},
                   {"j_rule", cfg.j_rule.to_string()},
                   {"m_draws", cfg.m_draws},
                   {"sigma_mode", to_string(cfg.sigma_mode)},
                   {"prior", to_json(prior)},
                   {"seed", a.common.seed}};
    j["estimate"] = to_json(est);
    j["is_monotone"] = is_monotone(est, kConeTolerance);
    j["sigma"] = {{"sigma_sq", fit.sigma_sq}, {"clamped", fit.sigma_clamped}};
    if (a.distances) {
        j["distances"] = fit.distances;
    }
    if (!a.draws_out.empty()) {
        const BlockStats stats = bin(data, est.grid);
        const PosteriorParams params = posterior_params(stats, prior);
        const SigmaMode sigma = resolve_sigma(cfg.sigma_mode, stats, prior);
        std::optional<InverseGammaParams> post;
        if (sigma.kind == SigmaMode::Kind::InverseGamma) {
            post = sigma_posterior(stats, prior);
        }
        const auto draws = sample_unrestricted(params, sigma, post, a.common.seed, cfg.m_draws, cfg.threads);
        write_text_file(a.draws_out, draws_to_json(draws).dump() + "\n");
    }
    emit(a.common.out, dump(j), out);
    return kSuccess;
}

// ---------------------------------------------------------------------------------------------

struct TestArgs {
    CommonFlags common;
    std::string data;
    bool adaptive = false;
    std::optional<double> gamma;
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> M0;
    std::optional<std::size_t> J_max;
    std::string diagnose;
    bool distances = false;
};

json diagnose_step_function(const std::string& path, const Dataset& data) {
    json j = read_json_file(path);
    const StepFunction f = step_function_from_json(j.is_object() && j.contains("estimate") ? j.at("estimate") : j);
    if (f.grid.dim() != data.dim()) {
        throw ConfigError("diagnosed step function has dimension " + std::to_string(f.grid.dim()) +
                          ", data has " + std::to_string(data.dim()));
    }
    const BlockStats stats = bin(data, f.grid);
    return {{"file", path},
            {"J", f.grid.resolution()},
            {"is_monotone", is_monotone(f, kConeTolerance)},
            {"l1_distance_empirical", distance_to_cone(f, WeightVector::empirical(stats), Norm::L1)},
            {"l1_distance_lebesgue", distance_to_cone(f, WeightVector::uniform(f.grid), Norm::L1)}};
}

int cmd_test(const TestArgs& a, std::ostream& out) {
    const Dataset data = load_dataset(a.data);
    const PriorConfig prior = load_prior(a.common);
    TestConfig cfg;
    if (!a.common.j_rule.empty()) {
        cfg.j_rule = JRule::parse(a.common.j_rule);
    }
    if (a.common.m_draws) {
        cfg.m_draws = *a.common.m_draws;
    }
    if (!a.common.sigma_mode.empty()) {
        cfg.sigma_mode = parse_sigma_mode(a.common.sigma_mode);
    }
    cfg.gamma = a.gamma.value_or(cfg.gamma);
    cfg.a = a.a.value_or(cfg.a);
    cfg.b = a.b.value_or(cfg.b);
    cfg.M0 = a.M0.value_or(cfg.M0);
    cfg.J_max = a.J_max.value_or(0);
    cfg.threads = a.common.threads;

    const TestResult r = a.adaptive ? test_adaptive(data, prior, cfg, a.common.seed)
                                    : test_fixed_J(data, prior, cfg, a.common.seed);

    json config{{"data", a.data},
                {"test", a.adaptive ? "adaptive" : "fixed-J"},
                {"gamma", cfg.gamma},
                {"m_draws", cfg.m_draws},
                {"sigma_mode", to_string(cfg.sigma_mode)},
                {"prior", to_json(prior)},
                {"seed", a.common.seed}};
    if (a.adaptive) {
        config["M0"] = cfg.M0;
        config["J_max"] = r.J_posterior.size();
    } else {
        config["a"] = cfg.a;
        config["b"] = cfg.b;
        config["j_rule"] = cfg.j_rule.to_string();
    }
    json j;
    j["command"] = "test";
    j["config"] = std::move(config);
    j["result"] = to_json(r);
    if (a.adaptive) {
        j["J_posterior"] = r.J_posterior;
    }
    if (a.distances) {
        j["distances"] = r.distances;
        if (a.adaptive) {
            j["J_draws"] = r.J_draws;
        }
    }
    if (!a.diagnose.empty()) {
        j["diagnostics"] = diagnose_step_function(a.diagnose, data);
    }
    emit(a.common.out, dump(j), out);
    return kSuccess;
}

// ---------------------------------------------------------------------------------------------

struct SimulateArgs {
    CommonFlags common;
    bool seed_given = false;
    std::string config;
    std::string kind = "estimation";
    std::optional<std::size_t> datasets;
    std::string functions;
    std::string sizes;
    std::string methods;
    std::optional<double> gamma;
    std::string cell_dir;
    bool plot = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    SweepConfig cfg;
    if (!a.config.empty()) {
        cfg = sweep_from_json(read_json_file(a.config));
    } else if (a.kind == "testing") {
        cfg = SweepConfig::testing_defaults();
    } else if (a.kind == "estimation") {
        cfg = SweepConfig::estimation_defaults();
    } else {
        throw ConfigError("--kind must be 'estimation' or 'testing'");
    }
    if (a.seed_given) {
        cfg.base_seed = a.common.seed;
    }
    if (a.datasets) {
        cfg.datasets = *a.datasets;
    }
    if (!a.functions.empty()) {
        cfg.functions = parse_functions(a.functions);
    }
    if (!a.sizes.empty()) {
        cfg.sample_sizes = parse_sizes(a.sizes);
    }
    if (!a.methods.empty()) {
        cfg.methods = split_list(a.methods);
    }
    if (!a.common.j_rule.empty()) {
        cfg.estimate.j_rule = cfg.test.j_rule = JRule::parse(a.common.j_rule);
    }
    if (a.common.m_draws) {
        cfg.estimate.m_draws = cfg.test.m_draws = *a.common.m_draws;
    }
    if (!a.common.sigma_mode.empty()) {
        cfg.estimate.sigma_mode = cfg.test.sigma_mode = parse_sigma_mode(a.common.sigma_mode);
    }
    if (!a.common.prior_file.empty()) {
        cfg.prior = load_prior(a.common);
    }
    if (a.gamma) {
        cfg.test.gamma = *a.gamma;
    }
    cfg.threads = a.common.threads;
    cfg.cell_dir = a.cell_dir;
    cfg.validate();

    const ExperimentReport report = run_experiment(cfg);
    std::ostringstream table;
    write_table_csv(table, report);
    if (a.common.out.empty()) {
        out << table.str();
        return kSuccess;
    }
    const std::string prefix = a.common.out;
    std::ostringstream longform;
    write_long_csv(longform, report);
    write_text_file(prefix + "_table.csv", table.str());
    write_text_file(prefix + "_long.csv", longform.str());
    write_text_file(prefix + "_report.json", dump(to_json(report)));
    if (a.plot) {
        std::ostringstream svg;
        write_svg_plot(svg, report);
        write_text_file(prefix + ".svg", svg.str());
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------------------------

struct CalibrateArgs {
    CommonFlags common;
    std::string functions = "f1,f2,f3,f4,f5,f6,f7,f8,f9,f10,f11,f12";
    std::string sizes = "100,200,500";
    std::size_t datasets = 5;
    double noise_sd = 0.1;
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
    const PriorConfig prior = load_prior(a.common);
    TestConfig cfg;
    if (!a.common.j_rule.empty()) {
        cfg.j_rule = JRule::parse(a.common.j_rule);
    }
    if (a.common.m_draws) {
        cfg.m_draws = *a.common.m_draws;
    }
    if (!a.common.sigma_mode.empty()) {
        cfg.sigma_mode = parse_sigma_mode(a.common.sigma_mode);
    }
    const auto functions = parse_functions(a.functions);
    CalibrationConfig calib;
    calib.sample_sizes = parse_sizes(a.sizes);
    calib.datasets_per_size = a.datasets;
    calib.threads = a.common.threads;
    const double noise_sd = a.noise_sd;
    for (FunctionId f : functions) {
        calib.suite.push_back([f, noise_sd](std::size_t n, std::uint64_t seed) {
            return generate({f, n, noise_sd, seed});
        });
    }
    const MnFit fit = calibrate_Mn(calib, prior, cfg, a.common.seed);

    std::vector<std::string> names;
    for (FunctionId f : functions) {
        names.push_back(to_string(f));
    }
    json j;
    j["command"] = "calibrate";
    j["config"] = {{"functions", names},
                   {"sample_sizes", calib.sample_sizes},
                   {"datasets_per_size", calib.datasets_per_size},
                   {"noise_sd", noise_sd},
                   {"j_rule", cfg.j_rule.to_string()},
                   {"m_draws", cfg.m_draws},
                   {"sigma_mode", to_string(cfg.sigma_mode)},
                   {"prior", to_json(prior)},
                   {"seed", a.common.seed}};
    j["a"] = fit.a;
    j["b"] = fit.b;
    j["samples_used"] = fit.used;
    j["zero_distances_dropped"] = fit.dropped_zero;
    emit(a.common.out, dump(j), out);
    return kSuccess;
}

// ---------------------------------------------------------------------------------------------

struct GenerateArgs {
    CommonFlags common;
    std::string function = "f1";
    std::size_t n = 100;
    double noise_sd = 0.1;
    std::string format = "csv";
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    const Dataset data = generate({parse_function_id(a.function), a.n, a.noise_sd, a.common.seed});
    if (a.format == "json") {
        emit(a.common.out, to_json(data).dump() + "\n", out);
    } else {
        std::ostringstream csv;
        write_dataset_csv(csv, data);
        emit(a.common.out, csv.str(), out);
    }
    return kSuccess;
}

std::string with_line(const ParseError& e) {
    return e.line() > 0 ? "line " + std::to_string(e.line()) + ": " + e.what() : std::string(e.what());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian multivariate isotonic regression via the projection posterior", "monoreg"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "monoreg 0.1.0");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Projection-posterior mean estimate from a dataset");
    fit_cmd->add_option("--data", fit.data, "Dataset (CSV with header x1..xd,y, or JSON)")->required();
    add_common(fit_cmd, fit.common);
    fit_cmd->add_flag("--distances", fit.distances, "Include per-draw L1 distances to the cone");
    fit_cmd->add_option("--draws", fit.draws_out, "Write the unrestricted posterior draws as JSON");

    TestArgs test;
    auto* test_cmd = app.add_subcommand("test", "Bayesian test of coordinatewise monotonicity");
    test_cmd->add_option("--data", test.data, "Dataset (CSV with header x1..xd,y, or JSON)")->required();
    add_common(test_cmd, test.common);
    test_cmd->add_flag("--adaptive", test.adaptive, "Adaptive-J Hellinger test (needs --sigma-mode known:<sigma>)");
    test_cmd->add_option("--gamma", test.gamma, "Rejection cut-off on the posterior probability");
    test_cmd->add_option("--a", test.a, "M_n = a (log n)^b");
    test_cmd->add_option("--b", test.b, "M_n = a (log n)^b");
    test_cmd->add_option("--M0", test.M0, "Adaptive-test radius constant");
    test_cmd->add_option("--j-max", test.J_max, "Adaptive test: largest J considered");
    test_cmd->add_option("--diagnose", test.diagnose, "Step-function JSON (e.g. fit output) to check against the cone");
    test_cmd->add_flag("--distances", test.distances, "Include per-draw distances");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulation sweep (estimation or testing tables)");
    sim_cmd->add_option("--config", sim.config, "Sweep config JSON");
    add_common(sim_cmd, sim.common);
    sim_cmd->add_option("--kind", sim.kind, "estimation | testing (when no --config is given)");
    sim_cmd->add_option("--datasets", sim.datasets, "Datasets per cell")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--functions", sim.functions, "Comma-separated, e.g. f1,f4");
    sim_cmd->add_option("--sizes", sim.sizes, "Comma-separated sample sizes");
    sim_cmd->add_option("--methods", sim.methods, "Comma-separated: BP,LS or BP,BPA,LR,PL");
    sim_cmd->add_option("--gamma", sim.gamma, "Rejection cut-off for BP tests");
    sim_cmd->add_option("--cell-dir", sim.cell_dir, "Directory of per-cell results, reused on rerun");
    sim_cmd->add_flag("--plot", sim.plot, "Also write <out>.svg");

    CalibrateArgs cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "Fit M_n = a (log n)^b from pooled posterior distances");
    add_common(cal_cmd, cal.common);
    cal_cmd->add_option("--functions", cal.functions, "Comma-separated generator suite");
    cal_cmd->add_option("--sizes", cal.sizes, "Comma-separated sample sizes");
    cal_cmd->add_option("--datasets", cal.datasets, "Datasets per function and size")->check(CLI::PositiveNumber);
    cal_cmd->add_option("--noise-sd", cal.noise_sd, "Noise standard deviation")->check(CLI::NonNegativeNumber);

    GenerateArgs gen;
    auto* gen_cmd = app.add_subcommand("generate", "Simulate a dataset from one of f1..f12");
    add_common(gen_cmd, gen.common, false);
    gen_cmd->add_option("--function", gen.function, "f1..f12");
    gen_cmd->add_option("--n", gen.n, "Sample size")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--noise-sd", gen.noise_sd, "Noise standard deviation")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--format", gen.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::CallForVersion&) {
        out << "monoreg 0.1.0\n";
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    sim.seed_given = sim_cmd->count("--seed") > 0;

    try {
        if (fit_cmd->parsed()) {
            return cmd_fit(fit, out);
        }
        if (test_cmd->parsed()) {
            return cmd_test(test, out);
        }
        if (sim_cmd->parsed()) {
            return cmd_simulate(sim, out);
        }
        if (cal_cmd->parsed()) {
            return cmd_calibrate(cal, out);
        }
        return cmd_generate(gen, out);
    } catch (const ParseError& e) {
        err << "error: " << with_line(e) << "\n";
        return kUsageError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
}

}  // namespace monoreg::cli
