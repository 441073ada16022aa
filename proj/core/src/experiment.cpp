#include "monoreg/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "monoreg/error.hpp"
#include "monoreg/io.hpp"
#include "monoreg/metrics.hpp"
#include "monoreg/parallel.hpp"
#include "monoreg/random.hpp"

namespace monoreg {

namespace {

const std::set<std::string> kEstimationMethods{"BP", "LS"};
const std::set<std::string> kTestingMethods{"BP", "BPA", "LR", "PL"};

std::string format_double(double v) {
    if (!std::isfinite(v)) {
        return "NA";
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int digits) {
    if (!std::isfinite(v)) {
        return "NA";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c == '\n' ? ' ' : c);
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

/// Value of one method on one dataset: L1 error (estimation) or reject indicator (testing).
double evaluate_dataset(const SweepConfig& cfg, FunctionId f, std::size_t n, const std::string& method,
                        std::size_t rep) {
    const std::uint64_t data_seed =
        derive_seed(cfg.base_seed, {static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(n), rep});
    const Dataset data = generate({f, n, cfg.noise_sd, data_seed});
    const std::uint64_t method_seed = derive_seed(data_seed, {label_hash(method.c_str())});

    if (cfg.kind == ExperimentKind::Estimation) {
        const auto f0 = regression_function(f);
        EstimateConfig est = cfg.estimate;
        est.threads = 1;
        if (method == "BP") {
            const BpFit fit = bp_estimate(data, cfg.prior, est, method_seed);
            return lp_distance_to_function(fit.estimate, f0, 1.0, cfg.quad_per_cell);
        }
        const GridSpec grid(2, est.j_rule.resolve(n, 2));
        return lp_distance_to_function(ls_baseline(data, grid), f0, 1.0, cfg.quad_per_cell);
    }

    TestConfig tc = cfg.test;
    tc.threads = 1;
    if (method == "BP") {
        return test_fixed_J(data, cfg.prior, tc, method_seed).reject ? 1.0 : 0.0;
    }
    if (method == "BPA") {
        tc.sigma_mode = SigmaMode::known(cfg.noise_sd);
        return test_adaptive(data, cfg.prior, tc, method_seed).reject ? 1.0 : 0.0;
    }
    if (method == "LR") {
        return lr_test(data, cfg.level) ? 1.0 : 0.0;
    }
    return pl_test(data, cfg.level) ? 1.0 : 0.0;
}

void summarize(CellResult& cell, ExperimentKind kind) {
    std::vector<double> ok;
    for (double v : cell.values) {
        if (std::isfinite(v)) {
            ok.push_back(v);
        }
    }
    cell.failures = cell.values.size() - ok.size();
    if (ok.empty()) {
        cell.mean = std::numeric_limits<double>::quiet_NaN();
        cell.sd = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    const double m = static_cast<double>(ok.size());
    double sum = 0.0;
    for (double v : ok) {
        sum += v;
    }
    const double mean = sum / m;
    if (kind == ExperimentKind::Testing) {
        cell.mean = 100.0 * mean;
        cell.sd = 100.0 * std::sqrt(mean * (1.0 - mean) / m);
        return;
    }
    double ss = 0.0;
    for (double v : ok) {
        ss += (v - mean) * (v - mean);
    }
    cell.mean = mean;
    cell.sd = ok.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
}

nlohmann::json cell_fingerprint(const SweepConfig& cfg) {
    nlohmann::json j = to_json(cfg);
    j.erase("functions");
    j.erase("sample_sizes");
    j.erase("methods");
    return j;
}

std::filesystem::path cell_path(const SweepConfig& cfg, FunctionId f, std::size_t n, const std::string& method) {
    return cfg.cell_dir /
           (to_string(cfg.kind) + "_" + to_string(f) + "_n" + std::to_string(n) + "_" + method + ".json");
}

bool try_resume(const SweepConfig& cfg, CellResult& cell) {
    const auto path = cell_path(cfg, cell.function, cell.n, cell.method);
    if (!std::filesystem::exists(path)) {
        return false;
    }
    nlohmann::json j;
    try {
        j = read_json_file(path);
    } catch (const std::exception&) {
        return false;
    }
    if (!j.is_object() || j.value("config", nlohmann::json()) != cell_fingerprint(cfg) || !j.contains("values") ||
        !j.at("values").is_array() || j.at("values").size() != cfg.datasets) {
        return false;
    }
    cell.values.clear();
    for (const auto& v : j.at("values")) {
        cell.values.push_back(v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN());
    }
    cell.error = j.value("error", std::string());
    cell.resumed = true;
    return true;
}

void store_cell(const SweepConfig& cfg, const CellResult& cell) {
    nlohmann::json values = nlohmann::json::array();
    for (double v : cell.values) {
        values.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
    }
    const nlohmann::json j{{"config", cell_fingerprint(cfg)},
                           {"function", to_string(cell.function)},
                           {"n", cell.n},
                           {"method", cell.method},
                           {"values", std::move(values)},
                           {"error", cell.error}};
    write_text_file(cell_path(cfg, cell.function, cell.n, cell.method), j.dump(2) + "\n");
}

ExperimentReport run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    ExperimentReport report;
    report.kind = cfg.kind;
    report.config = to_json(cfg);
    for (FunctionId f : cfg.functions) {
        for (std::size_t n : cfg.sample_sizes) {
            for (const auto& method : cfg.methods) {
                CellResult cell;
                cell.function = f;
                cell.n = n;
                cell.method = method;
                if (cfg.cell_dir.empty() || !try_resume(cfg, cell)) {
                    cell.values.assign(cfg.datasets, 0.0);
                    std::vector<std::string> errors(cfg.datasets);
                    parallel_for(cfg.datasets, cfg.threads, [&](std::size_t r) {
                        try {
                            cell.values[r] = evaluate_dataset(cfg, f, n, method, r);
                        } catch (const std::exception& e) {
                            cell.values[r] = std::numeric_limits<double>::quiet_NaN();
                            errors[r] = e.what();
                        }
                    });
                    for (const auto& e : errors) {
                        if (!e.empty()) {
                            cell.error = e;
                            break;
                        }
                    }
                    if (!cfg.cell_dir.empty()) {
                        store_cell(cfg, cell);
                    }
                }
                summarize(cell, cfg.kind);
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

std::vector<FunctionId> parse_functions(const nlohmann::json& v) {
    std::vector<FunctionId> out;
    if (!v.is_array()) {
        throw ConfigError("'functions' must be an array of names like \"f1\"");
    }
    for (const auto& e : v) {
        if (!e.is_string()) {
            throw ConfigError("'functions' must be an array of names like \"f1\"");
        }
        out.push_back(parse_function_id(e.get<std::string>()));
    }
    return out;
}

template <typename T>
T get_as(const nlohmann::json& v, const char* key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("sweep key '") + key + "' has the wrong type");
    }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    return kind == ExperimentKind::Estimation ? "estimation" : "testing";
}

SweepConfig SweepConfig::estimation_defaults() {
    SweepConfig cfg;
    cfg.kind = ExperimentKind::Estimation;
    cfg.functions = {FunctionId::f1, FunctionId::f2, FunctionId::f3, FunctionId::f4, FunctionId::f5, FunctionId::f6};
    cfg.sample_sizes = {100, 200, 500};
    cfg.methods = {"BP", "LS"};
    cfg.datasets = 20;
    return cfg;
}

SweepConfig SweepConfig::testing_defaults() {
    SweepConfig cfg;
    cfg.kind = ExperimentKind::Testing;
    cfg.functions.assign(kAllFunctions.begin(), kAllFunctions.end());
    cfg.sample_sizes = {100, 200, 500};
    cfg.methods = {"BP", "LR", "PL"};
    cfg.datasets = 200;
    return cfg;
}

void SweepConfig::validate() const {
    if (functions.empty() || sample_sizes.empty() || methods.empty() || datasets == 0) {
        throw ConfigError("sweep needs functions, sample sizes, methods and at least one dataset");
    }
    const auto& allowed = kind == ExperimentKind::Estimation ? kEstimationMethods : kTestingMethods;
    for (const auto& m : methods) {
        if (!allowed.count(m)) {
            throw ConfigError("method '" + m + "' is not available for " + to_string(kind) + " sweeps");
        }
    }
    for (auto n : sample_sizes) {
        if (n < 4) {
            throw ConfigError("sample sizes must be at least 4");
        }
    }
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
        throw ConfigError("noise_sd must be finite and nonnegative");
    }
    if (quad_per_cell == 0) {
        throw ConfigError("quad_per_cell must be >= 1");
    }
    if (estimate.m_draws == 0) {
        throw ConfigError("m_draws must be >= 1");
    }
    prior.validate(1);
    test.validate();
}

SweepConfig sweep_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("sweep config must be a JSON object");
    }
    SweepConfig cfg = SweepConfig::estimation_defaults();
    if (j.contains("kind")) {
        const auto kind = get_as<std::string>(j.at("kind"), "kind");
        if (kind == "testing") {
            cfg = SweepConfig::testing_defaults();
        } else if (kind != "estimation") {
            throw ConfigError("sweep kind must be 'estimation' or 'testing'");
        }
    }
    for (const auto& [key, v] : j.items()) {
        if (key == "kind") {
            continue;
        }
        if (key == "functions") {
            cfg.functions = parse_functions(v);
        } else if (key == "sample_sizes") {
            cfg.sample_sizes = get_as<std::vector<std::size_t>>(v, "sample_sizes");
        } else if (key == "methods") {
            cfg.methods = get_as<std::vector<std::string>>(v, "methods");
        } else if (key == "datasets") {
            cfg.datasets = get_as<std::size_t>(v, "datasets");
        } else if (key == "base_seed") {
            cfg.base_seed = get_as<std::uint64_t>(v, "base_seed");
        } else if (key == "noise_sd") {
            cfg.noise_sd = get_as<double>(v, "noise_sd");
        } else if (key == "prior") {
            cfg.prior = prior_from_json(v);
        } else if (key == "m_draws") {
            const auto m = get_as<std::size_t>(v, "m_draws");
            cfg.estimate.m_draws = m;
            cfg.test.m_draws = m;
        } else if (key == "j_rule") {
            const auto rule = JRule::parse(get_as<std::string>(v, "j_rule"));
            cfg.estimate.j_rule = rule;
            cfg.test.j_rule = rule;
        } else if (key == "sigma_mode") {
            const auto mode = parse_sigma_mode(get_as<std::string>(v, "sigma_mode"));
            cfg.estimate.sigma_mode = mode;
            cfg.test.sigma_mode = mode;
        } else if (key == "gamma") {
            cfg.test.gamma = get_as<double>(v, "gamma");
        } else if (key == "a") {
            cfg.test.a = get_as<double>(v, "a");
        } else if (key == "b") {
            cfg.test.b = get_as<double>(v, "b");
        } else if (key == "M0") {
            cfg.test.M0 = get_as<double>(v, "M0");
        } else if (key == "level") {
            cfg.level = get_as<double>(v, "level");
        } else if (key == "quad_per_cell") {
            cfg.quad_per_cell = get_as<std::size_t>(v, "quad_per_cell");
        } else {
            throw ConfigError("unknown sweep key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

nlohmann::json to_json(const SweepConfig& cfg) {
    std::vector<std::string> fns;
    for (auto f : cfg.functions) {
        fns.push_back(to_string(f));
    }
    nlohmann::json j{{"kind", to_string(cfg.kind)},
                     {"functions", fns},
                     {"sample_sizes", cfg.sample_sizes},
                     {"methods", cfg.methods},
                     {"datasets", cfg.datasets},
                     {"base_seed", cfg.base_seed},
                     {"noise_sd", cfg.noise_sd},
                     {"prior", to_json(cfg.prior)}};
    if (cfg.kind == ExperimentKind::Estimation) {
        j["m_draws"] = cfg.estimate.m_draws;
        j["j_rule"] = cfg.estimate.j_rule.to_string();
        j["sigma_mode"] = to_string(cfg.estimate.sigma_mode);
        j["quad_per_cell"] = cfg.quad_per_cell;
    } else {
        j["m_draws"] = cfg.test.m_draws;
        j["j_rule"] = cfg.test.j_rule.to_string();
        j["sigma_mode"] = to_string(cfg.test.sigma_mode);
        j["gamma"] = cfg.test.gamma;
        j["a"] = cfg.test.a;
        j["b"] = cfg.test.b;
        j["M0"] = cfg.test.M0;
        j["level"] = cfg.level;
    }
    return j;
}

ExperimentReport run_estimation_experiment(const SweepConfig& cfg) {
    if (cfg.kind != ExperimentKind::Estimation) {
        throw ConfigError("run_estimation_experiment needs an estimation sweep");
    }
    return run_sweep(cfg);
}

ExperimentReport run_testing_experiment(const SweepConfig& cfg) {
    if (cfg.kind != ExperimentKind::Testing) {
        throw ConfigError("run_testing_experiment needs a testing sweep");
    }
    return run_sweep(cfg);
}

ExperimentReport run_experiment(const SweepConfig& cfg) {
    return run_sweep(cfg);
}

void write_table_csv(std::ostream& out, const ExperimentReport& report) {
    std::vector<std::pair<std::size_t, std::string>> columns;
    std::vector<FunctionId> rows;
    std::map<std::tuple<FunctionId, std::size_t, std::string>, const CellResult*> lookup;
    for (const auto& c : report.cells) {
        const std::pair<std::size_t, std::string> col{c.n, c.method};
        if (std::find(columns.begin(), columns.end(), col) == columns.end()) {
            columns.push_back(col);
        }
        if (std::find(rows.begin(), rows.end(), c.function) == rows.end()) {
            rows.push_back(c.function);
        }
        lookup[{c.function, c.n, c.method}] = &c;
    }
    std::stable_sort(columns.begin(), columns.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    out << "function";
    for (const auto& [n, method] : columns) {
        out << ",n" << n << '_' << method;
    }
    out << '\n';
    for (FunctionId f : rows) {
        out << to_string(f);
        for (const auto& [n, method] : columns) {
            out << ',';
            const auto it = lookup.find({f, n, method});
            if (it == lookup.end()) {
                continue;
            }
            const CellResult& c = *it->second;
            if (report.kind == ExperimentKind::Estimation) {
                out << format_fixed(c.mean, 4) << " (" << format_fixed(c.sd, 4) << ')';
            } else {
                out << format_fixed(c.mean, 1);
            }
            if (c.failures > 0) {
                out << " [" << c.failures << " failed]";
            }
        }
        out << '\n';
    }
}

void write_long_csv(std::ostream& out, const ExperimentReport& report) {
    out << "kind,function,n,method,mean,sd,datasets,failures,error\n";
    for (const auto& c : report.cells) {
        out << to_string(report.kind) << ',' << to_string(c.function) << ',' << c.n << ',' << c.method << ','
            << format_double(c.mean) << ',' << format_double(c.sd) << ',' << c.values.size() << ',' << c.failures
            << ',' << csv_quote(c.error) << '\n';
    }
}

void write_svg_plot(std::ostream& out, const ExperimentReport& report) {
    constexpr double width = 720.0;
    constexpr double height = 440.0;
    constexpr double left = 70.0;
    constexpr double right = 170.0;
    constexpr double top = 30.0;
    constexpr double bottom = 50.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    std::vector<std::size_t> ns;
    std::vector<std::pair<FunctionId, std::string>> series;
    double y_max = 0.0;
    for (const auto& c : report.cells) {
        if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) {
            ns.push_back(c.n);
        }
        const std::pair<FunctionId, std::string> s{c.function, c.method};
        if (std::find(series.begin(), series.end(), s) == series.end()) {
            series.push_back(s);
        }
        if (std::isfinite(c.mean)) {
            y_max = std::max(y_max, c.mean);
        }
    }
    std::sort(ns.begin(), ns.end());
    const bool testing = report.kind == ExperimentKind::Testing;
    if (testing) {
        y_max = 100.0;
    } else if (y_max <= 0.0) {
        y_max = 1.0;
    } else {
        y_max *= 1.1;
    }
    auto x_of = [&](std::size_t n) {
        const auto i = static_cast<double>(std::find(ns.begin(), ns.end(), n) - ns.begin());
        return ns.size() > 1 ? left + plot_w * i / static_cast<double>(ns.size() - 1) : left + plot_w / 2.0;
    };
    auto y_of = [&](double v) { return top + plot_h * (1.0 - v / y_max); };
    auto fmt = [](double v) { return format_fixed(v, 2); };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    static const char* dashes[] = {"", "6,3", "2,3", "8,3,2,3"};
    std::vector<std::string> methods;
    std::vector<FunctionId> fns;
    for (const auto& [f, m] : series) {
        if (std::find(methods.begin(), methods.end(), m) == methods.end()) {
            methods.push_back(m);
        }
        if (std::find(fns.begin(), fns.end(), f) == fns.end()) {
            fns.push_back(f);
        }
    }

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << fmt(left) << "\" y=\"18\">"
        << (testing ? "Rejection rate (%) vs n" : "Mean L1 error vs n") << "</text>\n";
    out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top + plot_h) << "\" x2=\"" << fmt(left + plot_w)
        << "\" y2=\"" << fmt(top + plot_h) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left) << "\" y2=\""
        << fmt(top + plot_h) << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = y_max * t / 4.0;
        out << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(y_of(v) + 4) << "\" text-anchor=\"end\">"
            << format_fixed(v, testing ? 0 : 3) << "</text>\n";
    }
    for (auto n : ns) {
        out << "<text x=\"" << fmt(x_of(n)) << "\" y=\"" << fmt(top + plot_h + 18)
            << "\" text-anchor=\"middle\">" << n << "</text>\n";
    }
    out << "<text x=\"" << fmt(left + plot_w / 2) << "\" y=\"" << fmt(height - 10)
        << "\" text-anchor=\"middle\">n</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& [f, m] = series[s];
        const auto fi = static_cast<std::size_t>(std::find(fns.begin(), fns.end(), f) - fns.begin());
        const auto mi = static_cast<std::size_t>(std::find(methods.begin(), methods.end(), m) - methods.begin());
        const char* color = palette[fi % 10];
        const char* dash = dashes[mi % 4];
        std::vector<std::pair<std::size_t, double>> pts;
        for (const auto& c : report.cells) {
            if (c.function == f && c.method == m && std::isfinite(c.mean)) {
                pts.emplace_back(c.n, c.mean);
            }
        }
        std::sort(pts.begin(), pts.end());
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (*dash != '\0') {
            out << " stroke-dasharray=\"" << dash << "\"";
        }
        out << " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out << (i ? " " : "") << fmt(x_of(pts[i].first)) << ',' << fmt(y_of(pts[i].second));
        }
        out << "\"/>\n";
        for (const auto& [n, v] : pts) {
            out << "<circle cx=\"" << fmt(x_of(n)) << "\" cy=\"" << fmt(y_of(v)) << "\" r=\"2.5\" fill=\"" << color
                << "\"/>\n";
        }
        const double ly = top + 14.0 * static_cast<double>(s);
        out << "<line x1=\"" << fmt(width - right + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\""
            << fmt(width - right + 36) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\"";
        if (*dash != '\0') {
            out << " stroke-dasharray=\"" << dash << "\"";
        }
        out << "/>\n<text x=\"" << fmt(width - right + 42) << "\" y=\"" << fmt(ly + 4) << "\">"
            << xml_escape(to_string(f) + " " + m) << "</text>\n";
    }
    out << "</svg>\n";
}

nlohmann::json to_json(const ExperimentReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : report.cells) {
        auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
        nlohmann::json values = nlohmann::json::array();
        for (double v : c.values) {
            values.push_back(num(v));
        }
        cells.push_back({{"function", to_string(c.function)},
                         {"n", c.n},
                         {"method", c.method},
                         {"mean", num(c.mean)},
                         {"sd", num(c.sd)},
                         {"failures", c.failures},
                         {"error", c.error},
                         {"values", std::move(values)}});
    }
    return {{"kind", to_string(report.kind)}, {"config", report.config}, {"cells", std::move(cells)}};
}

}  // namespace monoreg
