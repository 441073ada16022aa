#include "monoreg/testing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "monoreg/error.hpp"
#include "monoreg/metrics.hpp"
#include "monoreg/parallel.hpp"
#include "monoreg/projection.hpp"
#include "monoreg/random.hpp"

namespace monoreg {

namespace {

std::size_t ceil_positive(double v) {
    // Guard against pow() landing a hair above an exact integer.
    const double c = std::ceil(v - 1e-9);
    return std::max<std::size_t>(1, static_cast<std::size_t>(c));
}

}  // namespace

JRule JRule::fixed_J(std::size_t J) {
    if (J == 0) {
        throw ConfigError("fixed J must be >= 1");
    }
    return {Kind::Fixed, J};
}

std::size_t JRule::resolve(std::size_t n, std::size_t d) const {
    const double nn = static_cast<double>(n);
    switch (kind) {
    case Kind::CeilN14:
        return ceil_positive(std::pow(nn, 0.25));
    case Kind::CeilN14Log:
        return ceil_positive(std::pow(nn, 0.25) * std::log10(nn));
    case Kind::OptimalRate:
        return ceil_positive(std::pow(nn, 1.0 / (2.0 + static_cast<double>(d))));
    case Kind::Fixed:
        return fixed;
    }
    return fixed;
}

std::string JRule::to_string() const {
    switch (kind) {
    case Kind::CeilN14:
        return "ceil-n14";
    case Kind::CeilN14Log:
        return "ceil-n14-log";
    case Kind::OptimalRate:
        return "optimal-rate";
    case Kind::Fixed:
        return "fixed:" + std::to_string(fixed);
    }
    return {};
}

JRule JRule::parse(const std::string& text) {
    if (text == "ceil-n14") {
        return ceil_n14();
    }
    if (text == "ceil-n14-log") {
        return ceil_n14_log();
    }
    if (text == "optimal-rate") {
        return optimal_rate();
    }
    if (text.rfind("fixed:", 0) == 0) {
        const std::string num = text.substr(6);
        std::size_t pos = 0;
        unsigned long long J = 0;
        try {
            J = std::stoull(num, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != num.size() || J == 0) {
            throw ConfigError("invalid fixed J in rule '" + text + "'");
        }
        return fixed_J(static_cast<std::size_t>(J));
    }
    throw ConfigError("unknown J rule '" + text + "' (expected ceil-n14, ceil-n14-log, optimal-rate, fixed:<J>)");
}

void TestConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw ConfigError("gamma must lie in (0, 1)");
    }
    if (!(a > 0.0) || !std::isfinite(b)) {
        throw ConfigError("M_n parameters require a > 0 and finite b");
    }
    if (!(M0 > 0.0)) {
        throw ConfigError("M0 must be positive");
    }
    if (m_draws == 0) {
        throw ConfigError("m_draws must be >= 1");
    }
    if (j_rule.kind == JRule::Kind::Fixed && j_rule.fixed == 0) {
        throw ConfigError("fixed J must be >= 1");
    }
}

double TestConfig::Mn(std::size_t n) const {
    return a * std::pow(std::log(static_cast<double>(n)), b);
}

double posterior_probability(const std::vector<double>& distances, double threshold) {
    if (distances.empty()) {
        return 0.0;
    }
    const auto hits = std::count_if(distances.begin(), distances.end(), [threshold](double v) { return v <= threshold; });
    return static_cast<double>(hits) / static_cast<double>(distances.size());
}

TestResult test_fixed_J(const Dataset& data, const PriorConfig& prior, const TestConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    const GridSpec grid(d, cfg.j_rule.resolve(n, d));
    const BlockStats stats = bin(data, grid);
    const PosteriorParams params = posterior_params(stats, prior);
    const SigmaMode sigma = resolve_sigma(cfg.sigma_mode, stats, prior);
    std::optional<InverseGammaParams> sigma_post;
    if (sigma.kind == SigmaMode::Kind::InverseGamma) {
        sigma_post = sigma_posterior(stats, prior);
    }
    const WeightVector weights = WeightVector::empirical(stats);

    TestResult result;
    result.n = n;
    result.d = d;
    result.seed = seed;
    result.J_used = grid.resolution();
    result.threshold = cfg.Mn(n) * std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 2.0));
    result.distances.resize(cfg.m_draws);
    parallel_for(cfg.m_draws, cfg.threads, [&](std::size_t i) {
        const PosteriorDraw draw = sample_one(params, sigma, sigma_post, seed, i);
        const StepFunction proj = project_l1(draw.f, weights);
        result.distances[i] = projection_cost(draw.f.theta, proj.theta, weights, Norm::L1);
    });
    result.posterior_prob = posterior_probability(result.distances, result.threshold);
    result.reject = result.posterior_prob < cfg.gamma;
    return result;
}

TestResult test_adaptive(const Dataset& data, const PriorConfig& prior, const TestConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (cfg.sigma_mode.kind != SigmaMode::Kind::Known) {
        throw ConfigError("the adaptive test requires a known sigma");
    }
    const SigmaMode sigma = SigmaMode::known(cfg.sigma_mode.sigma);
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    const std::size_t J_max = cfg.J_max > 0 ? cfg.J_max : default_J_max(n, d);

    TestResult result;
    result.n = n;
    result.d = d;
    result.seed = seed;
    result.J_posterior = posterior_over_J(data, prior, sigma.sigma, J_max);
    result.J_used = static_cast<std::size_t>(
                        std::max_element(result.J_posterior.begin(), result.J_posterior.end()) -
                        result.J_posterior.begin()) +
                    1;

    std::vector<double> cumulative(J_max);
    std::partial_sum(result.J_posterior.begin(), result.J_posterior.end(), cumulative.begin());

    std::vector<PosteriorParams> params(J_max);
    for (std::size_t J = 1; J <= J_max; ++J) {
        if (result.J_posterior[J - 1] > 0.0) {
            params[J - 1] = posterior_params(bin(data, GridSpec(d, J)), prior);
        }
    }

    const double log_n = std::log(static_cast<double>(n));
    auto radius = [&](std::size_t J) {
        return cfg.M0 * std::sqrt(std::pow(static_cast<double>(J), static_cast<double>(d)) * log_n /
                                  static_cast<double>(n));
    };
    result.threshold = radius(result.J_used);

    const std::uint64_t J_seed = derive_seed(seed, {label_hash("J")});
    const std::uint64_t theta_seed = derive_seed(seed, {label_hash("theta")});
    result.distances.resize(cfg.m_draws);
    result.thresholds.resize(cfg.m_draws);
    result.J_draws.resize(cfg.m_draws);
    parallel_for(cfg.m_draws, cfg.threads, [&](std::size_t i) {
        Rng rng(derive_seed(J_seed, {i}));
        const double u = std::uniform_real_distribution<double>(0.0, cumulative.back())(rng);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t J = static_cast<std::size_t>(it - cumulative.begin()) + 1;
        J = std::min(J, J_max);
        while (result.J_posterior[J - 1] <= 0.0 && J > 1) {
            --J;
        }
        const PosteriorDraw draw = sample_one(params[J - 1], sigma, std::nullopt, theta_seed, i);
        const WeightVector leb = WeightVector::uniform(draw.f.grid);
        const StepFunction proj = project_l1(draw.f, leb);
        result.J_draws[i] = J;
        result.thresholds[i] = radius(J);
        result.distances[i] = hellinger_distance(draw.f, proj, sigma.sigma, Measure::lebesgue());
    });

    std::size_t hits = 0;
    for (std::size_t i = 0; i < cfg.m_draws; ++i) {
        hits += result.distances[i] <= result.thresholds[i] ? 1 : 0;
    }
    result.posterior_prob = static_cast<double>(hits) / static_cast<double>(cfg.m_draws);
    result.reject = result.posterior_prob < cfg.gamma;
    return result;
}

MnFit fit_Mn(const std::vector<DistanceSample>& samples) {
    std::vector<double> xs;
    std::vector<double> ys;
    MnFit fit;
    for (const auto& s : samples) {
        if (s.n < 3) {
            throw CalibrationError("calibration requires n >= 3 so that log log n is defined");
        }
        if (!(s.distance > 0.0)) {
            ++fit.dropped_zero;
            continue;
        }
        const double n = static_cast<double>(s.n);
        xs.push_back(std::log(std::log(n)));
        ys.push_back(std::log(s.distance) + 0.25 * std::log(n));
    }
    if (xs.size() < 2) {
        throw CalibrationError("calibration needs at least two positive distances");
    }
    const double count = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / count;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / count;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 1e-12 * count) {
        throw CalibrationError("calibration regression is degenerate: log log n does not vary");
    }
    fit.b = sxy / sxx;
    fit.a = std::exp(my - fit.b * mx);
    fit.used = xs.size();
    return fit;
}

MnFit calibrate_Mn(const CalibrationConfig& calib, const PriorConfig& prior, const TestConfig& cfg,
                   std::uint64_t seed) {
    if (calib.suite.empty() || calib.sample_sizes.empty() || calib.datasets_per_size == 0) {
        throw ConfigError("calibration needs a non-empty suite, sample sizes and dataset count");
    }
    struct Job {
        std::size_t generator;
        std::size_t n;
        std::size_t rep;
    };
    std::vector<Job> jobs;
    for (std::size_t g = 0; g < calib.suite.size(); ++g) {
        for (auto n : calib.sample_sizes) {
            for (std::size_t r = 0; r < calib.datasets_per_size; ++r) {
                jobs.push_back({g, n, r});
            }
        }
    }
    TestConfig inner = cfg;
    inner.threads = 1;
    std::vector<std::vector<double>> pooled(jobs.size());
    parallel_for(jobs.size(), calib.threads, [&](std::size_t k) {
        const auto& job = jobs[k];
        const std::uint64_t job_seed = derive_seed(seed, {job.generator, job.n, job.rep});
        const Dataset data = calib.suite[job.generator](job.n, derive_seed(job_seed, {label_hash("data")}));
        pooled[k] = test_fixed_J(data, prior, inner, derive_seed(job_seed, {label_hash("posterior")})).distances;
    });
    std::vector<DistanceSample> samples;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        for (double v : pooled[k]) {
            samples.push_back({jobs[k].n, v});
        }
    }
    return fit_Mn(samples);
}

}  // namespace monoreg
