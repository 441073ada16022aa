#include "monoreg/simbench.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>

#include "monoreg/error.hpp"
#include "monoreg/parallel.hpp"
#include "monoreg/projection.hpp"
#include "monoreg/random.hpp"

namespace monoreg {

Dataset generate(const GeneratorSpec& spec) {
    if (spec.n == 0) {
        throw ConfigError("generator needs n >= 1");
    }
    if (!(spec.noise_sd >= 0.0)) {
        throw ConfigError("noise_sd must be nonnegative");
    }
    Rng rng(derive_seed(spec.seed, {label_hash("generate")}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> x(spec.n * 2);
    std::vector<double> y(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        x[2 * i] = unif(rng);
        x[2 * i + 1] = unif(rng);
        y[i] = evaluate(spec.id, std::span<const double>(x.data() + 2 * i, 2)) + spec.noise_sd * noise(rng);
    }
    return Dataset(2, std::move(x), std::move(y));
}

BpFit bp_estimate(const Dataset& data, const PriorConfig& prior, const EstimateConfig& cfg, std::uint64_t seed) {
    if (cfg.m_draws == 0) {
        throw ConfigError("m_draws must be >= 1");
    }
    const GridSpec grid(data.dim(), cfg.j_rule.resolve(data.size(), data.dim()));
    const BlockStats stats = bin(data, grid);
    const PosteriorParams params = posterior_params(stats, prior);
    const SigmaMode sigma = resolve_sigma(cfg.sigma_mode, stats, prior);

    BpFit fit;
    std::optional<InverseGammaParams> sigma_post;
    if (sigma.kind == SigmaMode::Kind::InverseGamma) {
        sigma_post = sigma_posterior(stats, prior);
        fit.sigma_sq = sigma_post->mean();
    } else if (sigma.kind == SigmaMode::Kind::PlugInMMLE) {
        const auto est = sigma_mmle(stats, prior);
        fit.sigma_sq = est.sigma_sq;
        fit.sigma_clamped = est.clamped;
    } else {
        fit.sigma_sq = sigma.sigma * sigma.sigma;
    }

    const WeightVector weights = WeightVector::empirical(stats);
    std::vector<std::vector<double>> projections(cfg.m_draws);
    fit.distances.resize(cfg.m_draws);
    parallel_for(cfg.m_draws, cfg.threads, [&](std::size_t i) {
        const PosteriorDraw draw = sample_one(params, sigma, sigma_post, seed, i);
        StepFunction proj = project_l1(draw.f, weights);
        fit.distances[i] = projection_cost(draw.f.theta, proj.theta, weights, Norm::L1);
        projections[i] = std::move(proj.theta);
    });
    // Fixed summation order keeps the mean independent of the thread count.
    std::vector<double> mean(grid.size(), 0.0);
    for (const auto& p : projections) {
        for (std::size_t j = 0; j < mean.size(); ++j) {
            mean[j] += p[j];
        }
    }
    for (double& v : mean) {
        v /= static_cast<double>(cfg.m_draws);
    }
    fit.estimate = StepFunction(grid, std::move(mean));
    return fit;
}

StepFunction ls_baseline(const Dataset& data, const GridSpec& grid) {
    const BlockStats stats = bin(data, grid);
    return project_l2(StepFunction(grid, stats.means), WeightVector::empirical(stats));
}

namespace {

struct SlopeTValues {
    double t1 = 0.0;
    double t2 = 0.0;
};

double t_value(double beta, double se) {
    if (se > 0.0) {
        return beta / se;
    }
    if (beta > 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return beta < 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
}

/// OLS of y on (1, x1, x2); returns nullopt when the design is rank deficient or df < 1.
std::optional<SlopeTValues> ols_slopes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto n = X.rows();
    if (n <= 3) {
        return std::nullopt;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) {
        return std::nullopt;
    }
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd resid = y - X * beta;
    const double s2 = resid.squaredNorm() / static_cast<double>(n - 3);
    const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    return SlopeTValues{t_value(beta(1), std::sqrt(s2 * xtx_inv(1, 1))),
                        t_value(beta(2), std::sqrt(s2 * xtx_inv(2, 2)))};
}

double upper_t_quantile(double df, double prob) {
    boost::math::students_t dist(df);
    return boost::math::quantile(dist, prob);
}

void require_2d(const Dataset& data) {
    if (data.dim() != 2) {
        throw DomainError("baseline tests are defined for d = 2");
    }
}

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw ConfigError("significance level must lie in (0, 1)");
    }
}

}  // namespace

bool lr_test(const Dataset& data, double level) {
    require_2d(data);
    check_level(level);
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto p = data.point(static_cast<std::size_t>(i));
        X(i, 0) = 1.0;
        X(i, 1) = p[0];
        X(i, 2) = p[1];
        y(i) = data.responses()[static_cast<std::size_t>(i)];
    }
    const auto t = ols_slopes(X, y);
    if (!t) {
        throw DomainError("linear-model baseline: singular design or too few observations");
    }
    const double crit = upper_t_quantile(static_cast<double>(n - 3), 1.0 - level / 2.0);
    return std::min(t->t1, t->t2) < -crit;
}

bool pl_test(const Dataset& data, double level) {
    require_2d(data);
    check_level(level);
    const GridSpec grid(2, 3);
    std::vector<std::vector<std::size_t>> members(grid.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        members[block_offset(data.point(i), grid)].push_back(i);
    }
    const double cells = static_cast<double>(grid.size());
    for (const auto& idx : members) {
        if (idx.size() < 4) {
            continue;
        }
        const auto m = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd X(m, 3);
        Eigen::VectorXd y(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            const auto p = data.point(idx[static_cast<std::size_t>(r)]);
            X(r, 0) = 1.0;
            X(r, 1) = p[0];
            X(r, 2) = p[1];
            y(r) = data.responses()[idx[static_cast<std::size_t>(r)]];
        }
        const auto t = ols_slopes(X, y);
        if (!t) {
            continue;
        }
        const double crit = upper_t_quantile(static_cast<double>(m - 3), 1.0 - level / (2.0 * cells));
        if (std::min(t->t1, t->t2) < -crit) {
            return true;
        }
    }
    return false;
}

}  // namespace monoreg
