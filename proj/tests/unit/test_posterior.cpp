#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "monoreg/error.hpp"
#include "monoreg/posterior.hpp"

using namespace monoreg;

namespace {

// log N(y; zeta 1, sigma^2 (I + lambda^2 11^T)) by Cholesky.
double multinormal_logpdf(const std::vector<double>& y, double zeta, double lambda_sq, double sigma) {
    const auto m = static_cast<Eigen::Index>(y.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(m, m) + lambda_sq * Eigen::MatrixXd::Ones(m, m);
    cov *= sigma * sigma;
    Eigen::VectorXd r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        r[i] = y[static_cast<std::size_t>(i)] - zeta;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::MatrixXd L = llt.matrixL();
    const double logdet = 2.0 * L.diagonal().array().log().sum();
    const double quad = r.dot(llt.solve(r));
    return -0.5 * (static_cast<double>(m) * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

// log of the integral over theta of prod_i N(y_i; theta, sigma^2) N(theta; zeta, sigma^2 lambda^2).
double quadrature_log_evidence(const std::vector<double>& y, double zeta, double lambda_sq, double sigma) {
    auto log_joint = [&](double t) {
        double s = 0.0;
        for (double v : y) {
            s += -0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) - (v - t) * (v - t) / (2.0 * sigma * sigma);
        }
        const double tau2 = sigma * sigma * lambda_sq;
        return s - 0.5 * std::log(2.0 * std::numbers::pi * tau2) - (t - zeta) * (t - zeta) / (2.0 * tau2);
    };
    double sum = 0.0;
    for (double v : y) {
        sum += v;
    }
    const double N = static_cast<double>(y.size());
    const double centre = (sum + zeta / lambda_sq) / (N + 1.0 / lambda_sq);
    const double sd = sigma / std::sqrt(N + 1.0 / lambda_sq);
    const double peak = log_joint(centre);
    auto f = [&](double t) { return std::exp(log_joint(t) - peak); };
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, centre - 40.0 * sd, centre + 40.0 * sd, 15, 1e-14);
    return peak + std::log(integral);
}

PriorConfig unit_prior() {
    PriorConfig p;
    p.lambda_sq = {1.0};
    return p;
}

Dataset random_dataset(std::mt19937_64& rng, std::size_t d, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> x(n * d), y(n);
    for (auto& v : x) {
        v = u(rng);
    }
    for (auto& v : y) {
        v = 0.5 + z(rng);
    }
    return Dataset(d, x, y);
}

}  // namespace

TEST_SUITE("posterior") {

TEST_CASE("posterior_params examples") {
    // Block 1: N=3 with mean 2; block 2 empty.
    const Dataset data(1, {0.1, 0.2, 0.3}, {1.0, 2.0, 3.0});
    const auto p = posterior_params(bin(data, GridSpec(1, 2)), unit_prior());
    CHECK(p.mean[0] == doctest::Approx(1.5));
    CHECK(p.var_scale[0] == doctest::Approx(0.25));
    CHECK(p.mean[1] == 0.0);
    CHECK(p.var_scale[1] == 1.0);
    CHECK(posterior_params(bin(data, GridSpec(1, 2)), PriorConfig{}).var_scale[1] == 100.0);

    PriorConfig flat;
    flat.lambda_sq = {1e12};
    const Dataset five(1, {0.1, 0.2, 0.3, 0.4, 0.45}, {7, 7, 7, 7, 7});
    const auto q = posterior_params(bin(five, GridSpec(1, 2)), flat);
    CHECK(q.mean[0] == doctest::Approx(7.0).epsilon(1e-9));
    CHECK(q.var_scale[0] == doctest::Approx(0.2).epsilon(1e-9));

    PriorConfig wrong;
    wrong.zeta = {0.0, 1.0, 2.0};
    CHECK_THROWS_AS(posterior_params(bin(data, GridSpec(1, 2)), wrong), ConfigError);
}

TEST_CASE("sigma_mmle and the inverse-gamma update") {
    const Dataset two(1, {0.2, 0.7}, {1.0, 1.0});
    const auto stats = bin(two, GridSpec(1, 1));
    const auto est = sigma_mmle(stats, unit_prior());
    CHECK(est.sigma_sq == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK_FALSE(est.clamped);
    const auto ig = sigma_posterior(stats, unit_prior());
    CHECK(ig.shape == doctest::Approx(2.0));
    CHECK(ig.scale == doctest::Approx(4.0 / 3.0));

    // Responses equal to the prior centre: the estimate hits the floor.
    const Dataset centred(1, {0.1, 0.6, 0.9}, {0.0, 0.0, 0.0});
    const auto floor = sigma_mmle(bin(centred, GridSpec(1, 2)), PriorConfig{});
    CHECK(floor.clamped);
    CHECK(floor.sigma_sq == kSigmaSqFloor);
}

TEST_CASE("inverse-gamma parameters satisfy the update identity exactly") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        const auto data = random_dataset(rng, 2, 30 + rep);
        const auto stats = bin(data, GridSpec(2, 3));
        PriorConfig prior;
        prior.beta1 = 0.5 + rep % 3;
        prior.beta2 = 2.0;
        const auto ig = sigma_posterior(stats, prior);
        const double n = static_cast<double>(data.size());
        CHECK(ig.shape - prior.beta1 == n / 2.0);
        CHECK(ig.scale - prior.beta2 == doctest::Approx(n * sigma_mmle(stats, prior).sigma_sq / 2.0).epsilon(1e-14));
    }
}

TEST_CASE("sigma_mmle maximises the marginal likelihood") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        const auto data = random_dataset(rng, 2, 40);
        const auto stats = bin(data, GridSpec(2, 2));
        PriorConfig prior;
        prior.zeta = {0.3};
        prior.lambda_sq = {0.5 + 0.1 * rep};
        auto neg = [&](double log_sigma) { return -log_marginal_likelihood(stats, prior, std::exp(log_sigma)); };
        const auto [arg, val] = boost::math::tools::brent_find_minima(neg, -6.0, 4.0, 50);
        CHECK(sigma_mmle(stats, prior).sigma_sq == doctest::Approx(std::exp(2.0 * arg)).epsilon(1e-6));
    }
}

TEST_CASE("sigma_mmle is invariant to permutations") {
    std::mt19937_64 rng(6);
    const auto data = random_dataset(rng, 2, 60);
    const auto base = sigma_mmle(bin(data, GridSpec(2, 3)), PriorConfig{}).sigma_sq;
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> x, y;
    for (auto i : order) {
        x.insert(x.end(), data.point(i).begin(), data.point(i).end());
        y.push_back(data.responses()[i]);
    }
    CHECK(sigma_mmle(bin(Dataset(2, x, y), GridSpec(2, 3)), PriorConfig{}).sigma_sq == doctest::Approx(base).epsilon(1e-13));
    // Swapping the two axes relabels the blocks consistently.
    std::vector<double> xs(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        xs[2 * i] = x[2 * i + 1];
        xs[2 * i + 1] = x[2 * i];
    }
    CHECK(sigma_mmle(bin(Dataset(2, xs, y), GridSpec(2, 3)), PriorConfig{}).sigma_sq == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("log marginal likelihood matches multinormal densities and quadrature") {
    // Two points in one block, zeta = 0, lambda^2 = 1, sigma = 1.
    const std::vector<double> y2{0.3, -1.2};
    const Dataset two(1, {0.1, 0.2}, y2);
    CHECK(log_marginal_likelihood_J(two, GridSpec(1, 1), unit_prior(), 1.0) ==
          doctest::Approx(multinormal_logpdf(y2, 0.0, 1.0, 1.0)).epsilon(1e-12));

    // lambda^2 -> 0: a plain N(zeta, sigma^2) log-density.
    PriorConfig tight;
    tight.lambda_sq = {1e-14};
    const Dataset one(1, {0.5}, {0.8});
    const double expected = -0.5 * std::log(2.0 * std::numbers::pi * 0.49) - 0.64 / (2.0 * 0.49);
    CHECK(log_marginal_likelihood_J(one, GridSpec(1, 1), tight, 0.7) == doctest::Approx(expected).epsilon(1e-10));

    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> size(1, 4);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        // Up to 4 points in each of 3 blocks on a J=3 line.
        std::vector<double> x, y;
        std::vector<std::vector<double>> per_block(3);
        for (std::size_t j = 0; j < 3; ++j) {
            const int m = rep % 7 == 0 && j == 1 ? 0 : size(rng);
            for (int i = 0; i < m; ++i) {
                x.push_back((static_cast<double>(j) + 0.5) / 3.0);
                y.push_back(1.0 + 2.0 * z(rng));
                per_block[j].push_back(y.back());
            }
        }
        if (y.empty()) {
            continue;
        }
        PriorConfig prior;
        prior.zeta = {0.5, -0.2, 1.0};
        prior.lambda_sq = {0.3, 2.0, 1.5};
        const double sigma = 0.5 + 0.05 * (rep % 20);
        const double got = log_marginal_likelihood_J(Dataset(1, x, y), GridSpec(1, 3), prior, sigma);
        double dense = 0.0;
        double quad = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            if (!per_block[j].empty()) {
                dense += multinormal_logpdf(per_block[j], prior.zeta[j], prior.lambda_sq[j], sigma);
                quad += quadrature_log_evidence(per_block[j], prior.zeta[j], prior.lambda_sq[j], sigma);
            }
        }
        REQUIRE(std::abs(got - dense) <= 1e-8 * std::max(1.0, std::abs(dense)));
        REQUIRE(std::abs(got - quad) <= 1e-8 * std::max(1.0, std::abs(quad)));
    }
    CHECK_THROWS_AS(log_marginal_likelihood_J(two, GridSpec(1, 1), PriorConfig{}, 0.0), DomainError);
}

TEST_CASE("posterior over J") {
    std::mt19937_64 rng(12);
    const auto data = random_dataset(rng, 2, 200);
    const auto single = posterior_over_J(data, PriorConfig{}, 1.0, 1);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == 1.0);

    // Constant truth: the posterior concentrates on coarse grids.
    std::vector<double> x(400), y(200);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 0.1);
    for (auto& v : x) {
        v = u(rng);
    }
    for (auto& v : y) {
        v = 0.4 + z(rng);
    }
    const auto post = posterior_over_J(Dataset(2, x, y), PriorConfig{}, 0.1, default_J_max(200, 2));
    double total = 0.0;
    for (double p : post) {
        total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const auto mode = static_cast<std::size_t>(std::max_element(post.begin(), post.end()) - post.begin()) + 1;
    CHECK(mode <= 2);
    CHECK(default_J_max(200, 2) == 6 + 5);
}

TEST_CASE("sampling is deterministic and independent of the thread count") {
    std::mt19937_64 rng(14);
    const auto data = random_dataset(rng, 2, 80);
    const auto stats = bin(data, GridSpec(2, 3));
    const auto params = posterior_params(stats, PriorConfig{});
    const auto ig = sigma_posterior(stats, PriorConfig{});
    for (const auto& mode : {resolve_sigma(SigmaMode::plug_in(), stats, PriorConfig{}), SigmaMode::inverse_gamma()}) {
        const std::optional<InverseGammaParams> post =
            mode.kind == SigmaMode::Kind::InverseGamma ? std::optional(ig) : std::nullopt;
        const auto a = sample_unrestricted(params, mode, post, 99, 3, 1);
        const auto b = sample_unrestricted(params, mode, post, 99, 3, 1);
        const auto c = sample_unrestricted(params, mode, post, 99, 3, 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(a[i].f.theta == b[i].f.theta);
            CHECK(a[i].f.theta == c[i].f.theta);
            CHECK(a[i].sigma == c[i].sigma);
            CHECK(sample_one(params, mode, post, 99, i).f.theta == a[i].f.theta);
        }
    }
    CHECK_THROWS_AS(sample_unrestricted(params, SigmaMode::inverse_gamma(), std::nullopt, 1, 2), ConfigError);
    CHECK_THROWS_AS(SigmaMode::known(0.0), DomainError);
}

TEST_CASE("draws have the posterior moments") {
    std::mt19937_64 rng(16);
    const auto data = random_dataset(rng, 1, 50);
    const auto stats = bin(data, GridSpec(1, 4));
    const auto params = posterior_params(stats, PriorConfig{});
    const std::size_t m = 20000;
    const auto draws = sample_unrestricted(params, SigmaMode::known(0.5), std::nullopt, 5, m);
    for (std::size_t j = 0; j < 4; ++j) {
        double s = 0.0, s2 = 0.0;
        for (const auto& d : draws) {
            s += d.f[j];
            s2 += d.f[j] * d.f[j];
        }
        const double mean = s / m;
        const double var = s2 / m - mean * mean;
        const double sd = 0.5 * std::sqrt(params.var_scale[j]);
        CHECK(std::abs(mean - params.mean[j]) < 4.0 * sd / std::sqrt(static_cast<double>(m)));
        CHECK(var == doctest::Approx(sd * sd).epsilon(0.05));
    }
    // Inverse-gamma sigma^2 draws average to scale / (shape - 1).
    const auto ig = sigma_posterior(stats, PriorConfig{});
    const auto ig_draws = sample_unrestricted(params, SigmaMode::inverse_gamma(), ig, 7, m);
    double s = 0.0;
    for (const auto& d : ig_draws) {
        s += d.sigma * d.sigma;
    }
    CHECK(s / m == doctest::Approx(ig.mean()).epsilon(0.03));

    // Floor sigma: draws collapse onto the posterior mean.
    const auto tiny = sample_unrestricted(params, SigmaMode::known(1e-6), std::nullopt, 3, 2);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(tiny[0].f[j] == doctest::Approx(params.mean[j]).epsilon(1e-5));
    }
}

TEST_CASE("sigma_mmle on simulated data matches its expected bias") {
    // Flat prior: n sigma_hat^2 is the within-block sum of squares. For f(x) = x1 + x2 and uniform X,
    // its expectation is (n - J^2) (sigma0^2 + 1 / (6 J^2)), the second term being the within-block
    // variance of f.
    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 0.1);
    PriorConfig flat;
    flat.lambda_sq = {1e12};
    const std::size_t n = 500;
    const std::size_t J = 5;
    double total = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(2 * n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[2 * i] = u(rng);
            x[2 * i + 1] = u(rng);
            y[i] = x[2 * i] + x[2 * i + 1] + z(rng);
        }
        total += sigma_mmle(bin(Dataset(2, x, y), GridSpec(2, J)), flat).sigma_sq;
    }
    const double expected = (1.0 - 25.0 / 500.0) * (0.01 + 1.0 / (6.0 * 25.0));
    CHECK(total / 20.0 == doctest::Approx(expected).epsilon(0.04));
}

}
