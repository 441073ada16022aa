#include <doctest.h>

#include <cmath>

#include "monoreg/error.hpp"
#include "monoreg/functions.hpp"
#include "monoreg/metrics.hpp"
#include "monoreg/projection.hpp"
#include "monoreg/simbench.hpp"

using namespace monoreg;

TEST_SUITE("simbench") {

TEST_CASE("generator values") {
    const std::vector<double> p{0.3, 0.4};
    CHECK(evaluate(FunctionId::f1, p) == doctest::Approx(0.7));
    CHECK(evaluate(FunctionId::f6, p) == 0.0);
    CHECK(evaluate(FunctionId::f11, p) == doctest::Approx(-0.1));
    CHECK(evaluate(FunctionId::f7, p) == doctest::Approx(0.09));
    CHECK(evaluate(FunctionId::f10, std::vector<double>{0.25, 0.25}) == doctest::Approx(1.0));
    CHECK(parse_function_id("f12") == FunctionId::f12);
    CHECK(to_string(FunctionId::f3) == "f3");
    CHECK_THROWS_AS(parse_function_id("f13"), ConfigError);
}

TEST_CASE("f1-f6 discretise to monotone step functions, f7-f12 do not") {
    for (FunctionId id : kAllFunctions) {
        for (std::size_t J = 1; J <= 32; ++J) {
            const bool mono = is_monotone(discretize_midpoint(regression_function(id), GridSpec(2, J)));
            if (is_monotone_truth(id)) {
                CHECK(mono);
            } else if (J >= 4) {
                CHECK_FALSE(mono);
            }
        }
    }
}

TEST_CASE("generate is deterministic with the requested noise") {
    const auto a = generate({FunctionId::f6, 4000, 0.1, 42});
    const auto b = generate({FunctionId::f6, 4000, 0.1, 42});
    CHECK(std::equal(a.responses().begin(), a.responses().end(), b.responses().begin()));
    CHECK(std::equal(a.predictors().begin(), a.predictors().end(), b.predictors().begin()));
    double s2 = 0.0;
    for (double y : a.responses()) {
        s2 += y * y;
    }
    CHECK(std::sqrt(s2 / 4000.0) == doctest::Approx(0.1).epsilon(0.05));
    const auto c = generate({FunctionId::f6, 4000, 0.1, 43});
    CHECK(c.responses()[0] != a.responses()[0]);
    const auto clean = generate({FunctionId::f1, 10, 0.0, 1});
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(clean.responses()[i] == doctest::Approx(clean.point(i)[0] + clean.point(i)[1]));
    }
}

TEST_CASE("BP estimate on noise-free constant data") {
    std::vector<double> x, y;
    for (int i = 0; i < 400; ++i) {
        x.push_back((i % 20 + 0.5) / 20.0);
        x.push_back((i / 20 + 0.5) / 20.0);
        y.push_back(1.7);
    }
    PriorConfig flat;
    flat.lambda_sq = {1e16};
    EstimateConfig cfg;
    cfg.m_draws = 50;
    const auto fit = bp_estimate(Dataset(2, x, y), flat, cfg, 1);
    CHECK(fit.sigma_clamped);
    CHECK(fit.sigma_sq == kSigmaSqFloor);
    for (double v : fit.estimate.theta) {
        CHECK(v == doctest::Approx(1.7).epsilon(1e-6));
    }
}

TEST_CASE("BP estimate is monotone, reproducible and thread independent") {
    const auto data = generate({FunctionId::f3, 200, 0.1, 5});
    EstimateConfig cfg;
    cfg.m_draws = 100;
    const auto a = bp_estimate(data, PriorConfig{}, cfg, 8);
    cfg.threads = 3;
    const auto b = bp_estimate(data, PriorConfig{}, cfg, 8);
    CHECK(a.estimate.theta == b.estimate.theta);
    CHECK(a.distances == b.distances);
    CHECK(a.distances.size() == 100);
    CHECK(a.estimate.grid.resolution() == JRule::ceil_n14_log().resolve(200, 2));
    CHECK(is_monotone(a.estimate, 1e-12));
}

TEST_CASE("LS baseline") {
    // Monotone block means come back unchanged.
    const Dataset mono(1, {0.1, 0.2, 0.6, 0.9}, {1.0, 2.0, 3.0, 4.0});
    const auto s = ls_baseline(mono, GridSpec(1, 2));
    CHECK(s[0] == doctest::Approx(1.5));
    CHECK(s[1] == doctest::Approx(3.5));
    // A violation pools with the empirical weights 3/4 and 1/4.
    const Dataset viol(1, {0.1, 0.2, 0.3, 0.9}, {2.0, 2.0, 2.0, 0.0});
    const auto t = ls_baseline(viol, GridSpec(1, 2));
    CHECK(t[0] == doctest::Approx(1.5));
    CHECK(t[1] == doctest::Approx(1.5));
}

TEST_CASE("BP beats LS in most seeds at n = 500") {
    int wins = 0;
    int total = 0;
    EstimateConfig cfg;
    for (FunctionId id : {FunctionId::f1, FunctionId::f2, FunctionId::f3, FunctionId::f4, FunctionId::f5}) {
        for (std::uint64_t s = 1; s <= 3; ++s) {
            const auto data = generate({id, 500, 0.1, s});
            const auto bp = bp_estimate(data, PriorConfig{}, cfg, s);
            const auto ls = ls_baseline(data, bp.estimate.grid);
            const auto f0 = regression_function(id);
            wins += lp_distance_to_function(bp.estimate, f0) <= lp_distance_to_function(ls, f0) ? 1 : 0;
            ++total;
        }
    }
    CHECK(2 * wins > total);
}

TEST_CASE("linear-model baseline") {
    for (std::uint64_t s = 1; s <= 5; ++s) {
        CHECK(lr_test(generate({FunctionId::f11, 500, 0.1, s})));
        CHECK_FALSE(lr_test(generate({FunctionId::f12, 500, 0.1, s})));
        CHECK_FALSE(lr_test(generate({FunctionId::f1, 500, 0.1, s})));
    }
    // x2 == x1 makes the design singular.
    std::vector<double> x;
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(i / 20.0);
        x.push_back(i / 20.0);
        y.push_back(i);
    }
    CHECK_THROWS_AS(lr_test(Dataset(2, x, y)), DomainError);
    CHECK_THROWS_AS(lr_test(generate({FunctionId::f1, 50, 0.1, 1}), 1.5), ConfigError);
}

TEST_CASE("piecewise-linear baseline") {
    for (std::uint64_t s = 1; s <= 5; ++s) {
        CHECK(pl_test(generate({FunctionId::f7, 500, 0.1, s})));
        CHECK_FALSE(pl_test(generate({FunctionId::f1, 500, 0.1, s})));
    }
    // Every cell has fewer than 4 points: nothing to test, so accept.
    std::vector<double> x;
    std::vector<double> y;
    for (int i = 0; i < 27; ++i) {
        x.push_back((i % 3 + 0.5) / 3.0);
        x.push_back((i / 3 % 3 + 0.5) / 3.0);
        y.push_back(-static_cast<double>(i));
    }
    CHECK_FALSE(pl_test(Dataset(2, x, y)));
}

}
