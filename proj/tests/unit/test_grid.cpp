#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "monoreg/error.hpp"
#include "monoreg/grid.hpp"

using namespace monoreg;

namespace {

// All-pairs definition of cone membership, used as an oracle for the neighbour check.
bool monotone_all_pairs(const StepFunction& f) {
    const std::size_t n = f.grid.size();
    for (std::size_t a = 0; a < n; ++a) {
        const auto ia = from_offset(a, f.grid);
        for (std::size_t b = 0; b < n; ++b) {
            if (precedes(ia, from_offset(b, f.grid)) && f[a] > f[b]) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("block_index boundary convention") {
    const GridSpec g(2, 4);
    CHECK(block_index(std::vector<double>{0.0, 0.0}, g) == MultiIndex{{1, 1}});
    CHECK(block_index(std::vector<double>{0.25, 0.26}, g) == MultiIndex{{1, 2}});
    CHECK(block_index(std::vector<double>{1.0, 1.0}, g) == MultiIndex{{4, 4}});
    CHECK_THROWS_AS(block_index(std::vector<double>{1.01, 0.5}, g), DomainError);
    CHECK_THROWS_AS(block_index(std::vector<double>{-0.1, 0.5}, g), DomainError);
}

TEST_CASE("row-major offsets with axis 1 slowest") {
    const GridSpec g(3, 4);
    CHECK(g.stride(0) == 16);
    CHECK(g.stride(1) == 4);
    CHECK(g.stride(2) == 1);
    CHECK(to_offset(MultiIndex{{2, 1, 3}}, g) == 16 + 2);
    for (std::size_t k = 0; k < g.size(); ++k) {
        CHECK(to_offset(from_offset(k, g), g) == k);
    }
    CHECK_THROWS_AS(GridSpec(0, 3), ConfigError);
    CHECK_THROWS_AS(GridSpec(2, 0), ConfigError);
}

TEST_CASE("bin computes counts and means") {
    const GridSpec g(1, 2);
    auto s = bin(Dataset(1, {0.1, 0.9}, {1.0, 3.0}), g);
    CHECK(s.counts == std::vector<std::size_t>{1, 1});
    CHECK(s.means == std::vector<double>{1.0, 3.0});
    s = bin(Dataset(1, {0.1, 0.2}, {1.0, 3.0}), g);
    CHECK(s.counts == std::vector<std::size_t>{2, 0});
    CHECK(s.means[0] == doctest::Approx(2.0));
    CHECK(s.means[1] == 0.0);
    CHECK(s.within_ss[0] == doctest::Approx(2.0));
    CHECK(s.sum_sq == doctest::Approx(10.0));
}

TEST_CASE("bin on a hand-enumerated 2x2 example") {
    // Cells: (0.1,0.1)->(1,1); (0.2,0.7)->(1,2); (0.5,0.5)->(1,1); (0.6,0.1)->(2,1); (0.9,0.9),(1,1)->(2,2).
    const Dataset data(2, {0.1, 0.1, 0.2, 0.7, 0.5, 0.5, 0.6, 0.1, 0.9, 0.9, 1.0, 1.0}, {1, 2, 3, 4, 5, 6});
    const auto s = bin(data, GridSpec(2, 2));
    CHECK(s.counts == std::vector<std::size_t>{2, 1, 1, 2});
    CHECK(s.means[0] == doctest::Approx(2.0));
    CHECK(s.means[3] == doctest::Approx(5.5));
    CHECK(s.n == 6);
}

TEST_CASE("binning is a partition and conserves n") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t d = 1; d <= 3; ++d) {
        const std::size_t n = 400;
        std::vector<double> x(n * d), y(n, 0.0);
        for (auto& v : x) {
            v = u(rng);
        }
        // Exact boundaries, including both ends and interior cell edges.
        x[0] = 0.0;
        x[d] = 1.0;
        x[2 * d] = 0.5;
        const Dataset data(d, x, y);
        const GridSpec g(d, 4);
        const auto s = bin(data, g);
        std::size_t total = 0;
        for (auto c : s.counts) {
            total += c;
        }
        CHECK(total == n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = block_index(data.point(i), g);
            for (std::size_t k = 0; k < d; ++k) {
                const double lo = (static_cast<double>(idx.coords[k]) - 1.0) / 4.0;
                const double hi = static_cast<double>(idx.coords[k]) / 4.0;
                const double v = data.point(i)[k];
                CHECK(v <= hi);
                CHECK((v > lo || (v == 0.0 && idx.coords[k] == 1)));
            }
        }
    }
}

TEST_CASE("cell counts stay near n / J^d on uniform designs") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 20000;
    std::vector<double> x(2 * n), y(n, 0.0);
    for (auto& v : x) {
        v = u(rng);
    }
    const auto s = bin(Dataset(2, x, y), GridSpec(2, 5));
    const double expected = static_cast<double>(n) / 25.0;
    const auto [lo, hi] = std::minmax_element(s.counts.begin(), s.counts.end());
    CHECK(static_cast<double>(*hi) / expected < 1.25);
    CHECK(static_cast<double>(*lo) / expected > 0.75);
}

TEST_CASE("is_monotone examples") {
    CHECK(is_monotone(StepFunction(GridSpec(1, 3), std::vector<double>{1, 2, 3})));
    CHECK_FALSE(is_monotone(StepFunction(GridSpec(2, 2), std::vector<double>{0, 1, 1, 0})));
    CHECK(is_monotone(StepFunction(GridSpec(3, 3), 4.2)));
}

TEST_CASE("neighbour check agrees with the all-pairs definition") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> small(0, 2);
    for (int rep = 0; rep < 400; ++rep) {
        const std::size_t d = 1 + rep % 3;
        const std::size_t J = 2 + (rep / 3) % 3;
        const GridSpec g(d, J);
        std::vector<double> theta(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            // Mostly sorted sums of coordinates with occasional perturbations.
            const auto idx = from_offset(j, g);
            double s = 0.0;
            for (auto c : idx.coords) {
                s += static_cast<double>(c);
            }
            theta[j] = s + (rng() % 5 == 0 ? -small(rng) : 0);
        }
        const StepFunction f(g, theta);
        CHECK(is_monotone(f) == monotone_all_pairs(f));
    }
}

TEST_CASE("validation errors") {
    CHECK_THROWS_AS(Dataset(2, {0.1, 0.2, 0.3}, {1.0, 2.0}), DomainError);
    CHECK_THROWS_AS(Dataset(1, {1.5}, {1.0}), DomainError);
    CHECK_THROWS_AS(Dataset(1, {0.5}, {NAN}), DomainError);
    CHECK_THROWS_AS(StepFunction(GridSpec(1, 2), std::vector<double>{1.0}), ConfigError);
    CHECK_THROWS_AS(WeightVector(std::vector<double>{0.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(WeightVector(std::vector<double>{-1.0, 2.0}), ConfigError);
}

}
