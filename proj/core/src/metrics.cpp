#include "monoreg/metrics.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "monoreg/error.hpp"

namespace monoreg {

Measure Measure::empirical(const BlockStats& stats) {
    Measure m;
    m.kind_ = WeightVector::empirical(stats);
    return m;
}

Measure Measure::lebesgue() {
    return Measure{};
}

Measure Measure::explicit_weights(WeightVector w) {
    const double total = std::accumulate(w.w.begin(), w.w.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("explicit measure weights must sum to 1");
    }
    Measure m;
    m.kind_ = std::move(w);
    return m;
}

std::vector<double> Measure::weights(const GridSpec& grid) const {
    if (std::holds_alternative<Lebesgue>(kind_)) {
        return std::vector<double>(grid.size(), 1.0 / static_cast<double>(grid.size()));
    }
    const auto& w = std::get<WeightVector>(kind_).w;
    if (w.size() != grid.size()) {
        throw ConfigError("measure weights do not match the grid");
    }
    return w;
}

double lp_distance(const StepFunction& f, const StepFunction& g, const Measure& mu, double p) {
    if (!(f.grid == g.grid)) {
        throw ConfigError("lp_distance requires step functions on the same grid");
    }
    if (!(p >= 1.0)) {
        throw DomainError("lp_distance requires p >= 1");
    }
    const auto w = mu.weights(f.grid);
    double total = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        total += w[j] * std::pow(std::abs(f.theta[j] - g.theta[j]), p);
    }
    return std::pow(total, 1.0 / p);
}

double lp_distance_to_function(const StepFunction& f, const RegressionFunction& f0, double p,
                               std::size_t quad_per_cell) {
    if (quad_per_cell == 0) {
        throw ConfigError("quad_per_cell must be >= 1");
    }
    if (!(p >= 1.0)) {
        throw DomainError("lp_distance_to_function requires p >= 1");
    }
    const auto& grid = f.grid;
    const std::size_t d = grid.dim();
    const std::size_t J = grid.resolution();
    const std::size_t q = quad_per_cell;
    const double h = 1.0 / static_cast<double>(J * q);

    // Iterate the fine (J*q)^d lattice of node centres directly.
    std::size_t nodes = 1;
    for (std::size_t k = 0; k < d; ++k) {
        nodes *= J * q;
    }
    std::vector<double> x(d);
    std::vector<std::size_t> idx(d, 0);
    double total = 0.0;
    for (std::size_t node = 0; node < nodes; ++node) {
        std::size_t block = 0;
        for (std::size_t k = 0; k < d; ++k) {
            x[k] = (static_cast<double>(idx[k]) + 0.5) * h;
            block += (idx[k] / q) * grid.stride(k);
        }
        total += std::pow(std::abs(f.theta[block] - f0(x)), p);
        for (std::size_t k = d; k-- > 0;) {
            if (++idx[k] < J * q) {
                break;
            }
            idx[k] = 0;
        }
    }
    return std::pow(total / static_cast<double>(nodes), 1.0 / p);
}

double hellinger_distance(const StepFunction& f, const StepFunction& g, double sigma, const Measure& mu) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError("hellinger_distance requires sigma > 0");
    }
    if (!(f.grid == g.grid)) {
        throw ConfigError("hellinger_distance requires step functions on the same grid");
    }
    const auto w = mu.weights(f.grid);
    double affinity = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double gap = f.theta[j] - g.theta[j];
        affinity += w[j] * std::exp(-gap * gap / (8.0 * sigma * sigma));
    }
    return std::sqrt(std::max(0.0, 2.0 * (1.0 - affinity)));
}

StepFunction discretize_midpoint(const RegressionFunction& f0, const GridSpec& grid) {
    std::vector<double> theta(grid.size());
    std::vector<double> x(grid.dim());
    const double J = static_cast<double>(grid.resolution());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto idx = from_offset(j, grid);
        for (std::size_t k = 0; k < grid.dim(); ++k) {
            x[k] = (static_cast<double>(idx.coords[k]) - 0.5) / J;
        }
        theta[j] = f0(x);
    }
    return StepFunction(grid, std::move(theta));
}

}  // namespace monoreg
