#pragma once

#include <functional>
#include <span>
#include <variant>

#include "monoreg/grid.hpp"

namespace monoreg {

/// Weighting of grid blocks: empirical (N_j / n), Lebesgue (J^-d) or explicit weights summing to 1.
class Measure {
public:
    static Measure empirical(const BlockStats& stats);
    static Measure lebesgue();
    /// Throws ConfigError unless weights are nonnegative and sum to 1 within 1e-9.
    static Measure explicit_weights(WeightVector w);

    /// Block weights on `grid`; throws ConfigError when an empirical/explicit measure has another shape.
    std::vector<double> weights(const GridSpec& grid) const;

private:
    struct Lebesgue {};
    std::variant<Lebesgue, WeightVector> kind_;
};

/// Real-valued reference function on [0,1]^d.
using RegressionFunction = std::function<double(std::span<const double>)>;

/// (sum_j mu_j |f_j - g_j|^p)^(1/p); f and g must share a grid.
double lp_distance(const StepFunction& f, const StepFunction& g, const Measure& mu, double p);

/** Lebesgue Lp distance between a step function and a reference function.
 *
 * Midpoint rule with quad_per_cell^d nodes per block. For monotone f0 the error is
 * O(1 / quad_per_cell).
 */
double lp_distance_to_function(const StepFunction& f, const RegressionFunction& f0, double p = 1.0,
                               std::size_t quad_per_cell = 8);

/** Hellinger distance between the Gaussian regression models N(f(x), sigma^2) and N(g(x), sigma^2):
 *
 *     rho = sqrt(2 (1 - sum_j mu_j exp(-(f_j - g_j)^2 / (8 sigma^2)))).
 */
double hellinger_distance(const StepFunction& f, const StepFunction& g, double sigma, const Measure& mu);

/// Step function whose height on each block is f0 at the block centre.
StepFunction discretize_midpoint(const RegressionFunction& f0, const GridSpec& grid);

}  // namespace monoreg
