#pragma once

#include <cstdint>
#include <vector>

#include "monoreg/functions.hpp"
#include "monoreg/grid.hpp"
#include "monoreg/posterior.hpp"
#include "monoreg/testing.hpp"

namespace monoreg {

struct GeneratorSpec {
    FunctionId id = FunctionId::f1;
    std::size_t n = 100;
    double noise_sd = 0.1;
    std::uint64_t seed = 0;
};

/// X ~ Uniform([0,1]^2), Y = f_id(X) + N(0, noise_sd^2); a pure function of the spec.
Dataset generate(const GeneratorSpec& spec);

struct EstimateConfig {
    JRule j_rule = JRule::ceil_n14_log();
    std::size_t m_draws = 1000;
    SigmaMode sigma_mode = SigmaMode::plug_in();
    unsigned threads = 1;
};

struct BpFit {
    StepFunction estimate;
    /// sigma^2 used for sampling (plug-in / known), or the posterior mean under InverseGamma.
    double sigma_sq = 0.0;
    bool sigma_clamped = false;
    /// Empirical-L1 distance of every draw to its projection.
    std::vector<double> distances;
};

/** Projection-posterior mean: unrestricted draws, each L1-projected onto the monotone cone under
 * the empirical weights N_j / n, averaged blockwise.
 */
BpFit bp_estimate(const Dataset& data, const PriorConfig& prior, const EstimateConfig& cfg, std::uint64_t seed);

/// Grid-restricted isotonic least squares: L2 projection of the block means with weights N_j / n.
StepFunction ls_baseline(const Dataset& data, const GridSpec& grid);

/** Linear-model baseline: OLS of Y on (1, X1, X2); rejects when either slope has
 * t < -t_{n-3, 1-level/2}. Throws DomainError when the design is singular.
 */
bool lr_test(const Dataset& data, double level = 0.05);

/** Piecewise-linear baseline on the 3 x 3 partition: per-cell OLS, rejecting when any of the 18
 * slope t-values is below -t_{N_j-3, 1-level/18}. Cells with fewer than 4 points (or a
 * singular design) are skipped.
 */
bool pl_test(const Dataset& data, double level = 0.05);

}  // namespace monoreg
