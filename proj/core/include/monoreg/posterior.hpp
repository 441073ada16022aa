#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "monoreg/grid.hpp"

namespace monoreg {

/** Hyperparameters of the conjugate block-height prior
 *
 *     theta_j ~ N(zeta_j, sigma^2 lambda_j^2)  independently,
 *     sigma^2 ~ IG(beta1, beta2)                (fully Bayesian sigma only),
 *     pi(J)   ~ exp(-b_J J^d log J)             (adaptive test only).
 *
 * `zeta` and `lambda_sq` hold either a single broadcast value or one value per block. The default
 * lambda^2 = 100 gives block heights a prior sd of 10 sigma; with lambda^2 = 1 the prior pulls
 * sparsely filled blocks a third or more of the way to zeta and inflates the plug-in sigma.
 */
struct PriorConfig {
    std::vector<double> zeta{0.0};
    std::vector<double> lambda_sq{100.0};
    double beta1 = 1.0;
    double beta2 = 1.0;
    double b_J = 1.0;

    /// Throws ConfigError when arrays are neither scalar nor `blocks` long, or values are invalid.
    void validate(std::size_t blocks) const;
    double zeta_at(std::size_t j) const { return zeta.size() == 1 ? zeta[0] : zeta[j]; }
    double lambda_sq_at(std::size_t j) const { return lambda_sq.size() == 1 ? lambda_sq[0] : lambda_sq[j]; }
};

/// Posterior law theta_j | D ~ N(mean[j], sigma^2 * var_scale[j]).
struct PosteriorParams {
    GridSpec grid{1, 1};
    std::vector<double> mean;
    std::vector<double> var_scale;
};

struct InverseGammaParams {
    double shape = 1.0;
    double scale = 1.0;

    /// Mean of the distribution; infinite when shape <= 1.
    double mean() const;
};

/// Marginal MLE of sigma^2 together with a flag recording whether the floor was applied.
struct SigmaEstimate {
    double sigma_sq = 0.0;
    bool clamped = false;
};

/// Floor applied to the marginal MLE of sigma^2.
inline constexpr double kSigmaSqFloor = 1e-12;

/** How sigma is handled when sampling block heights.
 *
 * Known and PlugInMMLE both use a single fixed sigma for every draw; for PlugInMMLE the value is
 * filled in by resolve_sigma() from the data. InverseGamma draws sigma^2 per draw.
 */
struct SigmaMode {
    enum class Kind { Known, PlugInMMLE, InverseGamma };

    Kind kind = Kind::PlugInMMLE;
    double sigma = 0.0;

    static SigmaMode known(double sigma0);
    static SigmaMode plug_in() { return {Kind::PlugInMMLE, 0.0}; }
    static SigmaMode inverse_gamma() { return {Kind::InverseGamma, 0.0}; }
};

struct PosteriorDraw {
    StepFunction f;
    double sigma = 0.0;
};

PosteriorParams posterior_params(const BlockStats& stats, const PriorConfig& prior);

SigmaEstimate sigma_mmle(const BlockStats& stats, const PriorConfig& prior);

/// IG(beta1 + n/2, beta2 + n sigma_hat^2 / 2).
InverseGammaParams sigma_posterior(const BlockStats& stats, const PriorConfig& prior);

/** Draws m unrestricted posterior step functions.
 *
 * Draw i uses its own generator seeded from (seed, i), so output is a pure function of the
 * arguments and does not depend on `threads`.
 */
std::vector<PosteriorDraw> sample_unrestricted(const PosteriorParams& params, const SigmaMode& mode,
                                               const std::optional<InverseGammaParams>& sigma_post,
                                               std::uint64_t seed, std::size_t m, unsigned threads = 1);

/// Single draw i of the stream sample_unrestricted(params, mode, sigma_post, seed, .) produces.
PosteriorDraw sample_one(const PosteriorParams& params, const SigmaMode& mode,
                         const std::optional<InverseGammaParams>& sigma_post, std::uint64_t seed,
                         std::size_t index);

/// Fills in the plug-in sigma for PlugInMMLE; validates Known. InverseGamma is returned as is.
SigmaMode resolve_sigma(const SigmaMode& mode, const BlockStats& stats, const PriorConfig& prior);

/** Log marginal likelihood of Y under the working model at resolution J with sigma known.
 *
 * Each block contributes the Gaussian log-density of its responses with covariance
 * sigma^2 (I + lambda_j^2 11^T) around zeta_j; empty blocks contribute 0.
 */
double log_marginal_likelihood_J(const Dataset& data, const GridSpec& grid, const PriorConfig& prior,
                                 double sigma);
double log_marginal_likelihood(const BlockStats& stats, const PriorConfig& prior, double sigma);

/// Normalised posterior over J = 1..J_max (index J-1) under pi(J) ~ exp(-b_J J^d log J).
/// The support is truncated at J_max.
std::vector<double> posterior_over_J(const Dataset& data, const PriorConfig& prior, double sigma,
                                     std::size_t J_max);

/// ceil(n^(1/(1+d))) + 5.
std::size_t default_J_max(std::size_t n, std::size_t d);

}  // namespace monoreg
