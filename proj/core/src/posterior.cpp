#include "monoreg/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "monoreg/error.hpp"
#include "monoreg/parallel.hpp"
#include "monoreg/random.hpp"

namespace monoreg {

void PriorConfig::validate(std::size_t blocks) const {
    auto conforms = [blocks](const std::vector<double>& v) { return v.size() == 1 || v.size() == blocks; };
    if (!conforms(zeta)) {
        throw ConfigError("prior zeta has " + std::to_string(zeta.size()) + " entries; expected 1 or " +
                          std::to_string(blocks));
    }
    if (!conforms(lambda_sq)) {
        throw ConfigError("prior lambda_sq has " + std::to_string(lambda_sq.size()) + " entries; expected 1 or " +
                          std::to_string(blocks));
    }
    for (double z : zeta) {
        if (!std::isfinite(z)) {
            throw ConfigError("prior zeta must be finite");
        }
    }
    for (double l : lambda_sq) {
        if (!std::isfinite(l) || l <= 0.0) {
            throw ConfigError("prior lambda_sq must be finite and positive");
        }
    }
    if (!(beta1 > 0.0) || !(beta2 > 0.0) || !std::isfinite(beta1) || !std::isfinite(beta2)) {
        throw ConfigError("inverse-gamma hyperparameters beta1, beta2 must be positive");
    }
    if (!(b_J > 0.0) || !std::isfinite(b_J)) {
        throw ConfigError("J-prior rate b_J must be positive");
    }
}

double InverseGammaParams::mean() const {
    return shape > 1.0 ? scale / (shape - 1.0) : std::numeric_limits<double>::infinity();
}

SigmaMode SigmaMode::known(double sigma0) {
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) {
        throw DomainError("known sigma must be positive");
    }
    return {Kind::Known, sigma0};
}

PosteriorParams posterior_params(const BlockStats& stats, const PriorConfig& prior) {
    const std::size_t blocks = stats.grid.size();
    prior.validate(blocks);
    PosteriorParams out;
    out.grid = stats.grid;
    out.mean.resize(blocks);
    out.var_scale.resize(blocks);
    for (std::size_t j = 0; j < blocks; ++j) {
        const double lam = prior.lambda_sq_at(j);
        const double prec = 1.0 / lam;
        const double N = static_cast<double>(stats.counts[j]);
        if (stats.counts[j] == 0) {
            out.mean[j] = prior.zeta_at(j);
            out.var_scale[j] = lam;
            continue;
        }
        out.mean[j] = (N * stats.means[j] + prior.zeta_at(j) * prec) / (N + prec);
        out.var_scale[j] = 1.0 / (N + prec);
    }
    return out;
}

SigmaEstimate sigma_mmle(const BlockStats& stats, const PriorConfig& prior) {
    const std::size_t blocks = stats.grid.size();
    prior.validate(blocks);
    if (stats.n == 0) {
        throw DomainError("sigma estimate requires n >= 1");
    }
    // sum_i (Y_i - zeta)^2 - sum_j N_j^2 (Ybar_j - zeta_j)^2 / (N_j + lambda_j^-2), regrouped per block as
    // within_ss_j + N_j (Ybar_j - zeta_j)^2 lambda_j^-2 / (N_j + lambda_j^-2).
    double total = 0.0;
    for (std::size_t j = 0; j < blocks; ++j) {
        if (stats.counts[j] == 0) {
            continue;
        }
        const double N = static_cast<double>(stats.counts[j]);
        const double prec = 1.0 / prior.lambda_sq_at(j);
        const double dev = stats.means[j] - prior.zeta_at(j);
        total += stats.within_ss[j] + N * dev * dev * prec / (N + prec);
    }
    SigmaEstimate est;
    est.sigma_sq = total / static_cast<double>(stats.n);
    if (!(est.sigma_sq > kSigmaSqFloor)) {
        est.sigma_sq = kSigmaSqFloor;
        est.clamped = true;
    }
    return est;
}

InverseGammaParams sigma_posterior(const BlockStats& stats, const PriorConfig& prior) {
    const auto est = sigma_mmle(stats, prior);
    const double n = static_cast<double>(stats.n);
    return {prior.beta1 + n / 2.0, prior.beta2 + n * est.sigma_sq / 2.0};
}

SigmaMode resolve_sigma(const SigmaMode& mode, const BlockStats& stats, const PriorConfig& prior) {
    switch (mode.kind) {
    case SigmaMode::Kind::Known:
        return SigmaMode::known(mode.sigma);
    case SigmaMode::Kind::PlugInMMLE:
        return {SigmaMode::Kind::PlugInMMLE, std::sqrt(sigma_mmle(stats, prior).sigma_sq)};
    case SigmaMode::Kind::InverseGamma:
        return mode;
    }
    return mode;
}

PosteriorDraw sample_one(const PosteriorParams& params, const SigmaMode& mode,
                         const std::optional<InverseGammaParams>& sigma_post, std::uint64_t seed,
                         std::size_t index) {
    Rng rng(derive_seed(seed, {index}));
    double sigma_sq = 0.0;
    if (mode.kind == SigmaMode::Kind::InverseGamma) {
        if (!sigma_post) {
            throw ConfigError("inverse-gamma sigma mode requires sigma posterior parameters");
        }
        // 1 / Gamma(shape, rate = scale) ~ IG(shape, scale).
        std::gamma_distribution<double> gamma(sigma_post->shape, 1.0 / sigma_post->scale);
        sigma_sq = 1.0 / gamma(rng);
    } else {
        if (sigma_post) {
            throw ConfigError("sigma posterior parameters given for a fixed-sigma mode");
        }
        if (!(mode.sigma > 0.0)) {
            throw ConfigError("fixed sigma is unresolved; call resolve_sigma first");
        }
        sigma_sq = mode.sigma * mode.sigma;
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> theta(params.mean.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
        theta[j] = params.mean[j] + std::sqrt(sigma_sq * params.var_scale[j]) * normal(rng);
    }
    return {StepFunction(params.grid, std::move(theta)), std::sqrt(sigma_sq)};
}

std::vector<PosteriorDraw> sample_unrestricted(const PosteriorParams& params, const SigmaMode& mode,
                                               const std::optional<InverseGammaParams>& sigma_post,
                                               std::uint64_t seed, std::size_t m, unsigned threads) {
    if (m == 0) {
        throw ConfigError("number of posterior draws must be >= 1");
    }
    if (mode.kind == SigmaMode::Kind::InverseGamma && !sigma_post) {
        throw ConfigError("inverse-gamma sigma mode requires sigma posterior parameters");
    }
    std::vector<PosteriorDraw> draws(m);
    parallel_for(m, threads, [&](std::size_t i) { draws[i] = sample_one(params, mode, sigma_post, seed, i); });
    return draws;
}

double log_marginal_likelihood(const BlockStats& stats, const PriorConfig& prior, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError("log marginal likelihood requires sigma > 0");
    }
    const std::size_t blocks = stats.grid.size();
    prior.validate(blocks);
    const double s2 = sigma * sigma;
    const double log_2pi_s2 = std::log(2.0 * std::numbers::pi * s2);
    double total = 0.0;
    for (std::size_t j = 0; j < blocks; ++j) {
        if (stats.counts[j] == 0) {
            continue;
        }
        const double N = static_cast<double>(stats.counts[j]);
        const double lam = prior.lambda_sq_at(j);
        const double dev = stats.means[j] - prior.zeta_at(j);
        // sum (Y - zeta)^2 - N^2 lam dev^2 / (1 + N lam) = within + N dev^2 / (1 + N lam)
        const double quad = stats.within_ss[j] + N * dev * dev / (1.0 + N * lam);
        total += -0.5 * N * log_2pi_s2 - 0.5 * std::log1p(N * lam) - quad / (2.0 * s2);
    }
    return total;
}

double log_marginal_likelihood_J(const Dataset& data, const GridSpec& grid, const PriorConfig& prior,
                                 double sigma) {
    return log_marginal_likelihood(bin(data, grid), prior, sigma);
}

std::vector<double> posterior_over_J(const Dataset& data, const PriorConfig& prior, double sigma,
                                     std::size_t J_max) {
    if (J_max == 0) {
        throw ConfigError("J_max must be >= 1");
    }
    const double d = static_cast<double>(data.dim());
    std::vector<double> logp(J_max);
    for (std::size_t J = 1; J <= J_max; ++J) {
        const double Jd = static_cast<double>(J);
        const double log_prior = -prior.b_J * std::pow(Jd, d) * std::log(Jd);
        logp[J - 1] = log_prior + log_marginal_likelihood_J(data, GridSpec(data.dim(), J), prior, sigma);
    }
    const double top = *std::max_element(logp.begin(), logp.end());
    double norm = 0.0;
    for (double& v : logp) {
        v = std::exp(v - top);
        norm += v;
    }
    for (double& v : logp) {
        v /= norm;
    }
    return logp;
}

std::size_t default_J_max(std::size_t n, std::size_t d) {
    const double root = std::pow(static_cast<double>(n), 1.0 / (1.0 + static_cast<double>(d)));
    return static_cast<std::size_t>(std::ceil(root - 1e-12)) + 5;
}

}  // namespace monoreg
