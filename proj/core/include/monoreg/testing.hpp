#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "monoreg/grid.hpp"
#include "monoreg/posterior.hpp"

namespace monoreg {

/// How the number of blocks per axis is chosen from n and d.
struct JRule {
    enum class Kind {
        CeilN14,      ///< ceil(n^(1/4))
        CeilN14Log,   ///< ceil(n^(1/4) log10 n)
        OptimalRate,  ///< ceil(n^(1/(2+d)))
        Fixed,        ///< user-supplied J
    };

    Kind kind = Kind::CeilN14;
    std::size_t fixed = 0;

    static JRule ceil_n14() { return {Kind::CeilN14, 0}; }
    static JRule ceil_n14_log() { return {Kind::CeilN14Log, 0}; }
    static JRule optimal_rate() { return {Kind::OptimalRate, 0}; }
    static JRule fixed_J(std::size_t J);

    std::size_t resolve(std::size_t n, std::size_t d) const;

    /// "ceil-n14", "ceil-n14-log", "optimal-rate" or "fixed:<J>".
    std::string to_string() const;
    static JRule parse(const std::string& text);
};

struct TestConfig {
    double gamma = 0.5;
    double a = 0.237;
    double b = 0.234;
    double M0 = 1.0;
    JRule j_rule = JRule::ceil_n14();
    std::size_t m_draws = 200;
    SigmaMode sigma_mode = SigmaMode::plug_in();
    /// Adaptive test only; 0 selects default_J_max(n, d).
    std::size_t J_max = 0;
    /// Worker threads for the per-draw projections; results do not depend on it.
    unsigned threads = 1;

    void validate() const;
    /// M_n = a (log n)^b.
    double Mn(std::size_t n) const;
};

struct TestResult {
    bool reject = false;
    double posterior_prob = 0.0;
    /// Fixed-J test: the common radius. Adaptive test: radius at the posterior-modal J.
    double threshold = 0.0;
    std::vector<double> distances;
    /// Per-draw radius (adaptive test, which depends on the sampled J).
    std::vector<double> thresholds;
    /// Fixed-J test: J used. Adaptive test: posterior mode of J.
    std::size_t J_used = 0;
    /// Adaptive test: the sampled J of each draw and the posterior over J = 1..J_max.
    std::vector<std::size_t> J_draws;
    std::vector<double> J_posterior;
    std::size_t n = 0;
    std::size_t d = 0;
    std::uint64_t seed = 0;
};

/// Fraction of `distances` at most `threshold`.
double posterior_probability(const std::vector<double>& distances, double threshold);

/** Fixed-J Bayesian monotonicity test.
 *
 * Rejects when the posterior probability that the empirical-L1 distance from f to the monotone
 * cone is at most M_n n^(-1/(d+2)) falls below gamma.
 */
TestResult test_fixed_J(const Dataset& data, const PriorConfig& prior, const TestConfig& cfg, std::uint64_t seed);

/** Adaptive-J Bayesian monotonicity test with known sigma.
 *
 * J is drawn from its posterior; each draw is compared to its Lebesgue-L1 projection in the
 * Lebesgue-Hellinger metric against the radius M0 sqrt(J^d log n / n).
 */
TestResult test_adaptive(const Dataset& data, const PriorConfig& prior, const TestConfig& cfg, std::uint64_t seed);

/// A (sample size, posterior distance draw) pair pooled by the M_n calibration.
struct DistanceSample {
    std::size_t n = 0;
    double distance = 0.0;
};

struct MnFit {
    double a = 0.0;
    double b = 0.0;
    std::size_t used = 0;
    std::size_t dropped_zero = 0;
};

/** Least-squares fit of log(rho n^(1/4)) = log a + b log log n over pooled samples.
 *
 * Zero distances have no logarithm and are dropped (counted in `dropped_zero`). Throws
 * CalibrationError when nothing remains or log log n does not vary.
 */
MnFit fit_Mn(const std::vector<DistanceSample>& samples);

/// Generates a dataset of size n from a seed.
using DataGenerator = std::function<Dataset(std::size_t n, std::uint64_t seed)>;

struct CalibrationConfig {
    std::vector<DataGenerator> suite;
    std::vector<std::size_t> sample_sizes{100, 200, 500};
    std::size_t datasets_per_size = 5;
    unsigned threads = 0;
};

/// Pools the posterior distances of test_fixed_J over the suite and sizes, then calls fit_Mn.
MnFit calibrate_Mn(const CalibrationConfig& calib, const PriorConfig& prior, const TestConfig& cfg,
                   std::uint64_t seed);

}  // namespace monoreg
