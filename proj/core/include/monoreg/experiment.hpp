#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "monoreg/functions.hpp"
#include "monoreg/posterior.hpp"
#include "monoreg/simbench.hpp"
#include "monoreg/testing.hpp"

namespace monoreg {

enum class ExperimentKind { Estimation, Testing };

/** Simulation sweep over functions x sample sizes x methods.
 *
 * Estimation methods: "BP" (projection-posterior mean) and "LS" (grid isotonic least squares,
 * on the same grid as BP). The recorded value per dataset is the Lebesgue-L1 error against the
 * true function.
 *
 * Testing methods: "BP" (fixed-J test), "BPA" (adaptive test, sigma known = noise_sd), "LR" and
 * "PL". The recorded value is the reject indicator.
 *
 * Dataset r of cell (f, n) is generated from derive_seed(base_seed, {f, n, r}), so every method
 * sees the same datasets.
 */
struct SweepConfig {
    ExperimentKind kind = ExperimentKind::Estimation;
    std::vector<FunctionId> functions{FunctionId::f1};
    std::vector<std::size_t> sample_sizes{100};
    std::vector<std::string> methods{"BP"};
    std::size_t datasets = 20;
    std::uint64_t base_seed = 1;
    double noise_sd = 0.1;
    PriorConfig prior;
    EstimateConfig estimate;
    TestConfig test;
    /// Significance level of the LR and PL baselines.
    double level = 0.05;
    /// Midpoint nodes per block and axis for the L1 error integral.
    std::size_t quad_per_cell = 8;
    /// Datasets evaluated concurrently; results do not depend on it.
    unsigned threads = 0;
    /// When set, each finished cell is stored here and reused by later runs with the same config.
    std::filesystem::path cell_dir;

    /// Defaults for the two experiment kinds (20 vs 200 datasets, BP/LS vs BP/LR/PL).
    static SweepConfig estimation_defaults();
    static SweepConfig testing_defaults();
    void validate() const;
};

/// Config keys: kind, functions, sample_sizes, methods, datasets, base_seed, noise_sd, prior,
/// m_draws, j_rule, sigma_mode, gamma, a, b, M0, level, quad_per_cell. Unknown keys are errors.
SweepConfig sweep_from_json(const nlohmann::json& j);
/// Every field that affects results (threads and cell_dir are excluded).
nlohmann::json to_json(const SweepConfig& cfg);

struct CellResult {
    FunctionId function = FunctionId::f1;
    std::size_t n = 0;
    std::string method;
    /// Per-dataset values; NaN marks a failed dataset.
    std::vector<double> values;
    /// Estimation: mean L1 error. Testing: rejection percentage. Computed over successful datasets.
    double mean = 0.0;
    /// Estimation: sample sd of the errors. Testing: binomial standard error, in percent.
    double sd = 0.0;
    std::size_t failures = 0;
    /// First error message among failed datasets, empty when none failed.
    std::string error;
    /// True when the cell was loaded from cell_dir instead of computed.
    bool resumed = false;
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::Estimation;
    nlohmann::json config;
    std::vector<CellResult> cells;
};

ExperimentReport run_estimation_experiment(const SweepConfig& cfg);
ExperimentReport run_testing_experiment(const SweepConfig& cfg);
ExperimentReport run_experiment(const SweepConfig& cfg);

/// One row per function, columns n<size>_<method> holding "mean (sd)" or the rejection percentage.
void write_table_csv(std::ostream& out, const ExperimentReport& report);
/// kind,function,n,method,mean,sd,datasets,failures,error
void write_long_csv(std::ostream& out, const ExperimentReport& report);
/// Error-vs-n (estimation) or rejection-vs-n (testing) curves, one polyline per function/method.
void write_svg_plot(std::ostream& out, const ExperimentReport& report);
nlohmann::json to_json(const ExperimentReport& report);

std::string to_string(ExperimentKind kind);

}  // namespace monoreg
