#pragma once

#include <span>
#include <vector>

#include "monoreg/grid.hpp"

namespace monoreg {

/// Absolute tolerance used for cone-feasibility checks on projection output.
inline constexpr double kConeTolerance = 1e-9;

enum class Norm { L1 = 1, L2 = 2 };

/** Weighted L2 projection onto the monotone cone of the grid order:
 *
 *     argmin_{theta* in C} sum_j w_j (theta_j - theta*_j)^2.
 *
 * Zero-weight blocks do not enter the objective; among all optimal solutions the one closest to
 * theta in unweighted L2 is returned, which makes the result unique. d = 1 uses weighted
 * pool-adjacent-violators; higher dimensions use recursive partitioning by minimum cuts.
 */
StepFunction project_l2(const StepFunction& f, const WeightVector& w);

/** Weighted L1 projection onto the monotone cone:
 *
 *     argmin_{theta* in C} sum_j w_j |theta_j - theta*_j|.
 *
 * The L1 minimiser set is convex and usually not a single point. The returned minimiser is the
 * one closest to theta in unweighted L2 (unique by strict convexity), so the result is
 * deterministic, lies within [min theta, max theta], and fills zero-weight blocks.
 */
StepFunction project_l1(const StepFunction& f, const WeightVector& w);

StepFunction project(const StepFunction& f, const WeightVector& w, Norm p);

/// (sum_j w_j |theta_j - theta*_j|^p)^(1/p) with theta* the Lp projection.
double distance_to_cone(const StepFunction& f, const WeightVector& w, Norm p);

/// Weighted Lp objective sum_j w_j |a_j - b_j|^p (no root).
double projection_cost(std::span<const double> a, std::span<const double> b, const WeightVector& w, Norm p);

/// Weighted pool-adjacent-violators for a chain, with the same zero-weight tie-break rule.
std::vector<double> weighted_pava(std::span<const double> values, std::span<const double> weights);

namespace detail {

/// Rectangular box lattice with per-axis sizes, flat row-major (axis 0 slowest). A GridSpec is the
/// special case of d equal sizes J; other shapes only arise in cross-checks.
struct Lattice {
    std::vector<std::size_t> dims;

    static Lattice of(const GridSpec& grid) { return {std::vector<std::size_t>(grid.dim(), grid.resolution())}; }
    std::size_t size() const;
    std::size_t stride(std::size_t axis) const;
};

/// Recursive-partitioning solver on the lattice order, usable for any shape (including chains,
/// where project_l2 would otherwise take the PAVA path). Exposed for cross-checks.
std::vector<double> partition_isotonic(const Lattice& lattice, std::span<const double> theta,
                                       std::span<const double> weights, Norm p);
std::vector<double> partition_isotonic(const GridSpec& grid, std::span<const double> theta,
                                       std::span<const double> weights, Norm p);

/// Exhaustive-search counterpart of partition_isotonic; see brute_force_project.
std::vector<double> brute_force_isotonic(const Lattice& lattice, std::span<const double> theta,
                                         std::span<const double> weights, Norm p);

}  // namespace detail

/** Exact projection by exhaustive search, for at most kBruteForceMaxBlocks blocks.
 *
 * Enumerates every subset of covering constraints held with equality, sets each resulting
 * component to its best constant, and keeps the best feasible candidate under the same
 * lexicographic objective as project_l1 / project_l2. Throws GuardError above the size limit.
 */
StepFunction brute_force_project(const StepFunction& f, const WeightVector& w, Norm p);

inline constexpr std::size_t kBruteForceMaxBlocks = 12;

}  // namespace monoreg
