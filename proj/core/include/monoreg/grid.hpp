#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace monoreg {

/** Equispaced block partition of [0,1]^d into J^d cells.
 *
 * Cell j = (j_1, ..., j_d), 1 <= j_k <= J, covers prod_k ((j_k - 1)/J, j_k/J], except that the
 * lower boundary x_k = 0 belongs to index 1.
 *
 * Cells are stored flat in row-major order over axes 1..d: axis 1 is the slowest-varying
 * coordinate and axis d the fastest, i.e. offset = sum_k (j_k - 1) * J^(d - k).
 */
class GridSpec {
public:
    /// Throws ConfigError if d or J is zero or J^d overflows std::size_t.
    GridSpec(std::size_t d, std::size_t J);

    std::size_t dim() const noexcept { return d_; }
    std::size_t resolution() const noexcept { return J_; }
    /// Total number of blocks, J^d.
    std::size_t size() const noexcept { return size_; }
    /// Flat-offset distance between neighbours along axis k (0-based).
    std::size_t stride(std::size_t axis) const { return strides_.at(axis); }

    bool operator==(const GridSpec& other) const noexcept { return d_ == other.d_ && J_ == other.J_; }

private:
    std::size_t d_;
    std::size_t J_;
    std::size_t size_;
    std::vector<std::size_t> strides_;
};

/// 1-based block coordinates; componentwise <= defines the grid partial order.
struct MultiIndex {
    std::vector<std::size_t> coords;

    bool operator==(const MultiIndex&) const = default;
};

/// j1 precedes-or-equals j2 in every coordinate.
bool precedes(const MultiIndex& lhs, const MultiIndex& rhs);

std::size_t to_offset(const MultiIndex& index, const GridSpec& grid);
MultiIndex from_offset(std::size_t offset, const GridSpec& grid);

/// Observations (X_i, Y_i), X stored row-major as an n x d matrix.
class Dataset {
public:
    Dataset() = default;
    /// Validates: n >= 1, X.size() == n*d, X in [0,1], everything finite. Throws DomainError.
    Dataset(std::size_t d, std::vector<double> x, std::vector<double> y);

    std::size_t size() const noexcept { return y_.size(); }
    std::size_t dim() const noexcept { return d_; }
    std::span<const double> point(std::size_t i) const { return {x_.data() + i * d_, d_}; }
    std::span<const double> responses() const noexcept { return y_; }
    std::span<const double> predictors() const noexcept { return x_; }

private:
    std::size_t d_ = 0;
    std::vector<double> x_;
    std::vector<double> y_;
};

/** Per-block sufficient statistics of the binned data.
 *
 * `means[j]` is 0 for empty blocks; every posterior formula weights it by counts[j], so the
 * placeholder is never read. `within_ss[j]` is the within-block sum of squared deviations from
 * means[j]; `sum_sq` is sum_i Y_i^2 over all observations.
 */
struct BlockStats {
    GridSpec grid{1, 1};
    std::vector<std::size_t> counts;
    std::vector<double> means;
    std::vector<double> within_ss;
    double sum_sq = 0.0;
    std::size_t n = 0;
};

/// Returns the unique block containing x; coordinate k maps to max(1, ceil(x_k * J)).
MultiIndex block_index(std::span<const double> x, const GridSpec& grid);
/// Flat form of block_index.
std::size_t block_offset(std::span<const double> x, const GridSpec& grid);

BlockStats bin(const Dataset& data, const GridSpec& grid);

/// Block-constant function: one height per grid cell, flat row-major.
struct StepFunction {
    GridSpec grid{1, 1};
    std::vector<double> theta;

    StepFunction() = default;
    /// Throws ConfigError when theta.size() != grid.size() or any value is non-finite.
    StepFunction(GridSpec g, std::vector<double> values);
    /// Constant function.
    StepFunction(GridSpec g, double value);

    double operator[](std::size_t j) const { return theta[j]; }
};

/// Per-block weights G*(I_j): nonnegative, not all zero.
struct WeightVector {
    std::vector<double> w;

    WeightVector() = default;
    /// Throws ConfigError if any weight is negative/non-finite or all are zero.
    explicit WeightVector(std::vector<double> weights);

    static WeightVector uniform(const GridSpec& grid);
    /// N_j / n.
    static WeightVector empirical(const BlockStats& stats);
};

/** Cone membership: theta_j1 <= theta_j2 for every j1 <= j2.
 *
 * Only immediate successors (j vs j + e_k) are compared; the full order follows by
 * transitivity. `tol` is the absolute slack allowed on each comparison.
 */
bool is_monotone(const StepFunction& f, double tol = 0.0);

/// Same check restricted to the positive-weight blocks (all pairs j1 <= j2 with w > 0).
bool is_monotone_on_support(const StepFunction& f, const WeightVector& w, double tol = 0.0);

}  // namespace monoreg
