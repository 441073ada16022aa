#include "monoreg/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "maxflow.hpp"
#include "monoreg/error.hpp"

namespace monoreg {

namespace detail {
namespace {

constexpr double kRelTol = 1e-12;

/** Isotonic regression on the grid order by recursive partitioning.
 *
 * Objective, minimised lexicographically: primary sum_j w_j |x_j - theta_j|^p, secondary
 * (1/2) sum_j (x_j - theta_j)^2. For a group G that is convex in the order, let c be the best
 * constant on G. The blocks that end strictly above c form the minimal upper set U of G minimising
 * sum_{i in U} g_i(c), g_i the right derivative of block i's objective at c. U is found as the
 * minimal source side of a minimum cut. U and G \ U are again order-convex and solve independently;
 * an empty U means G is a single level set at c.
 */
class PartitionSolver {
public:
    PartitionSolver(const Lattice& lattice, std::span<const double> theta, std::span<const double> w, Norm p)
        : theta_(theta), w_(w), p_(p) {
        for (std::size_t axis = 0; axis < lattice.dims.size(); ++axis) {
            dims_.push_back(lattice.dims[axis]);
            strides_.push_back(lattice.stride(axis));
        }
    }

    std::vector<double> run() {
        const std::size_t n = theta_.size();
        out_.assign(n, 0.0);
        label_.assign(n, 0);
        local_.assign(n, 0);
        std::vector<std::vector<std::size_t>> stack;
        stack.emplace_back(n);
        std::iota(stack.back().begin(), stack.back().end(), std::size_t{0});
        std::uint32_t next_label = 0;

        while (!stack.empty()) {
            std::vector<std::size_t> group = std::move(stack.back());
            stack.pop_back();
            ++next_label;
            for (std::size_t k = 0; k < group.size(); ++k) {
                label_[group[k]] = next_label;
                local_[group[k]] = k;
            }
            const double c = block_value(group);
            std::vector<std::size_t> upper;
            std::vector<std::size_t> lower;
            if (group.size() > 1) {
                split(group, c, next_label, upper, lower);
            }
            if (upper.empty() || lower.empty()) {
                for (auto i : group) {
                    out_[i] = c;
                }
                continue;
            }
            stack.push_back(std::move(lower));
            stack.push_back(std::move(upper));
        }
        return std::move(out_);
    }

private:
    /** Best constant on group. For L2 with positive weight this also sets tie_slope_, the
     * derivative in eps of the best constant under weights w + eps (the tie-break objective).
     */
    double block_value(const std::vector<std::size_t>& group) {
        tie_slope_ = 0.0;
        double sum = 0.0;
        for (auto i : group) {
            sum += theta_[i];
        }
        const double plain_mean = sum / static_cast<double>(group.size());

        if (p_ == Norm::L2) {
            double W = 0.0;
            double Sw = 0.0;
            for (auto i : group) {
                W += w_[i];
                Sw += w_[i] * theta_[i];
            }
            if (W <= 0.0) {
                return plain_mean;
            }
            const double c = Sw / W;
            tie_slope_ = (sum - static_cast<double>(group.size()) * c) / W;
            return c;
        }

        // L1: the weighted-median interval is the primary argmin; the tie-break pulls toward the mean.
        scratch_.clear();
        double W = 0.0;
        for (auto i : group) {
            if (w_[i] > 0.0) {
                scratch_.push_back(i);
                W += w_[i];
            }
        }
        if (scratch_.empty()) {
            return plain_mean;
        }
        std::sort(scratch_.begin(), scratch_.end(),
                  [this](std::size_t a, std::size_t b) { return theta_[a] < theta_[b]; });
        const double half = 0.5 * W - kRelTol * W;
        double lo = theta_[scratch_.back()];
        double cum = 0.0;
        for (auto i : scratch_) {
            cum += w_[i];
            if (cum >= half) {
                lo = theta_[i];
                break;
            }
        }
        double hi = theta_[scratch_.front()];
        cum = 0.0;
        for (auto it = scratch_.rbegin(); it != scratch_.rend(); ++it) {
            cum += w_[*it];
            if (cum >= half) {
                hi = theta_[*it];
                break;
            }
        }
        if (hi < lo) {
            std::swap(lo, hi);
        }
        return std::clamp(plain_mean, lo, hi);
    }

    /// Right derivative of block i's objective at c (cost of raising x_i above c).
    LexValue raise_cost(std::size_t i, double c) const {
        const double diff = c - theta_[i];
        if (p_ == Norm::L2) {
            return {w_[i] * diff, diff + w_[i] * tie_slope_};
        }
        return {diff >= 0.0 ? w_[i] : -w_[i], diff};
    }

    /// Negated left derivative of block i's objective at c (cost of lowering x_i below c).
    LexValue lower_cost(std::size_t i, double c) const {
        const double diff = theta_[i] - c;
        if (p_ == Norm::L2) {
            return {w_[i] * diff, diff - w_[i] * tie_slope_};
        }
        return {diff >= 0.0 ? w_[i] : -w_[i], diff};
    }

    /** Splits group into the blocks that end strictly above c and the rest. When none goes above,
     * tries the mirrored cut for blocks ending strictly below c. Leaves both outputs empty when
     * the whole group sits at c.
     */
    void split(const std::vector<std::size_t>& group, double c, std::uint32_t label,
               std::vector<std::size_t>& upper, std::vector<std::size_t>& lower) {
        std::vector<std::size_t> moved;
        if (cut(group, c, label, true, moved)) {
            partition(group, moved, upper, lower);
            return;
        }
        if (cut(group, c, label, false, moved)) {
            partition(group, moved, lower, upper);
        }
    }

    static void partition(const std::vector<std::size_t>& group, const std::vector<std::size_t>& moved,
                          std::vector<std::size_t>& in, std::vector<std::size_t>& out) {
        std::size_t m = 0;
        for (auto i : group) {
            if (m < moved.size() && moved[m] == i) {
                in.push_back(i);
                ++m;
            } else {
                out.push_back(i);
            }
        }
    }

    /** Minimal closed set (upper set if `up`, else lower set) with negative total cost, found as
     * the minimal source side of a minimum cut. Returns false when it is empty or all of group.
     */
    bool cut(const std::vector<std::size_t>& group, double c, std::uint32_t label, bool up,
             std::vector<std::size_t>& moved) {
        moved.clear();
        const std::size_t m = group.size();
        grads_.resize(m);
        double scale_major = 0.0;
        double scale_minor = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t i = group[k];
            grads_[k] = up ? raise_cost(i, c) : lower_cost(i, c);
            // Scale by magnitudes, not differences: c - theta may be pure rounding noise.
            const double mag = std::abs(c) + std::abs(theta_[i]);
            scale_major += w_[i] * (p_ == Norm::L2 ? mag : 1.0);
            scale_minor += mag + w_[i] * std::abs(tie_slope_);
        }
        const LexTolerance tol{kRelTol * scale_major, kRelTol * scale_minor};

        bool any_negative = false;
        for (const auto& g : grads_) {
            any_negative = any_negative || tol.negative(g);
        }
        if (!any_negative) {
            return false;
        }

        const std::size_t source = m;
        const std::size_t sink = m + 1;
        flow_.reset(m + 2, tol);
        for (std::size_t k = 0; k < m; ++k) {
            if (tol.negative(grads_[k])) {
                flow_.add_edge(source, k, -grads_[k]);
            } else if (tol.positive(grads_[k])) {
                flow_.add_edge(k, sink, grads_[k]);
            }
        }
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t i = group[k];
            for (std::size_t axis = 0; axis < dims_.size(); ++axis) {
                const std::size_t s = strides_[axis];
                if ((i / s) % dims_[axis] + 1 < dims_[axis] && label_[i + s] == label) {
                    // Raising i forces its successor up; lowering the successor forces i down.
                    if (up) {
                        flow_.add_infinite_edge(k, local_[i + s]);
                    } else {
                        flow_.add_infinite_edge(local_[i + s], k);
                    }
                }
            }
        }
        flow_.solve(source, sink);
        const auto& side = flow_.source_side();
        for (std::size_t k = 0; k < m; ++k) {
            if (side[k]) {
                moved.push_back(group[k]);
            }
        }
        return !moved.empty() && moved.size() < m;
    }

    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
    std::span<const double> theta_;
    std::span<const double> w_;
    Norm p_;

    std::vector<double> out_;
    std::vector<std::uint32_t> label_;
    std::vector<std::size_t> local_;
    std::vector<std::size_t> scratch_;
    double tie_slope_ = 0.0;
    std::vector<LexValue> grads_;
    LexMaxFlow flow_;
};

}  // namespace

std::size_t Lattice::size() const {
    std::size_t n = 1;
    for (auto d : dims) {
        n *= d;
    }
    return n;
}

std::size_t Lattice::stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t k = axis + 1; k < dims.size(); ++k) {
        s *= dims[k];
    }
    return s;
}

std::vector<double> partition_isotonic(const Lattice& lattice, std::span<const double> theta,
                                       std::span<const double> weights, Norm p) {
    if (lattice.dims.empty() || theta.size() != lattice.size() || weights.size() != lattice.size()) {
        throw ConfigError("projection input does not match the lattice size");
    }
    return PartitionSolver(lattice, theta, weights, p).run();
}

std::vector<double> partition_isotonic(const GridSpec& grid, std::span<const double> theta,
                                       std::span<const double> weights, Norm p) {
    return partition_isotonic(Lattice::of(grid), theta, weights, p);
}

}  // namespace detail

namespace {

void check_conforming(const StepFunction& f, const WeightVector& w) {
    if (f.theta.size() != f.grid.size() || w.w.size() != f.grid.size()) {
        throw ConfigError("step function and weight vector do not conform to the grid");
    }
}

}  // namespace

std::vector<double> weighted_pava(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size()) {
        throw ConfigError("PAVA values and weights differ in length");
    }
    struct Pool {
        double W;
        double Sw;
        double S;
        std::size_t count;
        double value() const { return W > 0.0 ? Sw / W : S / static_cast<double>(count); }
    };
    std::vector<Pool> pools;
    pools.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        pools.push_back({weights[i], weights[i] * values[i], values[i], 1});
        while (pools.size() > 1 && pools[pools.size() - 2].value() > pools.back().value()) {
            Pool top = pools.back();
            pools.pop_back();
            Pool& prev = pools.back();
            prev.W += top.W;
            prev.Sw += top.Sw;
            prev.S += top.S;
            prev.count += top.count;
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& pool : pools) {
        out.insert(out.end(), pool.count, pool.value());
    }
    return out;
}

StepFunction project_l2(const StepFunction& f, const WeightVector& w) {
    check_conforming(f, w);
    if (f.grid.dim() == 1) {
        return StepFunction(f.grid, weighted_pava(f.theta, w.w));
    }
    return StepFunction(f.grid, detail::partition_isotonic(f.grid, f.theta, w.w, Norm::L2));
}

StepFunction project_l1(const StepFunction& f, const WeightVector& w) {
    check_conforming(f, w);
    return StepFunction(f.grid, detail::partition_isotonic(f.grid, f.theta, w.w, Norm::L1));
}

StepFunction project(const StepFunction& f, const WeightVector& w, Norm p) {
    return p == Norm::L1 ? project_l1(f, w) : project_l2(f, w);
}

double projection_cost(std::span<const double> a, std::span<const double> b, const WeightVector& w, Norm p) {
    double total = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = std::abs(a[j] - b[j]);
        total += w.w[j] * (p == Norm::L1 ? diff : diff * diff);
    }
    return total;
}

double distance_to_cone(const StepFunction& f, const WeightVector& w, Norm p) {
    const StepFunction proj = project(f, w, p);
    const double cost = projection_cost(f.theta, proj.theta, w, p);
    return p == Norm::L1 ? cost : std::sqrt(cost);
}

}  // namespace monoreg
