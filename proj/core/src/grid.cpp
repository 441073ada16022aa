#include "monoreg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "monoreg/error.hpp"

namespace monoreg {

GridSpec::GridSpec(std::size_t d, std::size_t J) : d_(d), J_(J), size_(1) {
    if (d == 0 || J == 0) {
        throw ConfigError("grid requires d >= 1 and J >= 1");
    }
    for (std::size_t k = 0; k < d; ++k) {
        if (size_ > std::numeric_limits<std::size_t>::max() / J) {
            throw ConfigError("grid size J^d overflows the index type (d=" + std::to_string(d) +
                              ", J=" + std::to_string(J) + ")");
        }
        size_ *= J;
    }
    strides_.resize(d);
    std::size_t s = 1;
    for (std::size_t k = d; k-- > 0;) {
        strides_[k] = s;
        s *= J;
    }
}

bool precedes(const MultiIndex& lhs, const MultiIndex& rhs) {
    if (lhs.coords.size() != rhs.coords.size()) {
        return false;
    }
    for (std::size_t k = 0; k < lhs.coords.size(); ++k) {
        if (lhs.coords[k] > rhs.coords[k]) {
            return false;
        }
    }
    return true;
}

std::size_t to_offset(const MultiIndex& index, const GridSpec& grid) {
    if (index.coords.size() != grid.dim()) {
        throw ConfigError("multi-index dimension does not match grid");
    }
    std::size_t off = 0;
    for (std::size_t k = 0; k < grid.dim(); ++k) {
        const auto c = index.coords[k];
        if (c < 1 || c > grid.resolution()) {
            throw DomainError("multi-index coordinate out of range [1, J]");
        }
        off += (c - 1) * grid.stride(k);
    }
    return off;
}

MultiIndex from_offset(std::size_t offset, const GridSpec& grid) {
    if (offset >= grid.size()) {
        throw DomainError("flat offset outside grid");
    }
    MultiIndex out;
    out.coords.resize(grid.dim());
    for (std::size_t k = 0; k < grid.dim(); ++k) {
        out.coords[k] = offset / grid.stride(k) + 1;
        offset %= grid.stride(k);
    }
    return out;
}

Dataset::Dataset(std::size_t d, std::vector<double> x, std::vector<double> y)
    : d_(d), x_(std::move(x)), y_(std::move(y)) {
    if (d_ == 0) {
        throw DomainError("dataset dimension must be >= 1");
    }
    if (y_.empty()) {
        throw DomainError("dataset must contain at least one observation");
    }
    if (x_.size() != y_.size() * d_) {
        throw DomainError("predictor matrix has " + std::to_string(x_.size()) + " entries, expected " +
                          std::to_string(y_.size() * d_));
    }
    for (std::size_t i = 0; i < x_.size(); ++i) {
        const double v = x_[i];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw DomainError("predictor value outside [0,1] at observation " + std::to_string(i / d_ + 1));
        }
    }
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (!std::isfinite(y_[i])) {
            throw DomainError("non-finite response at observation " + std::to_string(i + 1));
        }
    }
}

namespace {

std::size_t axis_cell(double v, std::size_t J) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError("point coordinate outside [0,1]");
    }
    const double scaled = std::ceil(v * static_cast<double>(J));
    const auto c = static_cast<std::size_t>(scaled);
    return std::clamp<std::size_t>(c, 1, J);
}

}  // namespace

MultiIndex block_index(std::span<const double> x, const GridSpec& grid) {
    if (x.size() != grid.dim()) {
        throw DomainError("point dimension does not match grid");
    }
    MultiIndex out;
    out.coords.reserve(grid.dim());
    for (double v : x) {
        out.coords.push_back(axis_cell(v, grid.resolution()));
    }
    return out;
}

std::size_t block_offset(std::span<const double> x, const GridSpec& grid) {
    if (x.size() != grid.dim()) {
        throw DomainError("point dimension does not match grid");
    }
    std::size_t off = 0;
    for (std::size_t k = 0; k < grid.dim(); ++k) {
        off += (axis_cell(x[k], grid.resolution()) - 1) * grid.stride(k);
    }
    return off;
}

BlockStats bin(const Dataset& data, const GridSpec& grid) {
    if (data.dim() != grid.dim()) {
        throw ConfigError("dataset dimension does not match grid");
    }
    BlockStats s;
    s.grid = grid;
    s.n = data.size();
    s.counts.assign(grid.size(), 0);
    s.means.assign(grid.size(), 0.0);
    s.within_ss.assign(grid.size(), 0.0);
    const auto y = data.responses();
    // Welford per block keeps within_ss accurate when |mean| >> spread.
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t j = block_offset(data.point(i), grid);
        const double v = y[i];
        const auto c = ++s.counts[j];
        const double delta = v - s.means[j];
        s.means[j] += delta / static_cast<double>(c);
        s.within_ss[j] += delta * (v - s.means[j]);
        s.sum_sq += v * v;
    }
    return s;
}

StepFunction::StepFunction(GridSpec g, std::vector<double> values) : grid(g), theta(std::move(values)) {
    if (theta.size() != grid.size()) {
        throw ConfigError("step function has " + std::to_string(theta.size()) + " heights, grid needs " +
                          std::to_string(grid.size()));
    }
    for (double v : theta) {
        if (!std::isfinite(v)) {
            throw ConfigError("step function heights must be finite");
        }
    }
}

StepFunction::StepFunction(GridSpec g, double value) : grid(g), theta(g.size(), value) {}

WeightVector::WeightVector(std::vector<double> weights) : w(std::move(weights)) {
    bool any_positive = false;
    for (double v : w) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError("weights must be finite and nonnegative");
        }
        any_positive = any_positive || v > 0.0;
    }
    if (!any_positive) {
        throw ConfigError("weights must not all be zero");
    }
}

WeightVector WeightVector::uniform(const GridSpec& grid) {
    return WeightVector(std::vector<double>(grid.size(), 1.0 / static_cast<double>(grid.size())));
}

WeightVector WeightVector::empirical(const BlockStats& stats) {
    std::vector<double> w(stats.counts.size());
    const double n = static_cast<double>(stats.n);
    for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] = static_cast<double>(stats.counts[j]) / n;
    }
    return WeightVector(std::move(w));
}

bool is_monotone(const StepFunction& f, double tol) {
    const auto& g = f.grid;
    const std::size_t J = g.resolution();
    for (std::size_t j = 0; j < g.size(); ++j) {
        for (std::size_t k = 0; k < g.dim(); ++k) {
            const std::size_t s = g.stride(k);
            if ((j / s) % J + 1 < J && f.theta[j] > f.theta[j + s] + tol) {
                return false;
            }
        }
    }
    return true;
}

bool is_monotone_on_support(const StepFunction& f, const WeightVector& w, double tol) {
    const auto& g = f.grid;
    if (w.w.size() != g.size()) {
        throw ConfigError("weight vector does not match grid");
    }
    const std::size_t J = g.resolution();
    constexpr double lowest = -std::numeric_limits<double>::infinity();
    // best[j]: largest supported height among blocks preceding-or-equal j.
    std::vector<double> best(g.size(), lowest);
    for (std::size_t j = 0; j < g.size(); ++j) {
        double pred = lowest;
        for (std::size_t k = 0; k < g.dim(); ++k) {
            const std::size_t s = g.stride(k);
            if ((j / s) % J > 0) {
                pred = std::max(pred, best[j - s]);
            }
        }
        if (w.w[j] > 0.0) {
            if (pred > f.theta[j] + tol) {
                return false;
            }
            best[j] = std::max(pred, f.theta[j]);
        } else {
            best[j] = pred;
        }
    }
    return true;
}

}  // namespace monoreg
