#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "monoreg/error.hpp"
#include "monoreg/projection.hpp"

namespace monoreg {

namespace {

struct CoverEdge {
    std::size_t lo;
    std::size_t hi;
};

std::vector<CoverEdge> cover_edges(const detail::Lattice& lattice) {
    std::vector<CoverEdge> edges;
    for (std::size_t j = 0; j < lattice.size(); ++j) {
        for (std::size_t k = 0; k < lattice.dims.size(); ++k) {
            const std::size_t s = lattice.stride(k);
            if ((j / s) % lattice.dims[k] + 1 < lattice.dims[k]) {
                edges.push_back({j, j + s});
            }
        }
    }
    return edges;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t v) {
    while (parent[v] != v) {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    return v;
}

/// Lexicographically best constant for a component: argmin of sum w |c - t|^p, ties broken by the
/// plain sum of squares. L1 scans every breakpoint instead of using a median formula.
double component_value(const std::vector<double>& t, const std::vector<double>& w, Norm p) {
    double W = 0.0;
    double S = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        W += w[i];
        S += t[i];
    }
    const double mean = S / static_cast<double>(t.size());
    if (W <= 0.0) {
        return mean;
    }
    if (p == Norm::L2) {
        double Sw = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            Sw += w[i] * t[i];
        }
        return Sw / W;
    }
    auto cost = [&](double c) {
        double total = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            total += w[i] * std::abs(c - t[i]);
        }
        return total;
    };
    double best = std::numeric_limits<double>::infinity();
    for (double c : t) {
        best = std::min(best, cost(c));
    }
    const double tol = 1e-12 * (1.0 + best);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double c : t) {
        if (cost(c) <= best + tol) {
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
    }
    return std::clamp(mean, lo, hi);
}

// The lexicographic optimum x* is the candidate generated by its own maximal set of tight covering
// constraints: the components of that set are separated by strict inequalities, so each one sits
// at its own best constant. Enumerating every subset therefore reaches x*, and every feasible
// candidate is a point of the cone, so the best feasible candidate is x*.
std::vector<double> brute_enumerate(const detail::Lattice& lattice, const std::vector<double>& theta,
                                    const std::vector<double>& w, Norm p) {
    const auto edges = cover_edges(lattice);
    const std::size_t n = theta.size();
    const double range = *std::max_element(theta.begin(), theta.end()) - *std::min_element(theta.begin(), theta.end());
    const double feas_tol = 1e-12 * (1.0 + range);

    double best_primary = std::numeric_limits<double>::infinity();
    double best_secondary = std::numeric_limits<double>::infinity();
    std::vector<double> best;
    std::vector<std::size_t> parent(n);
    std::vector<double> x(n);
    std::vector<std::vector<std::size_t>> members(n);
    std::vector<double> ct;
    std::vector<double> cw;

    const std::size_t subsets = std::size_t{1} << edges.size();
    for (std::size_t mask = 0; mask < subsets; ++mask) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (mask >> e & 1U) {
                const auto a = find_root(parent, edges[e].lo);
                const auto b = find_root(parent, edges[e].hi);
                if (a != b) {
                    parent[a] = b;
                }
            }
        }
        for (auto& m : members) {
            m.clear();
        }
        for (std::size_t i = 0; i < n; ++i) {
            members[find_root(parent, i)].push_back(i);
        }
        for (const auto& m : members) {
            if (m.empty()) {
                continue;
            }
            ct.clear();
            cw.clear();
            for (auto i : m) {
                ct.push_back(theta[i]);
                cw.push_back(w[i]);
            }
            const double c = component_value(ct, cw, p);
            for (auto i : m) {
                x[i] = c;
            }
        }
        bool feasible = true;
        for (const auto& e : edges) {
            if (x[e.lo] > x[e.hi] + feas_tol) {
                feasible = false;
                break;
            }
        }
        if (!feasible) {
            continue;
        }
        double primary = 0.0;
        double secondary = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = std::abs(x[i] - theta[i]);
            primary += w[i] * (p == Norm::L1 ? d : d * d);
            secondary += 0.5 * d * d;
        }
        const double ptol = 1e-12 * (1.0 + std::abs(best_primary));
        if (best.empty() || primary < best_primary - ptol ||
            (primary <= best_primary + ptol && secondary < best_secondary - 1e-12 * (1.0 + best_secondary))) {
            best_primary = primary;
            best_secondary = secondary;
            best = x;
        }
    }
    return best;
}

}  // namespace

std::vector<double> detail::brute_force_isotonic(const Lattice& lattice, std::span<const double> theta,
                                                 std::span<const double> weights, Norm p) {
    if (lattice.dims.empty() || theta.size() != lattice.size() || weights.size() != lattice.size()) {
        throw ConfigError("projection input does not match the lattice size");
    }
    if (lattice.size() > kBruteForceMaxBlocks) {
        throw GuardError("brute-force projection limited to " + std::to_string(kBruteForceMaxBlocks) +
                         " blocks, got " + std::to_string(lattice.size()));
    }
    const std::vector<double> t(theta.begin(), theta.end());
    const std::vector<double> w(weights.begin(), weights.end());
    return brute_enumerate(lattice, t, w, p);
}

StepFunction brute_force_project(const StepFunction& f, const WeightVector& w, Norm p) {
    if (f.theta.size() != f.grid.size() || w.w.size() != f.grid.size()) {
        throw ConfigError("step function and weight vector do not conform to the grid");
    }
    return StepFunction(f.grid, detail::brute_force_isotonic(detail::Lattice::of(f.grid), f.theta, w.w, p));
}

}  // namespace monoreg
