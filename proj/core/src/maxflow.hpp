#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace monoreg::detail {

/** Pair ordered lexicographically: `major` decides, `minor` breaks ties.
 *
 * Used as the capacity type of the cut problems behind the isotonic solvers: the major part is
 * the primary (weighted) objective, the minor part the unweighted L2 tie-break. Comparisons treat
 * a major part within `tol_major` of zero as zero.
 */
struct LexValue {
    double major = 0.0;
    double minor = 0.0;

    LexValue& operator+=(const LexValue& o) {
        major += o.major;
        minor += o.minor;
        return *this;
    }
    LexValue& operator-=(const LexValue& o) {
        major -= o.major;
        minor -= o.minor;
        return *this;
    }
    friend LexValue operator-(LexValue v) { return {-v.major, -v.minor}; }
};

struct LexTolerance {
    double major = 0.0;
    double minor = 0.0;

    /// Strictly positive beyond tolerance.
    bool positive(const LexValue& v) const {
        if (v.major > major) {
            return true;
        }
        if (v.major < -major) {
            return false;
        }
        return v.minor > minor;
    }
    bool negative(const LexValue& v) const { return positive(-v); }
    /// a < b.
    bool less(const LexValue& a, const LexValue& b) const {
        LexValue d = b;
        d -= a;
        return positive(d);
    }
};

/** Dinic max-flow over LexValue capacities, used only to extract the minimal minimum cut.
 *
 * Buffers are kept between solves so repeated small cut problems avoid reallocation.
 */
class LexMaxFlow {
public:
    void reset(std::size_t nodes, LexTolerance tol);
    void add_edge(std::size_t from, std::size_t to, LexValue cap);
    /// Adds an edge that can never be cut.
    void add_infinite_edge(std::size_t from, std::size_t to);

    void solve(std::size_t source, std::size_t sink);
    /// After solve(): nodes reachable from the source in the residual graph (the minimal source side).
    const std::vector<char>& source_side() const { return reach_; }

private:
    struct Edge {
        std::size_t to;
        std::size_t rev;
        LexValue cap;
    };

    bool build_levels(std::size_t source, std::size_t sink);
    LexValue push(std::size_t u, std::size_t sink, LexValue limit);
    LexValue min_lex(const LexValue& a, const LexValue& b) const { return tol_.less(b, a) ? b : a; }

    std::vector<std::vector<Edge>> adj_;
    std::vector<int> level_;
    std::vector<std::size_t> iter_;
    std::vector<std::size_t> queue_;
    std::vector<char> reach_;
    LexTolerance tol_;
};

inline constexpr double kInfiniteCapacity = std::numeric_limits<double>::infinity();

}  // namespace monoreg::detail
