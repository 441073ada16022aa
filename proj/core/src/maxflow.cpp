#include "maxflow.hpp"

namespace monoreg::detail {

void LexMaxFlow::reset(std::size_t nodes, LexTolerance tol) {
    if (adj_.size() < nodes) {
        adj_.resize(nodes);
    }
    for (std::size_t i = 0; i < nodes; ++i) {
        adj_[i].clear();
    }
    adj_.resize(nodes);
    level_.assign(nodes, -1);
    iter_.assign(nodes, 0);
    reach_.assign(nodes, 0);
    tol_ = tol;
}

void LexMaxFlow::add_edge(std::size_t from, std::size_t to, LexValue cap) {
    adj_[from].push_back({to, adj_[to].size(), cap});
    adj_[to].push_back({from, adj_[from].size() - 1, LexValue{}});
}

void LexMaxFlow::add_infinite_edge(std::size_t from, std::size_t to) {
    add_edge(from, to, LexValue{kInfiniteCapacity, 0.0});
}

bool LexMaxFlow::build_levels(std::size_t source, std::size_t sink) {
    std::fill(level_.begin(), level_.end(), -1);
    queue_.clear();
    level_[source] = 0;
    queue_.push_back(source);
    for (std::size_t head = 0; head < queue_.size(); ++head) {
        const std::size_t u = queue_[head];
        for (const Edge& e : adj_[u]) {
            if (level_[e.to] < 0 && tol_.positive(e.cap)) {
                level_[e.to] = level_[u] + 1;
                queue_.push_back(e.to);
            }
        }
    }
    return level_[sink] >= 0;
}

LexValue LexMaxFlow::push(std::size_t u, std::size_t sink, LexValue limit) {
    if (u == sink) {
        return limit;
    }
    for (std::size_t& i = iter_[u]; i < adj_[u].size(); ++i) {
        Edge& e = adj_[u][i];
        if (level_[e.to] != level_[u] + 1 || !tol_.positive(e.cap)) {
            continue;
        }
        const LexValue got = push(e.to, sink, min_lex(limit, e.cap));
        if (tol_.positive(got)) {
            e.cap -= got;
            adj_[e.to][e.rev].cap += got;
            return got;
        }
    }
    return LexValue{};
}

void LexMaxFlow::solve(std::size_t source, std::size_t sink) {
    const LexValue unbounded{kInfiniteCapacity, 0.0};
    while (build_levels(source, sink)) {
        std::fill(iter_.begin(), iter_.end(), 0);
        while (tol_.positive(push(source, sink, unbounded))) {
        }
    }
    // build_levels left the final residual BFS from the source in level_.
    for (std::size_t v = 0; v < level_.size(); ++v) {
        reach_[v] = level_[v] >= 0 ? 1 : 0;
    }
}

}  // namespace monoreg::detail
