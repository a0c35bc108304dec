#pragma once

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/maximum_weighted_matching.hpp>

#include <cstdint>
#include <utility>
#include <vector>

#include "ringdiag/topology.hpp"

namespace ringdiag {

// Beyond this many odd-degree switches the exact matcher gives way to the
// greedy pairing unless exact matching is forced.
inline constexpr std::size_t kExactMatchingLimit = 40;

namespace detail {

inline std::vector<std::pair<int, int>> match_exact(const std::vector<std::vector<long>>& w) {
    using Graph =
        boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS, boost::no_property,
                              boost::property<boost::edge_weight_t, long>>;
    const int n = static_cast<int>(w.size());
    long max_w = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) max_w = std::max(max_w, w[i][j]);
    const long big = (max_w + 1) * static_cast<long>(n) + 1;

    Graph g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) boost::add_edge(i, j, big - w[i][j], g);
    std::vector<boost::graph_traits<Graph>::vertex_descriptor> mate(n);
    boost::maximum_weighted_matching(g, &mate[0]);

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        if (mate[i] != boost::graph_traits<Graph>::null_vertex() && static_cast<int>(mate[i]) > i)
            pairs.push_back({i, static_cast<int>(mate[i])});
    if (pairs.size() * 2 != static_cast<std::size_t>(n))
        throw error("matching: matcher did not return a perfect matching");
    return pairs;
}

// Nearest-pair greedy, then pairwise exchanges until locally optimal. The
// exchange pass also restores the property that matched shortest paths can be
// chosen edge-disjoint, which keeps every edge on at most two walk hops.
inline std::vector<std::pair<int, int>> match_greedy(const std::vector<std::vector<long>>& w) {
    const int n = static_cast<int>(w.size());
    std::vector<char> used(n, 0);
    std::vector<std::pair<int, int>> pairs;
    for (int round = 0; round < n / 2; ++round) {
        long best = -1;
        int bi = -1, bj = -1;
        for (int i = 0; i < n; ++i) {
            if (used[i]) continue;
            for (int j = i + 1; j < n; ++j) {
                if (used[j]) continue;
                if (best < 0 || w[i][j] < best) {
                    best = w[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        used[bi] = used[bj] = 1;
        pairs.push_back({bi, bj});
    }
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t x = 0; x < pairs.size(); ++x) {
            for (std::size_t y = x + 1; y < pairs.size(); ++y) {
                auto [a, b] = pairs[x];
                auto [c, d] = pairs[y];
                long cur = w[a][b] + w[c][d];
                if (w[a][c] + w[b][d] < cur) {
                    pairs[x] = {a, c};
                    pairs[y] = {b, d};
                    improved = true;
                } else if (w[a][d] + w[b][c] < cur) {
                    pairs[x] = {a, d};
                    pairs[y] = {b, c};
                    improved = true;
                }
            }
        }
    }
    return pairs;
}

}  // namespace detail

// Minimum-weight perfect matching on a complete graph given a symmetric weight
// matrix; indices are returned in pairs. Exact up to kExactMatchingLimit
// vertices (or always when force_exact), greedy with exchanges beyond that.
inline std::vector<std::pair<int, int>> min_weight_pairing(
    const std::vector<std::vector<long>>& w, bool force_exact = false) {
    if (w.empty()) return {};
    if (w.size() % 2 != 0) throw error("matching: vertex count must be even");
    if (force_exact || w.size() <= kExactMatchingLimit) return detail::match_exact(w);
    return detail::match_greedy(w);
}

}  // namespace ringdiag
