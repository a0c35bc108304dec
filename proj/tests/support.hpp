#ifndef RINGDIAG_TESTS_SUPPORT_HPP
#define RINGDIAG_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ringdiag/diagnosis.hpp"
#include "ringdiag/fabric.hpp"
#include "ringdiag/ring.hpp"
#include "ringdiag/topology.hpp"
#include "ringdiag/walk.hpp"

namespace ringdiag::testing {

inline std::string data_dir() {
#ifdef RINGDIAG_DATA_DIR
    return RINGDIAG_DATA_DIR;
#else
    return "data";
#endif
}

inline Topology make_topology(std::size_t n, const std::vector<std::pair<SwitchId, SwitchId>>& es,
                              const std::string& name = "t",
                              const std::vector<std::string>& labels = {}) {
    Topology t;
    t.name = name;
    for (SwitchId v = 0; v < n; ++v) {
        t.switches.push_back(v);
        t.labels.push_back(v < labels.size() ? labels[v] : "n" + std::to_string(v));
    }
    for (auto [a, b] : es) t.edges.push_back(Edge{static_cast<EdgeId>(t.edges.size()), a, b});
    return t;
}

// Seven-switch reference fabric; edges in lexicographic endpoint order.
inline Topology fig1() {
    return make_topology(7,
                         {{0, 1}, {0, 4}, {1, 2}, {1, 4}, {2, 3}, {2, 5}, {3, 6}, {4, 5}, {5, 6}},
                         "fig1", {"s1", "s2", "s3", "s4", "s5", "s6", "s7"});
}

// The reference ring on fig1: s1 s5 s2 s3 s6 s7 s4 s3 s6 s5 s2 s1.
inline std::vector<Arc> fig1_golden_arcs() {
    return {Arc{1, 0, 4}, Arc{3, 4, 1}, Arc{2, 1, 2}, Arc{5, 2, 5}, Arc{8, 5, 6}, Arc{6, 6, 3},
            Arc{4, 3, 2}, Arc{5, 2, 5}, Arc{7, 5, 4}, Arc{3, 4, 1}, Arc{0, 1, 0}};
}

// Four-switch multigraph: two s1-s2 links, one s2-s3, two s3-s4, three s4-s1.
inline Topology fig2() {
    return make_topology(4, {{0, 1}, {0, 1}, {1, 2}, {2, 3}, {2, 3}, {3, 0}, {3, 0}, {3, 0}},
                         "fig2", {"s1", "s2", "s3", "s4"});
}

// Hand-built 12-hop covering ring on fig2 with four shared-rule hops.
inline Walk fig2_golden_walk() {
    Walk w;
    w.start = 0;
    w.coverage = WalkCoverage::undirected_cover;
    w.arcs = {Arc{0, 0, 1}, Arc{2, 1, 2}, Arc{3, 2, 3}, Arc{5, 3, 0},
              Arc{0, 0, 1}, Arc{2, 1, 2}, Arc{3, 2, 3}, Arc{6, 3, 0},
              Arc{1, 0, 1}, Arc{2, 1, 2}, Arc{4, 2, 3}, Arc{7, 3, 0}};
    return w;
}

// Hand-built optimal-length (10-hop) ring on fig2 with one shared-rule hop.
inline Walk fig2_center_walk() {
    Walk w;
    w.start = 0;
    w.coverage = WalkCoverage::undirected_cover;
    w.arcs = {Arc{0, 0, 1}, Arc{2, 1, 2}, Arc{3, 2, 3}, Arc{6, 3, 0}, Arc{0, 0, 1},
              Arc{1, 1, 0}, Arc{7, 0, 3}, Arc{3, 3, 2}, Arc{4, 2, 3}, Arc{5, 3, 0}};
    return w;
}

inline Topology path_graph(std::size_t edges) {
    std::vector<std::pair<SwitchId, SwitchId>> es;
    for (SwitchId v = 0; v < edges; ++v) es.push_back({v, v + 1});
    return make_topology(edges + 1, es, "path" + std::to_string(edges));
}

inline Topology star_graph(std::size_t spokes) {
    std::vector<std::pair<SwitchId, SwitchId>> es;
    for (SwitchId v = 1; v <= spokes; ++v) es.push_back({0, v});
    return make_topology(spokes + 1, es, "star" + std::to_string(spokes));
}

inline Topology cycle_graph(std::size_t n) {
    std::vector<std::pair<SwitchId, SwitchId>> es;
    for (SwitchId v = 0; v < n; ++v) es.push_back({v, static_cast<SwitchId>((v + 1) % n)});
    return make_topology(n, es, "cycle" + std::to_string(n));
}

inline Topology complete_graph(std::size_t n) {
    std::vector<std::pair<SwitchId, SwitchId>> es;
    for (SwitchId a = 0; a < n; ++a)
        for (SwitchId b = a + 1; b < n; ++b) es.push_back({a, b});
    return make_topology(n, es, "k" + std::to_string(n));
}

inline Topology random_connected(std::mt19937_64& rng, std::size_t min_n, std::size_t max_n,
                                 std::size_t extra_max, bool allow_parallel) {
    std::size_t n = min_n + rng() % (max_n - min_n + 1);
    Topology t;
    t.name = "random";
    for (SwitchId v = 0; v < n; ++v) {
        t.switches.push_back(v);
        t.labels.push_back("n" + std::to_string(v));
    }
    std::set<std::pair<SwitchId, SwitchId>> seen;
    auto add = [&](SwitchId a, SwitchId b) {
        t.edges.push_back(Edge{static_cast<EdgeId>(t.edges.size()), a, b});
        seen.insert({std::min(a, b), std::max(a, b)});
    };
    for (SwitchId v = 1; v < n; ++v) add(static_cast<SwitchId>(rng() % v), v);
    std::size_t extra = extra_max ? rng() % (extra_max + 1) : 0;
    for (std::size_t i = 0; i < extra; ++i) {
        auto a = static_cast<SwitchId>(rng() % n);
        auto b = static_cast<SwitchId>(rng() % n);
        if (a == b) continue;
        if (!allow_parallel && seen.count({std::min(a, b), std::max(a, b)})) continue;
        add(a, b);
    }
    return t;
}

// Random closed walk from switch 0 that happens to cover every edge.
inline Walk random_cover_walk(const Topology& t, std::mt19937_64& rng, std::size_t cap = 4096) {
    auto adj = detail::adjacency(t);
    for (;;) {
        Walk w;
        w.start = 0;
        w.coverage = WalkCoverage::undirected_cover;
        std::set<EdgeId> covered;
        SwitchId cur = 0;
        bool done = false;
        for (std::size_t step = 0; step < cap && !done; ++step) {
            auto [to, eid] = adj[cur][rng() % adj[cur].size()];
            w.arcs.push_back(Arc{eid, cur, to});
            covered.insert(eid);
            cur = to;
            done = cur == 0 && covered.size() == t.num_edges();
        }
        if (done) return w;
    }
}

// ---- independent oracles ----

// bridge = edge whose removal disconnects the graph (input assumed connected)
inline std::set<EdgeId> brute_bridges(const Topology& t) {
    auto adj = detail::adjacency(t);
    std::set<EdgeId> bridges;
    for (const Edge& cut : t.edges) {
        std::vector<char> seen(t.switches.size(), 0);
        std::queue<SwitchId> q;
        q.push(0);
        seen[0] = 1;
        std::size_t reached = 1;
        while (!q.empty()) {
            SwitchId u = q.front();
            q.pop();
            for (auto [v, eid] : adj[u]) {
                if (eid == cut.id || seen[v]) continue;
                seen[v] = 1;
                ++reached;
                q.push(v);
            }
        }
        if (reached != t.switches.size()) bridges.insert(cut.id);
    }
    return bridges;
}

// shortest closed walk from switch 0 touching every edge, by BFS over
// (switch, covered-edge set); usable up to ~12 edges
inline std::size_t min_cover_walk_length(const Topology& t) {
    const std::size_t n = t.switches.size();
    const std::size_t full = (std::size_t{1} << t.edges.size()) - 1;
    auto adj = detail::adjacency(t);
    std::vector<int> dist(n << t.edges.size(), -1);
    auto id = [&](SwitchId v, std::size_t mask) { return (mask * n) + v; };
    std::queue<std::pair<SwitchId, std::size_t>> q;
    dist[id(0, 0)] = 0;
    q.push({0, 0});
    while (!q.empty()) {
        auto [v, mask] = q.front();
        q.pop();
        if (v == 0 && mask == full) return static_cast<std::size_t>(dist[id(v, mask)]);
        for (auto [u, eid] : adj[v]) {
            std::size_t m2 = mask | (std::size_t{1} << eid);
            if (dist[id(u, m2)] >= 0) continue;
            dist[id(u, m2)] = dist[id(v, mask)] + 1;
            q.push({u, m2});
        }
    }
    throw error("min_cover_walk_length: no covering walk");
}

// Fewest distinct (edge, direction) pairs any closed covering walk can use:
// per edge pick forward, reverse or both, keep assignments whose arc set is
// strongly connected (a closed walk may then repeat arcs freely).
inline std::size_t min_unique_arcs(const Topology& t) {
    const std::size_t E = t.edges.size();
    std::size_t best = 2 * E;
    std::vector<std::size_t> choice(E, 0);  // 0 fwd, 1 rev, 2 both
    auto strongly_connected = [&](const std::vector<Arc>& arcs) {
        std::vector<std::vector<SwitchId>> out(t.switches.size()), in(t.switches.size());
        std::vector<char> active(t.switches.size(), 0);
        for (const Arc& a : arcs) {
            out[a.tail].push_back(a.head);
            in[a.head].push_back(a.tail);
            active[a.tail] = active[a.head] = 1;
        }
        auto bfs = [&](const std::vector<std::vector<SwitchId>>& g) {
            std::vector<char> seen(t.switches.size(), 0);
            std::queue<SwitchId> q;
            q.push(arcs.front().tail);
            seen[arcs.front().tail] = 1;
            while (!q.empty()) {
                SwitchId v = q.front();
                q.pop();
                for (SwitchId u : g[v])
                    if (!seen[u]) {
                        seen[u] = 1;
                        q.push(u);
                    }
            }
            for (SwitchId v = 0; v < t.switches.size(); ++v)
                if (active[v] && !seen[v]) return false;
            return true;
        };
        return bfs(out) && bfs(in);
    };
    for (;;) {
        std::vector<Arc> arcs;
        std::size_t count = 0;
        for (std::size_t e = 0; e < E; ++e) {
            if (choice[e] != 1) arcs.push_back(forward_arc(t.edges[e]));
            if (choice[e] != 0) arcs.push_back(reverse_arc(t.edges[e]));
            count += choice[e] == 2 ? 2 : 1;
        }
        if (count < best && strongly_connected(arcs)) best = count;
        std::size_t e = 0;
        while (e < E && choice[e] == 2) choice[e++] = 0;
        if (e == E) break;
        ++choice[e];
    }
    return best;
}

// exhaustive minimum-weight perfect matching, for small matrices
inline long brute_min_matching(const std::vector<std::vector<long>>& w) {
    std::vector<char> used(w.size(), 0);
    std::function<long(std::size_t)> go = [&](std::size_t done) -> long {
        std::size_t i = 0;
        while (i < w.size() && used[i]) ++i;
        if (i == w.size()) return 0;
        used[i] = 1;
        long best = -1;
        for (std::size_t j = i + 1; j < w.size(); ++j) {
            if (used[j]) continue;
            used[j] = 1;
            long rest = go(done + 2);
            if (best < 0 || w[i][j] + rest < best) best = w[i][j] + rest;
            used[j] = 0;
        }
        used[i] = 0;
        return best;
    };
    return go(0);
}

// ---- small conveniences ----

inline std::vector<Arc> trace_arcs(const ProbeOutcome& out) {
    std::vector<Arc> arcs;
    for (const TraceEvent& ev : out.trace)
        if (ev.kind == TraceEvent::Kind::traverse && ev.arc) arcs.push_back(*ev.arc);
    return arcs;
}

inline std::map<EdgeId, std::size_t> edge_use_counts(const Walk& w) {
    std::map<EdgeId, std::size_t> counts;
    for (const Arc& a : w.arcs) ++counts[a.edge];
    return counts;
}

inline InjectionPlan plan_at(const RingView& ring, RingPosition pos) {
    InjectionPlan p;
    p.points = {pos};
    p.fabrics.push_back(ring.fabric_for(pos));
    return p;
}

inline bool power_of_two(std::size_t x) { return x && (x & (x - 1)) == 0; }

// arithmetic replay of the halving search: charged bounce hops to localize
// first blocked offset kstar on a ring of length L
inline std::size_t bisect_charged(std::size_t L, std::size_t kstar) {
    std::size_t lo = 0, hi = L, total = 0;
    while (hi - lo > 1) {
        std::size_t mid = lo + (hi - lo) / 2;
        total += 2 * mid;
        (mid < kstar ? lo : hi) = mid;
    }
    return total;
}

}  // namespace ringdiag::testing

#endif  // RINGDIAG_TESTS_SUPPORT_HPP
