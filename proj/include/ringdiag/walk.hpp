#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <vector>

#include "ringdiag/matching.hpp"
#include "ringdiag/topology.hpp"

namespace ringdiag {

enum class WalkCoverage { undirected_cover, directed_cover };

// Closed walk over a topology. Ring positions are 1-based: position i sits at
// the tail of arcs[i-1], so a walk of length L defines positions v_1..v_L.
struct Walk {
    std::vector<Arc> arcs;
    SwitchId start{};
    WalkCoverage coverage = WalkCoverage::undirected_cover;

    std::size_t length() const { return arcs.size(); }
    SwitchId position_switch(std::size_t pos) const { return arcs[pos - 1].tail; }
};

struct WalkMetrics {
    std::size_t length{};
    std::size_t kappa{};        // hops sharing a rule with an earlier identical arc
    std::size_t unique_arcs{};  // distinct (edge, direction) pairs = rules needed
    std::size_t rule_cost{};    // length - kappa
};

namespace detail {

struct ArcKey {
    EdgeId edge;
    SwitchId tail;
    friend bool operator<(const ArcKey& x, const ArcKey& y) {
        return x.edge != y.edge ? x.edge < y.edge : x.tail < y.tail;
    }
};

inline std::map<ArcKey, std::size_t> arc_counts(const std::vector<Arc>& arcs) {
    std::map<ArcKey, std::size_t> counts;
    for (const Arc& a : arcs) ++counts[{a.edge, a.tail}];
    return counts;
}

}  // namespace detail

inline WalkMetrics walk_metrics(const Walk& w) {
    WalkMetrics m;
    m.length = w.arcs.size();
    auto counts = detail::arc_counts(w.arcs);
    m.unique_arcs = counts.size();
    m.kappa = m.length - m.unique_arcs;
    m.rule_cost = m.unique_arcs;
    return m;
}

// Checks closure, arc consistency with t, and coverage: every edge touched
// (undirected mode) or every arc visited (directed mode). The mode defaults
// to the coverage the walk was built with but can be overridden.
inline bool validate_walk(const Topology& t, const Walk& w,
                          std::optional<WalkCoverage> mode = std::nullopt) {
    if (w.arcs.empty()) return false;
    for (const Arc& a : w.arcs) {
        if (a.edge >= t.edges.size()) return false;
        const Edge& e = t.edges[a.edge];
        bool fwd = a.tail == e.a && a.head == e.b;
        bool rev = a.tail == e.b && a.head == e.a;
        if (!fwd && !rev) return false;
    }
    if (w.arcs.front().tail != w.start) return false;
    if (w.arcs.back().head != w.start) return false;
    for (std::size_t i = 0; i + 1 < w.arcs.size(); ++i)
        if (w.arcs[i].head != w.arcs[i + 1].tail) return false;

    if (mode.value_or(w.coverage) == WalkCoverage::undirected_cover) {
        std::vector<char> covered(t.edges.size(), 0);
        for (const Arc& a : w.arcs) covered[a.edge] = 1;
        for (char c : covered)
            if (!c) return false;
    } else {
        auto counts = detail::arc_counts(w.arcs);
        if (counts.size() != 2 * t.edges.size()) return false;
    }
    return true;
}

// Same ring traversed the other way round: arc order and orientations flip.
inline Walk reverse_walk(const Walk& w) {
    Walk r;
    r.coverage = w.coverage;
    r.arcs.reserve(w.arcs.size());
    for (auto it = w.arcs.rbegin(); it != w.arcs.rend(); ++it) r.arcs.push_back(reversed(*it));
    r.start = r.arcs.empty() ? w.start : r.arcs.front().tail;
    return r;
}

namespace detail {

inline Walk rotate_to_start(Walk w, SwitchId start) {
    for (std::size_t k = 0; k < w.arcs.size(); ++k) {
        if (w.arcs[k].tail == start) {
            std::rotate(w.arcs.begin(), w.arcs.begin() + k, w.arcs.end());
            w.start = start;
            return w;
        }
    }
    return w;  // start not visited; leave untouched
}

struct MultiEdge {
    SwitchId a, b;
    EdgeId source;  // original edge this instance duplicates
};

// Euler circuit over undirected edge instances, always extending along the
// lowest-numbered available arc (instance arcs are numbered 2k / 2k+1).
inline std::vector<Arc> euler_circuit(const std::vector<MultiEdge>& inst, std::size_t n,
                                      SwitchId start) {
    struct Out {
        std::size_t arc_id;
        std::size_t inst;
        SwitchId to;
    };
    std::vector<std::vector<Out>> adj(n);
    for (std::size_t k = 0; k < inst.size(); ++k) {
        adj[inst[k].a].push_back({2 * k, k, inst[k].b});
        adj[inst[k].b].push_back({2 * k + 1, k, inst[k].a});
    }
    for (auto& outs : adj)
        std::sort(outs.begin(), outs.end(),
                  [](const Out& x, const Out& y) { return x.arc_id < y.arc_id; });

    std::vector<char> used(inst.size(), 0);
    std::vector<std::size_t> next(n, 0);
    std::vector<SwitchId> stack{start};
    std::vector<std::pair<SwitchId, std::size_t>> path;  // (vertex, instance entered by)
    std::vector<Arc> circuit;

    std::vector<std::size_t> inst_stack;
    while (!stack.empty()) {
        SwitchId v = stack.back();
        while (next[v] < adj[v].size() && used[adj[v][next[v]].inst]) ++next[v];
        if (next[v] == adj[v].size()) {
            stack.pop_back();
            if (!stack.empty()) {
                std::size_t k = inst_stack.back();
                inst_stack.pop_back();
                SwitchId from = stack.back();
                circuit.push_back(Arc{inst[k].source, from, v});
            }
        } else {
            const Out& o = adj[v][next[v]];
            used[o.inst] = 1;
            stack.push_back(o.to);
            inst_stack.push_back(o.inst);
        }
    }
    std::reverse(circuit.begin(), circuit.end());
    return circuit;
}

}  // namespace detail

struct CppOptions {
    bool force_exact_matching = false;
};

// Minimum-length closed walk covering every edge: pair odd-degree switches by
// shortest-path matching, duplicate the matched paths, then take an Euler
// circuit of the augmented multigraph.
inline Walk solve_cpp(const Topology& t, SwitchId start = 0, const CppOptions& opts = {}) {
    check_valid(t);
    if (t.edges.empty()) throw error("solve_cpp: topology has no edges");
    if (!is_connected(t)) throw error("solve_cpp: topology must be connected");
    if (start >= t.switches.size()) throw error("solve_cpp: unknown start switch");

    std::vector<std::size_t> degree(t.switches.size(), 0);
    for (const Edge& e : t.edges) {
        ++degree[e.a];
        ++degree[e.b];
    }
    std::vector<SwitchId> odd;
    for (SwitchId s = 0; s < t.switches.size(); ++s)
        if (degree[s] % 2) odd.push_back(s);

    std::vector<detail::MultiEdge> inst;
    inst.reserve(t.edges.size() + odd.size());
    for (const Edge& e : t.edges) inst.push_back({e.a, e.b, e.id});

    if (!odd.empty()) {
        auto adj = detail::adjacency(t);
        // BFS tree from each odd switch; parents recorded as edge ids
        auto bfs = [&](SwitchId src) {
            std::vector<int> dist(t.switches.size(), -1);
            std::vector<EdgeId> via(t.switches.size(), 0);
            std::queue<SwitchId> q;
            dist[src] = 0;
            q.push(src);
            while (!q.empty()) {
                SwitchId u = q.front();
                q.pop();
                for (auto [v, eid] : adj[u])
                    if (dist[v] < 0) {
                        dist[v] = dist[u] + 1;
                        via[v] = eid;
                        q.push(v);
                    }
            }
            return std::make_pair(dist, via);
        };

        std::vector<std::vector<int>> dist(odd.size());
        std::vector<std::vector<EdgeId>> via(odd.size());
        for (std::size_t i = 0; i < odd.size(); ++i) std::tie(dist[i], via[i]) = bfs(odd[i]);

        std::vector<std::vector<long>> w(odd.size(), std::vector<long>(odd.size(), 0));
        for (std::size_t i = 0; i < odd.size(); ++i)
            for (std::size_t j = 0; j < odd.size(); ++j) w[i][j] = dist[i][odd[j]];

        for (auto [i, j] : min_weight_pairing(w, opts.force_exact_matching)) {
            // duplicate the shortest path from odd[i] to odd[j] along i's BFS tree
            SwitchId cur = odd[j];
            while (cur != odd[static_cast<std::size_t>(i)]) {
                EdgeId eid = via[i][cur];
                const Edge& e = t.edges[eid];
                inst.push_back({e.a, e.b, eid});
                cur = e.other(cur);
            }
        }
    }

    Walk w;
    w.arcs = detail::euler_circuit(inst, t.switches.size(), start);
    w.start = start;
    w.coverage = WalkCoverage::undirected_cover;
    if (w.arcs.size() != inst.size()) throw error("solve_cpp: euler circuit incomplete");
    return w;
}

// Euler cycle over the directed graph containing both orientations of every
// edge; every switch is balanced there, so it always exists on connected input.
inline Walk euler_cycle_directed(const Topology& t, SwitchId start = 0) {
    check_valid(t);
    if (t.edges.empty()) throw error("euler_cycle_directed: topology has no edges");
    if (!is_connected(t)) throw error("euler_cycle_directed: topology must be connected");
    if (start >= t.switches.size()) throw error("euler_cycle_directed: unknown start switch");

    auto arcs = directed_arcs(t);
    std::vector<std::vector<std::size_t>> out(t.switches.size());
    for (std::size_t k = 0; k < arcs.size(); ++k) out[arcs[k].tail].push_back(k);

    std::vector<char> used(arcs.size(), 0);
    std::vector<std::size_t> next(t.switches.size(), 0);
    std::vector<SwitchId> stack{start};
    std::vector<std::size_t> arc_stack;
    std::vector<Arc> circuit;
    while (!stack.empty()) {
        SwitchId v = stack.back();
        while (next[v] < out[v].size() && used[out[v][next[v]]]) ++next[v];
        if (next[v] == out[v].size()) {
            stack.pop_back();
            if (!stack.empty()) {
                circuit.push_back(arcs[arc_stack.back()]);
                arc_stack.pop_back();
            }
        } else {
            std::size_t k = out[v][next[v]];
            used[k] = 1;
            stack.push_back(arcs[k].head);
            arc_stack.push_back(k);
        }
    }
    std::reverse(circuit.begin(), circuit.end());

    Walk w;
    w.arcs = std::move(circuit);
    w.start = start;
    w.coverage = WalkCoverage::directed_cover;
    if (w.arcs.size() != arcs.size()) throw error("euler_cycle_directed: circuit incomplete");
    return w;
}

namespace detail {

inline std::size_t kappa_of(const std::vector<Arc>& arcs) {
    return arcs.size() - arc_counts(arcs).size();
}

// Ring segment [from, to) taken cyclically.
inline std::vector<Arc> segment(const std::vector<Arc>& arcs, std::size_t from, std::size_t to) {
    std::vector<Arc> out;
    for (std::size_t k = from; k != to; k = (k + 1) % arcs.size()) out.push_back(arcs[k]);
    return out;
}

}  // namespace detail

// Raises the number of shared-rule hops at fixed length by repeatedly taking
// an opposite-direction arc pair off a non-bridge edge, splitting the ring at
// the pair, and re-stitching one part reversed. A candidate is kept only when
// the duplicate count strictly increases.
inline Walk improve_walk(const Topology& t, const Walk& input) {
    if (input.coverage != WalkCoverage::undirected_cover)
        throw error("improve_walk: only undirected-cover walks can be re-stitched");
    if (!validate_walk(t, input)) throw error("improve_walk: input is not a closed covering walk");
    auto bridges = find_bridges(t);

    std::vector<Arc> cur = input.arcs;
    const std::size_t L = cur.size();

    auto occurrence = [&](EdgeId e, bool fwd) -> std::optional<std::size_t> {
        for (std::size_t k = 0; k < L; ++k) {
            if (cur[k].edge != e) continue;
            bool is_fwd = cur[k].tail == t.edges[e].a;
            if (is_fwd == fwd) return k;
        }
        return std::nullopt;
    };

    std::vector<EdgeId> lambda;
    for (const Edge& e : t.edges) {
        if (bridges.count(e.id)) continue;
        if (occurrence(e.id, true) && occurrence(e.id, false)) lambda.push_back(e.id);
    }

    while (!lambda.empty()) {
        // pick the pair whose arcs sit closest on the ring
        std::size_t best_gap = L + 1;
        std::size_t best_idx = 0;
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            std::size_t p = *occurrence(lambda[i], true);
            std::size_t q = *occurrence(lambda[i], false);
            std::size_t d = p > q ? p - q : q - p;
            std::size_t gap = std::min(d, L - d);
            if (gap < best_gap) {
                best_gap = gap;
                best_idx = i;
            }
        }
        EdgeId eid = lambda[best_idx];
        lambda.erase(lambda.begin() + best_idx);

        std::size_t p = *occurrence(eid, true);   // arc s_i -> s_j
        std::size_t q = *occurrence(eid, false);  // arc s_j -> s_i

        // Dropping arcs p and q splits the ring positions into the part with
        // s_j (positions p+1..q) and the part with s_i (positions q+1..p).
        auto in_cyclic = [&](std::size_t k, std::size_t lo, std::size_t hi) {
            // is k in (lo, hi] cyclically?
            if (lo < hi) return k > lo && k <= hi;
            return k > lo || k <= hi;
        };

        std::vector<std::pair<std::size_t, std::size_t>> gamma;
        for (std::size_t k = 0; k < L; ++k) {
            if (!in_cyclic(k, q, p)) continue;  // k must sit in the s_i part
            for (std::size_t l = 0; l < L; ++l) {
                if (!in_cyclic(l, p, q)) continue;  // l in the s_j part
                if (cur[k].tail == cur[l].tail) gamma.push_back({k, l});
            }
        }
        std::sort(gamma.begin(), gamma.end());

        const std::size_t kappa_now = detail::kappa_of(cur);
        for (auto [k, l] : gamma) {
            std::vector<Arc> w3 = detail::segment(cur, k, l);
            std::vector<Arc> w4 = detail::segment(cur, l, k);
            std::vector<Arc> candidate = w3;
            for (auto it = w4.rbegin(); it != w4.rend(); ++it) candidate.push_back(reversed(*it));
            if (detail::kappa_of(candidate) > kappa_now) {
                cur = std::move(candidate);
                break;
            }
        }

        // drop pairs that no longer have both orientations on the ring
        std::erase_if(lambda, [&](EdgeId e) {
            return !occurrence(e, true) || !occurrence(e, false);
        });
    }

    Walk out;
    out.arcs = std::move(cur);
    out.start = out.arcs.front().tail;
    out.coverage = input.coverage;
    out = detail::rotate_to_start(std::move(out), input.start);
    return out;
}

}  // namespace ringdiag
