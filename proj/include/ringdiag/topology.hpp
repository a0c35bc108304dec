#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ringdiag {

using SwitchId = std::uint32_t;
using EdgeId = std::uint32_t;

struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

struct Edge {
    EdgeId id{};
    SwitchId a{}, b{};

    SwitchId other(SwitchId s) const { return s == a ? b : a; }
};

// One direction of an edge. Parallel edges have distinct EdgeIds, so arcs on
// different parallel links are distinct even between the same switch pair.
struct Arc {
    EdgeId edge{};
    SwitchId tail{}, head{};

    friend bool operator==(const Arc& x, const Arc& y) {
        return x.edge == y.edge && x.tail == y.tail && x.head == y.head;
    }
    friend bool operator!=(const Arc& x, const Arc& y) { return !(x == y); }
    friend bool operator<(const Arc& x, const Arc& y) {
        if (x.edge != y.edge) return x.edge < y.edge;
        return x.tail < y.tail;
    }
};

struct Topology {
    std::vector<SwitchId> switches;  // dense 0..n-1
    std::vector<Edge> edges;         // ids equal indices
    std::string name;
    std::vector<std::string> labels;  // optional display names, parallel to switches

    std::size_t num_switches() const { return switches.size(); }
    std::size_t num_edges() const { return edges.size(); }

    std::string label(SwitchId s) const {
        if (s < labels.size() && !labels[s].empty()) return labels[s];
        return "n" + std::to_string(s);
    }
};

struct ControlDomain {
    std::vector<SwitchId> switches;

    bool contains(SwitchId s) const {
        return std::find(switches.begin(), switches.end(), s) != switches.end();
    }
};

inline Arc forward_arc(const Edge& e) { return Arc{e.id, e.a, e.b}; }
inline Arc reverse_arc(const Edge& e) { return Arc{e.id, e.b, e.a}; }

inline Arc reversed(const Arc& a) { return Arc{a.edge, a.head, a.tail}; }

// Index of an arc in the directed_arcs ordering: 2*edge for a->b, 2*edge+1 for b->a.
inline std::size_t arc_index(const Topology& t, const Arc& a) {
    const Edge& e = t.edges.at(a.edge);
    return 2 * static_cast<std::size_t>(a.edge) + (a.tail == e.a ? 0 : 1);
}

inline void check_valid(const Topology& t) {
    for (std::size_t i = 0; i < t.switches.size(); ++i)
        if (t.switches[i] != i) throw error("topology: switch ids must be dense 0..n-1");
    for (std::size_t i = 0; i < t.edges.size(); ++i) {
        const Edge& e = t.edges[i];
        if (e.id != i) throw error("topology: edge ids must equal their index");
        if (e.a >= t.switches.size() || e.b >= t.switches.size())
            throw error("topology: edge endpoint references unknown switch");
    }
}

namespace detail {

// adjacency[s] lists (neighbor, edge id); self-loops appear once
inline std::vector<std::vector<std::pair<SwitchId, EdgeId>>> adjacency(const Topology& t) {
    std::vector<std::vector<std::pair<SwitchId, EdgeId>>> adj(t.switches.size());
    for (const Edge& e : t.edges) {
        adj[e.a].push_back({e.b, e.id});
        if (e.a != e.b) adj[e.b].push_back({e.a, e.id});
    }
    return adj;
}

}  // namespace detail

inline bool is_connected(const Topology& t) {
    if (t.switches.size() <= 1) return true;
    auto adj = detail::adjacency(t);
    std::vector<char> seen(t.switches.size(), 0);
    std::queue<SwitchId> q;
    q.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!q.empty()) {
        SwitchId u = q.front();
        q.pop();
        for (auto [v, eid] : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                q.push(v);
            }
    }
    return reached == t.switches.size();
}

// Cut edges via one iterative DFS (low-link); parallel edges are handled by
// tracking the edge id used to enter a vertex rather than the parent vertex.
inline std::set<EdgeId> find_bridges(const Topology& t) {
    if (!is_connected(t)) throw error("find_bridges: topology must be connected");
    auto adj = detail::adjacency(t);
    const std::size_t n = t.switches.size();
    std::vector<std::uint32_t> disc(n, 0), low(n, 0);
    std::uint32_t timer = 0;
    std::set<EdgeId> bridges;

    struct Frame {
        SwitchId u;
        EdgeId in_edge;
        std::size_t next;
    };
    std::vector<Frame> stack;
    const EdgeId no_edge = static_cast<EdgeId>(-1);

    for (SwitchId root = 0; root < n; ++root) {
        if (disc[root]) continue;
        disc[root] = low[root] = ++timer;
        stack.push_back({root, no_edge, 0});
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next < adj[f.u].size()) {
                auto [v, eid] = adj[f.u][f.next++];
                if (eid == f.in_edge) continue;
                if (disc[v]) {
                    low[f.u] = std::min(low[f.u], disc[v]);
                } else {
                    disc[v] = low[v] = ++timer;
                    stack.push_back({v, eid, 0});
                }
            } else {
                Frame done = f;
                stack.pop_back();
                if (!stack.empty()) {
                    Frame& parent = stack.back();
                    low[parent.u] = std::min(low[parent.u], low[done.u]);
                    if (low[done.u] > disc[parent.u]) bridges.insert(done.in_edge);
                }
            }
        }
    }
    return bridges;
}

// Fewest static rules any diagnostic ring can need: one per edge plus one per cut edge.
inline std::size_t rule_lower_bound(const Topology& t) {
    return t.edges.size() + find_bridges(t).size();
}

// Both orientations of every edge, ordered (edge 0 a->b, edge 0 b->a, edge 1 a->b, ...).
inline std::vector<Arc> directed_arcs(const Topology& t) {
    std::vector<Arc> arcs;
    arcs.reserve(2 * t.edges.size());
    for (const Edge& e : t.edges) {
        arcs.push_back(forward_arc(e));
        arcs.push_back(reverse_arc(e));
    }
    return arcs;
}

}  // namespace ringdiag
