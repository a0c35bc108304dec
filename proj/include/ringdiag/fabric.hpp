#pragma once

#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "ringdiag/rules.hpp"
#include "ringdiag/topology.hpp"

namespace ringdiag {

// Which links drop packets. Symmetric failures kill an edge in both
// directions; asymmetric failures kill a single (edge, tail) orientation.
struct FailureState {
    std::set<EdgeId> failed_edges;
    std::set<std::pair<EdgeId, SwitchId>> failed_arcs;

    bool blocks(const Arc& a) const {
        if (failed_edges.count(a.edge)) return true;
        return failed_arcs.count({a.edge, a.tail}) != 0;
    }
    bool empty() const { return failed_edges.empty() && failed_arcs.empty(); }
};

// Validated constructors: reject failures naming edges the topology does not
// have (or arcs whose claimed tail is not an endpoint of the edge).
inline FailureState symmetric_failure(const Topology& t, const std::vector<EdgeId>& edges) {
    FailureState fs;
    for (EdgeId e : edges) {
        if (e >= t.edges.size()) throw error("failure state: unknown edge");
        fs.failed_edges.insert(e);
    }
    return fs;
}

inline FailureState asymmetric_failure(const Topology& t, const std::vector<Arc>& arcs) {
    FailureState fs;
    for (const Arc& a : arcs) {
        if (a.edge >= t.edges.size()) throw error("failure state: unknown edge");
        const Edge& e = t.edges[a.edge];
        bool fwd = a.tail == e.a && a.head == e.b;
        bool rev = a.tail == e.b && a.head == e.a;
        if (!fwd && !rev) throw error("failure state: arc not on its edge");
        fs.failed_arcs.insert({a.edge, a.tail});
    }
    return fs;
}

enum class ProbeStatus : std::uint8_t { delivered, lost_link, lost_no_match, lost_hop_limit };

inline const char* to_string(ProbeStatus s) {
    switch (s) {
        case ProbeStatus::delivered: return "delivered";
        case ProbeStatus::lost_link: return "lost_link";
        case ProbeStatus::lost_no_match: return "lost_no_match";
        default: return "lost_hop_limit";
    }
}

struct TraceEvent {
    enum class Kind : std::uint8_t { traverse, link_failed, rule_fired, no_match, controller };
    Kind kind{};
    std::size_t hop = 0;
    std::optional<Arc> arc;
    std::optional<SwitchId> sw;
    std::optional<std::size_t> rule_index;  // into Fabric::rules()
};

struct ProbeOutcome {
    ProbeStatus status = ProbeStatus::lost_no_match;
    std::size_t hops = 0;  // link traversals attempted, failed one included
    std::optional<ControllerId> controller;
    std::optional<SwitchId> last_switch;
    Header header;
    std::vector<TraceEvent> trace;

    bool delivered() const { return status == ProbeStatus::delivered; }
};

// An installed rule table over a topology. Lookup is highest priority first,
// insertion order breaking ties, so a wildcard rule installed after its exact
// siblings stays behind them.
class Fabric {
  public:
    Fabric(const Topology& t, std::vector<Rule> rules, std::size_t hop_budget,
           double tau_us = 1.0)
        : topo_(&t), rules_(std::move(rules)), hop_budget_(hop_budget), tau_us_(tau_us) {
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            const Rule& r = rules_[i];
            if (r.sw >= topo_->num_switches()) throw error("fabric: rule on unknown switch");
            if (r.actions.empty()) throw error("fabric: rule with no actions");
            for (std::size_t k = 0; k + 1 < r.actions.size(); ++k)
                if (r.actions[k].is_terminal())
                    throw error("fabric: terminal action must come last");
            if (!r.actions.back().is_terminal())
                throw error("fabric: rule must end in forward, send-back or controller");
            if (r.actions.back().kind == Action::Kind::forward &&
                r.actions.back().out.tail != r.sw)
                throw error("fabric: forward action leaves a different switch");
            for (std::size_t j = 0; j < i; ++j)
                if (rules_[j] == r) throw error("fabric: duplicate rule");
            by_switch_[r.sw].push_back(i);
        }
        for (auto& [sw, idx] : by_switch_)
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return rules_[a].priority > rules_[b].priority;
            });
    }

    const Topology& topology() const { return *topo_; }
    const std::vector<Rule>& rules() const { return rules_; }
    std::size_t hop_budget() const { return hop_budget_; }
    double tau_us() const { return tau_us_; }

    // Emit a packet directly onto an arc (controller packet-out with an
    // explicit output port); rule lookup starts at the arc's head.
    ProbeOutcome inject(const Arc& first, Header h, const FailureState& fail = {}) const {
        ProbeOutcome out;
        out.header = h;
        run(first, fail, out);
        return out;
    }

    // Hand a packet to a switch with no arrival port (only port-wildcard
    // rules can match).
    ProbeOutcome inject_at(SwitchId sw, Header h, const FailureState& fail = {}) const {
        ProbeOutcome out;
        out.header = h;
        if (sw >= topo_->num_switches()) throw error("fabric: unknown switch");
        auto next = step(sw, std::nullopt, fail, out);
        if (next) run(*next, fail, out);
        return out;
    }

  private:
    void run(Arc a, const FailureState& fail, ProbeOutcome& out) const {
        for (;;) {
            if (out.hops >= hop_budget_) {
                out.status = ProbeStatus::lost_hop_limit;
                return;
            }
            ++out.hops;
            if (fail.blocks(a)) {
                out.trace.push_back({TraceEvent::Kind::link_failed, out.hops, a, a.tail, {}});
                out.status = ProbeStatus::lost_link;
                out.last_switch = a.tail;
                return;
            }
            out.trace.push_back({TraceEvent::Kind::traverse, out.hops, a, {}, {}});
            auto next = step(a.head, a, fail, out);
            if (!next) return;
            a = *next;
        }
    }

    // Applies the first matching rule at sw; returns the next arc to traverse
    // or nullopt when the packet stopped (delivered or lost).
    std::optional<Arc> step(SwitchId sw, std::optional<Arc> in, const FailureState&,
                            ProbeOutcome& out) const {
        out.last_switch = sw;
        auto it = by_switch_.find(sw);
        const Rule* hit = nullptr;
        std::size_t hit_index = 0;
        if (it != by_switch_.end())
            for (std::size_t i : it->second)
                if (rules_[i].match.matches(out.header, in)) {
                    hit = &rules_[i];
                    hit_index = i;
                    break;
                }
        if (!hit) {
            out.trace.push_back({TraceEvent::Kind::no_match, out.hops, {}, sw, {}});
            out.status = ProbeStatus::lost_no_match;
            return std::nullopt;
        }
        out.trace.push_back({TraceEvent::Kind::rule_fired, out.hops, {}, sw, hit_index});
        for (const Action& act : hit->actions) {
            switch (act.kind) {
                case Action::Kind::set_vlan: out.header.vlan = act.vlan; break;
                case Action::Kind::set_flow: out.header.flow = act.flow; break;
                case Action::Kind::dec_ttl:
                    if (!out.header.ttl || *out.header.ttl == 0) {
                        out.status = ProbeStatus::lost_hop_limit;
                        return std::nullopt;
                    }
                    --*out.header.ttl;
                    break;
                case Action::Kind::forward: return act.out;
                case Action::Kind::send_back_in_port:
                    if (!in) throw error("fabric: send-back with no in-port");
                    return reversed(*in);
                case Action::Kind::to_controller:
                    out.trace.push_back(
                        {TraceEvent::Kind::controller, out.hops, {}, sw, hit_index});
                    out.status = ProbeStatus::delivered;
                    out.controller = act.controller;
                    return std::nullopt;
            }
        }
        throw error("fabric: rule ended without terminal action");
    }

    const Topology* topo_;
    std::vector<Rule> rules_;
    std::map<SwitchId, std::vector<std::size_t>> by_switch_;
    std::size_t hop_budget_;
    double tau_us_;
};

// Build a fabric from compiled rule sets. The hop budget is inferred from the
// ring length carried on the walk rule sets: two full laps plus slack.
inline Fabric build_fabric(const Topology& t, const std::vector<RuleSet>& sets,
                           double tau_us = 1.0, std::size_t hop_budget = 0) {
    std::vector<Rule> rules;
    std::size_t L = 0;
    for (const RuleSet& rs : sets) {
        L = std::max(L, rs.ring_length);
        rules.insert(rules.end(), rs.rules.begin(), rs.rules.end());
    }
    if (hop_budget == 0) hop_budget = 4 * std::max(L, rules.size()) + 4;
    return Fabric(t, std::move(rules), hop_budget, tau_us);
}

inline double latency_us(std::size_t hops, double tau_us) {
    return static_cast<double>(hops) * tau_us;
}

// Batch latency: parallel probes overlap (max), sequential ones stack (sum).
inline double latency_of(const std::vector<ProbeOutcome>& outcomes, bool parallel,
                         double tau_us) {
    std::size_t acc = 0;
    for (const ProbeOutcome& o : outcomes)
        acc = parallel ? std::max(acc, o.hops) : acc + o.hops;
    return latency_us(acc, tau_us);
}

}  // namespace ringdiag
