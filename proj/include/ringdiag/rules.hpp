#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "ringdiag/topology.hpp"
#include "ringdiag/walk.hpp"

namespace ringdiag {

enum class FlowTag : std::uint8_t { A, B };

using VlanTag = std::uint32_t;
using ControllerId = std::uint32_t;
using RingPosition = std::uint32_t;  // 1..L

struct Header {
    FlowTag flow = FlowTag::A;
    std::optional<RingPosition> bounce_target;
    std::optional<std::uint8_t> bounce_set;  // 1 or 2
    std::optional<VlanTag> vlan;
    std::optional<ControllerId> controller;
    std::optional<std::uint32_t> ttl;
};

// Exact-match-or-wildcard over header fields plus the arrival arc.
struct Match {
    std::optional<FlowTag> flow;
    std::optional<RingPosition> bounce_target;
    std::optional<std::uint8_t> bounce_set;
    std::optional<VlanTag> vlan;
    std::optional<ControllerId> controller;
    std::optional<Arc> in_port;

    bool matches(const Header& h, const std::optional<Arc>& in) const {
        if (flow && h.flow != *flow) return false;
        if (bounce_target && (!h.bounce_target || *h.bounce_target != *bounce_target)) return false;
        if (bounce_set && (!h.bounce_set || *h.bounce_set != *bounce_set)) return false;
        if (vlan && (!h.vlan || *h.vlan != *vlan)) return false;
        if (controller && (!h.controller || *h.controller != *controller)) return false;
        if (in_port && (!in || !(*in == *in_port))) return false;
        return true;
    }

    friend bool operator==(const Match& x, const Match& y) {
        return x.flow == y.flow && x.bounce_target == y.bounce_target &&
               x.bounce_set == y.bounce_set && x.vlan == y.vlan && x.controller == y.controller &&
               x.in_port == y.in_port;
    }
};

struct Action {
    enum class Kind : std::uint8_t {
        set_vlan,
        set_flow,
        dec_ttl,
        forward,
        send_back_in_port,
        to_controller
    };
    Kind kind{};
    VlanTag vlan{};
    FlowTag flow{};
    Arc out{};
    ControllerId controller{};

    static Action SetVlan(VlanTag t) { return {Kind::set_vlan, t, {}, {}, {}}; }
    static Action SetFlow(FlowTag f) { return {Kind::set_flow, {}, f, {}, {}}; }
    static Action DecTtl() { return {Kind::dec_ttl, {}, {}, {}, {}}; }
    static Action Forward(Arc a) { return {Kind::forward, {}, {}, a, {}}; }
    static Action SendBack() { return {Kind::send_back_in_port, {}, {}, {}, {}}; }
    static Action ToController(ControllerId c) { return {Kind::to_controller, {}, {}, {}, c}; }

    bool is_terminal() const {
        return kind == Kind::forward || kind == Kind::send_back_in_port ||
               kind == Kind::to_controller;
    }

    friend bool operator==(const Action& x, const Action& y) {
        if (x.kind != y.kind) return false;
        switch (x.kind) {
            case Kind::set_vlan: return x.vlan == y.vlan;
            case Kind::set_flow: return x.flow == y.flow;
            case Kind::forward: return x.out == y.out;
            case Kind::to_controller: return x.controller == y.controller;
            default: return true;
        }
    }
};

inline constexpr int kWalkPriority = 1;
inline constexpr int kBouncePriority = 2;
inline constexpr int kLoopbackPriority = 3;

struct Rule {
    SwitchId sw{};
    int priority = kWalkPriority;
    Match match;
    std::vector<Action> actions;

    friend bool operator==(const Rule& x, const Rule& y) {
        return x.sw == y.sw && x.priority == y.priority && x.match == y.match &&
               x.actions == y.actions;
    }
};

enum class RuleSetKind : std::uint8_t { walk_cw, walk_ccw, bounce_1, bounce_2, loopback };

struct RuleSet {
    RuleSetKind kind{};
    std::vector<Rule> rules;

    // ring metadata (walk kinds only)
    std::size_t ring_length = 0;
    std::vector<std::optional<VlanTag>> entry_vlan;  // [i-1]: tag carried into position i
    VlanTag tags_used = 0;
    bool fallback = false;        // per-position tagging was required
    std::size_t extra_rules = 0;  // rules beyond the unique-arc count (fallback only)

    std::optional<VlanTag> entry_at(RingPosition pos) const {
        return entry_vlan.empty() ? std::nullopt : entry_vlan[pos - 1];
    }
};

struct CompileOptions {
    VlanTag tag_base = 0;      // allocated tags are tag_base+1, tag_base+2, ...
    VlanTag max_tags = 4094;   // budget, exceeded -> error
};

namespace ring_detail {

inline std::size_t wrap0(std::ptrdiff_t k, std::size_t L) {
    std::ptrdiff_t m = static_cast<std::ptrdiff_t>(L);
    return static_cast<std::size_t>(((k % m) + m) % m);
}

// 1-based position arithmetic
inline RingPosition wrap1(std::ptrdiff_t pos, std::size_t L) {
    return static_cast<RingPosition>(wrap0(pos - 1, L) + 1);
}

// Arc entering position i (1-based): the walk arc preceding it on the ring.
inline const Arc& arc_into(const Walk& w, RingPosition i) {
    return w.arcs[wrap0(static_cast<std::ptrdiff_t>(i) - 2, w.arcs.size())];
}

// Arc leaving position i.
inline const Arc& arc_out_of(const Walk& w, RingPosition i) {
    return w.arcs[i - 1];
}

// Position of the reverse walk whose rule continues counter-clockwise travel
// away from clockwise position i (its out-arc is the reverse of arc_into(i)).
inline RingPosition ccw_position_at(RingPosition i, std::size_t L) {
    return static_cast<RingPosition>(wrap0(1 - static_cast<std::ptrdiff_t>(i), L) + 1);
}

// recompute carried-tag state before every position given per-position set actions
inline std::vector<std::optional<VlanTag>> states_from_sets(
    const std::vector<std::optional<VlanTag>>& set_at) {
    const std::size_t L = set_at.size();
    std::vector<std::optional<VlanTag>> before(L);
    std::optional<VlanTag> carry;
    // two laps: the second pass fills positions before the first set action
    for (std::size_t lap = 0; lap < 2; ++lap)
        for (std::size_t p = 0; p < L; ++p) {
            before[p] = carry;
            if (set_at[p]) carry = set_at[p];
        }
    return before;
}

}  // namespace ring_detail

// Compiles the forwarding rules that realize one direction of a ring walk:
// one rule per unique arc. A switch visited with several distinct out-arcs is
// disambiguated by in-port when arrivals determine departures (at most one
// out-arc group may then take the trailing wildcard rule), otherwise by VLAN
// tags set upstream. Tag placement follows a counter-clockwise search for a
// once-visited switch, piggybacking on tags already carried where possible;
// when no tagger exists the whole walk degrades to per-position tags and the
// extra rules are reported on the result.
inline RuleSet compile_walk(const Topology& t, const Walk& w, FlowTag flow,
                            const CompileOptions& opts = {}) {
    if (!validate_walk(t, w)) throw error("compile_walk: invalid walk");
    const std::size_t L = w.arcs.size();

    struct SwitchPlan {
        enum class Kind { single, in_port, vlan } kind = Kind::single;
        std::vector<std::size_t> positions;            // 0-based ring indices
        std::vector<Arc> group_arcs;                   // distinct out-arcs, first-seen order
        std::vector<std::vector<std::size_t>> groups;  // positions per group
    };
    std::map<SwitchId, SwitchPlan> plans;
    for (std::size_t p = 0; p < L; ++p) plans[w.arcs[p].tail].positions.push_back(p);

    auto arc_eq = [](const Arc& x, const Arc& y) { return x == y; };
    for (auto& [sw, plan] : plans) {
        for (std::size_t p : plan.positions) {
            const Arc& out = w.arcs[p];
            std::size_t g = 0;
            while (g < plan.group_arcs.size() && !arc_eq(plan.group_arcs[g], out)) ++g;
            if (g == plan.group_arcs.size()) {
                plan.group_arcs.push_back(out);
                plan.groups.emplace_back();
            }
            plan.groups[g].push_back(p);
        }
        if (plan.group_arcs.size() == 1) {
            plan.kind = SwitchPlan::Kind::single;
            continue;
        }
        // distinct in-arcs per group; functional iff no in-arc reaches two groups
        bool functional = true;
        std::size_t multi_in_groups = 0;
        std::set<std::pair<EdgeId, SwitchId>> seen_ins;
        for (const auto& group : plan.groups) {
            std::set<std::pair<EdgeId, SwitchId>> ins;
            for (std::size_t p : group) {
                const Arc& in = w.arcs[ring_detail::wrap0(static_cast<std::ptrdiff_t>(p) - 1, L)];
                ins.insert({in.edge, in.tail});
            }
            for (const auto& key : ins)
                if (!seen_ins.insert(key).second) functional = false;
            if (ins.size() >= 2) ++multi_in_groups;
        }
        plan.kind = (functional && multi_in_groups <= 1) ? SwitchPlan::Kind::in_port
                                                         : SwitchPlan::Kind::vlan;
    }

    // Per-position set_vlan bookkeeping; only once-visited switches may tag.
    std::vector<std::optional<VlanTag>> set_at(L);
    std::vector<std::pair<std::size_t, VlanTag>> constraints;  // position -> required tag
    std::vector<std::optional<VlanTag>> group_tag_of_pos(L);   // vlan-rule match per position
    VlanTag next_tag = opts.tag_base;
    bool need_fallback = false;

    auto states = [&] { return ring_detail::states_from_sets(set_at); };
    auto check_constraints = [&](const std::vector<std::optional<VlanTag>>& before) {
        for (auto [p, tag] : constraints)
            if (!before[p] || *before[p] != tag) return false;
        return true;
    };

    // vlan switches in first-position order
    std::vector<SwitchId> vlan_switches;
    for (auto& [sw, plan] : plans)
        if (plan.kind == SwitchPlan::Kind::vlan) vlan_switches.push_back(sw);
    std::sort(vlan_switches.begin(), vlan_switches.end(), [&](SwitchId a, SwitchId b) {
        return plans[a].positions.front() < plans[b].positions.front();
    });

    for (SwitchId sw : vlan_switches) {
        SwitchPlan& plan = plans[sw];
        auto before = states();

        // piggyback: carried tags already tell the groups apart
        bool piggyback = true;
        std::vector<std::optional<VlanTag>> group_states(plan.groups.size());
        for (std::size_t g = 0; g < plan.groups.size() && piggyback; ++g) {
            for (std::size_t p : plan.groups[g]) {
                if (!before[p]) {
                    piggyback = false;
                    break;
                }
                if (!group_states[g])
                    group_states[g] = before[p];
                else if (*group_states[g] != *before[p])
                    piggyback = false;
            }
        }
        if (piggyback) {
            std::set<VlanTag> distinct;
            for (const auto& gs : group_states)
                if (!gs || !distinct.insert(*gs).second) piggyback = false;
        }
        if (piggyback) {
            for (std::size_t g = 0; g < plan.groups.size(); ++g)
                for (std::size_t p : plan.groups[g]) {
                    constraints.push_back({p, *group_states[g]});
                    group_tag_of_pos[p] = *group_states[g];
                }
            continue;
        }

        // fresh tag per out-arc group, taggers found counter-clockwise
        std::vector<VlanTag> tags(plan.groups.size());
        for (std::size_t g = 0; g < plan.groups.size(); ++g) {
            tags[g] = ++next_tag;
            if (tags[g] > opts.tag_base + opts.max_tags)
                throw error("compile_walk: tag budget exceeded");
        }
        for (std::size_t g = 0; g < plan.groups.size() && !need_fallback; ++g) {
            for (std::size_t p : plan.groups[g]) {
                auto cur = states();
                if (cur[p] && *cur[p] == tags[g]) {  // carried over from an earlier tagger
                    constraints.push_back({p, tags[g]});
                    group_tag_of_pos[p] = tags[g];
                    continue;
                }
                bool placed = false;
                for (std::size_t back = 1; back < L && !placed; ++back) {
                    std::size_t r = ring_detail::wrap0(static_cast<std::ptrdiff_t>(p) - back, L);
                    SwitchId u = w.arcs[r].tail;
                    const SwitchPlan& uplan = plans[u];
                    if (uplan.positions.size() != 1) continue;
                    if (uplan.kind != SwitchPlan::Kind::single) continue;
                    if (set_at[r] && *set_at[r] != tags[g]) continue;
                    auto old = set_at[r];
                    set_at[r] = tags[g];
                    auto trial = states();
                    bool ok = trial[p] && *trial[p] == tags[g] && check_constraints(trial);
                    if (ok) {
                        constraints.push_back({p, tags[g]});
                        group_tag_of_pos[p] = tags[g];
                        placed = true;
                    } else {
                        set_at[r] = old;
                    }
                }
                if (!placed) {
                    need_fallback = true;
                    break;
                }
            }
        }
        if (need_fallback) break;
    }

    RuleSet rs;
    rs.kind = flow == FlowTag::A ? RuleSetKind::walk_cw : RuleSetKind::walk_ccw;
    rs.ring_length = L;

    if (!need_fallback) {
        for (auto& [sw, plan] : plans) {
            switch (plan.kind) {
                case SwitchPlan::Kind::single: {
                    Rule r;
                    r.sw = sw;
                    r.match.flow = flow;
                    std::size_t p = plan.positions.front();
                    if (set_at[p]) r.actions.push_back(Action::SetVlan(*set_at[p]));
                    r.actions.push_back(Action::Forward(plan.group_arcs.front()));
                    rs.rules.push_back(std::move(r));
                    break;
                }
                case SwitchPlan::Kind::in_port: {
                    // exact in-port rules first, the (single) multi-in group last
                    std::size_t wildcard_group = plan.groups.size();
                    for (std::size_t g = 0; g < plan.groups.size(); ++g) {
                        std::set<std::pair<EdgeId, SwitchId>> ins;
                        for (std::size_t p : plan.groups[g]) {
                            const Arc& in =
                                w.arcs[ring_detail::wrap0(static_cast<std::ptrdiff_t>(p) - 1, L)];
                            ins.insert({in.edge, in.tail});
                        }
                        if (ins.size() >= 2) {
                            wildcard_group = g;
                            continue;
                        }
                        Rule r;
                        r.sw = sw;
                        r.match.flow = flow;
                        r.match.in_port =
                            w.arcs[ring_detail::wrap0(
                                static_cast<std::ptrdiff_t>(plan.groups[g].front()) - 1, L)];
                        r.actions.push_back(Action::Forward(plan.group_arcs[g]));
                        rs.rules.push_back(std::move(r));
                    }
                    if (wildcard_group < plan.groups.size()) {
                        Rule r;
                        r.sw = sw;
                        r.match.flow = flow;
                        r.actions.push_back(Action::Forward(plan.group_arcs[wildcard_group]));
                        rs.rules.push_back(std::move(r));
                    }
                    break;
                }
                case SwitchPlan::Kind::vlan: {
                    for (std::size_t g = 0; g < plan.groups.size(); ++g) {
                        Rule r;
                        r.sw = sw;
                        r.match.flow = flow;
                        r.match.vlan = group_tag_of_pos[plan.groups[g].front()];
                        r.actions.push_back(Action::Forward(plan.group_arcs[g]));
                        rs.rules.push_back(std::move(r));
                    }
                    break;
                }
            }
        }
        rs.tags_used = next_tag - opts.tag_base;
        rs.entry_vlan = states();

        // defensive replay: every position must fire its own out-arc
        auto before = rs.entry_vlan;
        for (std::size_t p = 0; p < L && !need_fallback; ++p) {
            Header h;
            h.flow = flow;
            h.vlan = before[p];
            const Arc& in = w.arcs[ring_detail::wrap0(static_cast<std::ptrdiff_t>(p) - 1, L)];
            const Rule* hit = nullptr;
            for (const Rule& r : rs.rules) {
                if (r.sw != w.arcs[p].tail) continue;
                if (r.match.matches(h, in)) {
                    hit = &r;
                    break;
                }
            }
            if (!hit || !(hit->actions.back().out == w.arcs[p])) need_fallback = true;
        }
    }

    if (need_fallback) {
        // per-position tags: always correct, costs kappa extra rules
        rs.rules.clear();
        rs.entry_vlan.assign(L, std::nullopt);
        if (L > opts.max_tags) throw error("compile_walk: tag budget exceeded");
        std::vector<Rule> by_position(L);
        for (std::size_t p = 0; p < L; ++p) {
            VlanTag mine = opts.tag_base + static_cast<VlanTag>(p) + 1;
            VlanTag next = opts.tag_base + static_cast<VlanTag>((p + 1) % L) + 1;
            Rule r;
            r.sw = w.arcs[p].tail;
            r.match.flow = flow;
            r.match.vlan = mine;
            r.actions.push_back(Action::SetVlan(next));
            r.actions.push_back(Action::Forward(w.arcs[p]));
            by_position[p] = std::move(r);
            rs.entry_vlan[p] = mine;
        }
        for (auto& r : by_position) rs.rules.push_back(std::move(r));
        rs.tags_used = static_cast<VlanTag>(L);
        rs.fallback = true;
        rs.extra_rules = L - walk_metrics(w).unique_arcs;
    }
    return rs;
}

// One bounce rule per ring position: flip the flow, restore the VLAN context
// the reverse direction expects, and send the probe back out its in-port.
// Set 1 turns clockwise flow A around; set 2 turns counter-clockwise flow B.
// The match pins the position's arrival context (in-port + carried tag), so a
// probe crossing another ring occurrence of the same switch keeps going.
inline RuleSet compile_bounceback(const Topology& t, const Walk& w, int set,
                                  const RuleSet& cw_walk, const RuleSet& ccw_walk) {
    if (set != 1 && set != 2) throw error("compile_bounceback: set must be 1 or 2");
    if (!validate_walk(t, w)) throw error("compile_bounceback: invalid walk");
    const std::size_t L = w.arcs.size();

    RuleSet rs;
    rs.kind = set == 1 ? RuleSetKind::bounce_1 : RuleSetKind::bounce_2;
    rs.ring_length = L;

    for (RingPosition i = 1; i <= L; ++i) {
        Rule r;
        r.sw = w.position_switch(i);
        r.priority = kBouncePriority;
        r.match.bounce_target = i;
        r.match.bounce_set = static_cast<std::uint8_t>(set);
        if (set == 1) {
            r.match.flow = FlowTag::A;
            r.match.in_port = ring_detail::arc_into(w, i);
            r.match.vlan = cw_walk.entry_at(i);
            r.actions.push_back(Action::SetFlow(FlowTag::B));
            // context for the counter-clockwise rule at position i-1
            RingPosition prev = ring_detail::wrap1(static_cast<std::ptrdiff_t>(i) - 1, L);
            auto ccw_tag = ccw_walk.entry_at(ring_detail::ccw_position_at(prev, L));
            if (ccw_tag) r.actions.push_back(Action::SetVlan(*ccw_tag));
        } else {
            r.match.flow = FlowTag::B;
            r.match.in_port = reversed(ring_detail::arc_out_of(w, i));
            r.match.vlan = ccw_walk.entry_at(ring_detail::ccw_position_at(i, L));
            r.actions.push_back(Action::SetFlow(FlowTag::A));
            // context for the clockwise rule at position i+1
            RingPosition nxt = ring_detail::wrap1(static_cast<std::ptrdiff_t>(i) + 1, L);
            auto cw_tag = cw_walk.entry_at(nxt);
            if (cw_tag) r.actions.push_back(Action::SetVlan(*cw_tag));
        }
        r.actions.push_back(Action::SendBack());
        rs.rules.push_back(std::move(r));
    }
    return rs;
}

// Highest-priority catch for probes completing their path at the injection
// position: one logical loopback, two arrival contexts (a clockwise flow-A lap
// arriving over the arc into the position, and a bounce return arriving
// counter-clockwise over the reverse of the arc out of it).
inline RuleSet compile_loopback(const Topology& t, const Walk& w, RingPosition position,
                                ControllerId controller, const RuleSet& cw_walk,
                                const RuleSet& ccw_walk) {
    if (!validate_walk(t, w)) throw error("compile_loopback: invalid walk");
    if (position < 1 || position > w.arcs.size()) throw error("compile_loopback: bad position");
    const std::size_t L = w.arcs.size();

    RuleSet rs;
    rs.kind = RuleSetKind::loopback;
    rs.ring_length = L;

    Rule cw;
    cw.sw = w.position_switch(position);
    cw.priority = kLoopbackPriority;
    cw.match.flow = FlowTag::A;
    cw.match.controller = controller;
    cw.match.in_port = ring_detail::arc_into(w, position);
    cw.match.vlan = cw_walk.entry_at(position);
    cw.actions.push_back(Action::ToController(controller));
    rs.rules.push_back(std::move(cw));

    Rule ccw;
    ccw.sw = w.position_switch(position);
    ccw.priority = kLoopbackPriority;
    ccw.match.flow = FlowTag::B;
    ccw.match.controller = controller;
    ccw.match.in_port = reversed(ring_detail::arc_out_of(w, position));
    ccw.match.vlan = ccw_walk.entry_at(ring_detail::ccw_position_at(position, L));
    ccw.actions.push_back(Action::ToController(controller));
    rs.rules.push_back(std::move(ccw));
    return rs;
}

inline std::size_t total_static_rules(const std::vector<RuleSet>& sets) {
    std::size_t n = 0;
    for (const RuleSet& rs : sets) n += rs.rules.size();
    return n;
}

}  // namespace ringdiag
