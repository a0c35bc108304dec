#pragma once

#include <utility>
#include <vector>

#include "ringdiag/fabric.hpp"
#include "ringdiag/rules.hpp"
#include "ringdiag/topology.hpp"
#include "ringdiag/walk.hpp"

namespace ringdiag {

// A closed covering walk compiled into a probe-ready logical ring: clockwise
// and counter-clockwise walk rules plus both bounce-back sets. Loopback rules
// depend on the injection position and are added per fabric.
struct RingView {
    const Topology* topo = nullptr;
    ControllerId controller = 0;
    Walk cw;
    Walk ccw;  // reverse of cw, starting at the same switch
    RuleSet cw_rules;
    RuleSet ccw_rules;
    RuleSet bounce1;
    RuleSet bounce2;

    std::size_t length() const { return cw.arcs.size(); }
    SwitchId switch_at(RingPosition i) const { return cw.position_switch(i); }
    RingPosition wrap(std::ptrdiff_t pos) const { return ring_detail::wrap1(pos, length()); }

    const Arc& out_arc(RingPosition i) const { return ring_detail::arc_out_of(cw, i); }
    const Arc& in_arc(RingPosition i) const { return ring_detail::arc_into(cw, i); }

    // position of the reverse walk whose rule serves counter-clockwise travel
    // away from clockwise position i
    RingPosition ccw_rule_position(RingPosition i) const {
        return ring_detail::ccw_position_at(i, length());
    }

    // arrival context (port, carried tag) of a packet sitting at position i
    std::pair<Arc, std::optional<VlanTag>> cw_context(RingPosition i) const {
        return {in_arc(i), cw_rules.entry_at(i)};
    }
    std::pair<Arc, std::optional<VlanTag>> ccw_context(RingPosition i) const {
        return {reversed(out_arc(i)), ccw_rules.entry_at(ccw_rule_position(i))};
    }

    // A position is unambiguous when no other ring occurrence of its switch
    // shares an arrival context; bounce and loopback matches are then unique.
    bool position_unambiguous(RingPosition i) const {
        for (RingPosition j = 1; j <= length(); ++j) {
            if (j == i || switch_at(j) != switch_at(i)) continue;
            if (cw_context(j) == cw_context(i)) return false;
            if (ccw_context(j) == ccw_context(i)) return false;
        }
        return true;
    }

    // every offset can serve as a bounce target, so bisection is exact
    bool fully_searchable() const {
        for (RingPosition i = 1; i <= length(); ++i)
            if (!position_unambiguous(i)) return false;
        return true;
    }

    std::vector<RingPosition> injection_points(const ControlDomain& d) const {
        std::vector<RingPosition> pts;
        for (RingPosition i = 1; i <= length(); ++i) {
            if (!d.contains(switch_at(i))) continue;
            if (position_unambiguous(i)) pts.push_back(i);
        }
        return pts;
    }

    std::size_t beta(const ControlDomain& d) const { return injection_points(d).size(); }

    std::vector<RuleSet> static_rule_sets(bool with_second_bounce = true) const {
        std::vector<RuleSet> sets{cw_rules, ccw_rules, bounce1};
        if (with_second_bounce) sets.push_back(bounce2);
        return sets;
    }

    Fabric fabric_for(RingPosition inject) const {
        auto sets = static_rule_sets();
        sets.push_back(compile_loopback(*topo, cw, inject, controller, cw_rules, ccw_rules));
        return build_fabric(*topo, sets);
    }

    // probe construction: packets are emitted directly onto the first arc, so
    // the header carries the tag the next rule on the ring expects
    Arc cw_start_arc(RingPosition i) const { return out_arc(i); }
    Arc ccw_start_arc(RingPosition i) const { return reversed(in_arc(i)); }

    Header verify_header(RingPosition i) const {
        Header h;
        h.flow = FlowTag::A;
        h.controller = controller;
        h.vlan = cw_rules.entry_at(wrap(static_cast<std::ptrdiff_t>(i) + 1));
        return h;
    }
    Header ccw_lap_header(RingPosition i) const {
        Header h;
        h.flow = FlowTag::B;
        h.controller = controller;
        h.vlan = ccw_rules.entry_at(wrap(static_cast<std::ptrdiff_t>(ccw_rule_position(i)) + 1));
        return h;
    }
    Header cw_bounce_header(RingPosition i, RingPosition target) const {
        Header h = verify_header(i);
        h.bounce_target = target;
        h.bounce_set = 1;
        return h;
    }
    Header ccw_bounce_header(RingPosition i, RingPosition target) const {
        Header h = ccw_lap_header(i);
        h.bounce_target = target;
        h.bounce_set = 2;
        return h;
    }
};

inline RingView make_ring(const Topology& t, const Walk& walk, ControllerId controller = 0,
                          const CompileOptions& opts = {}) {
    if (!validate_walk(t, walk)) throw error("make_ring: invalid walk");
    RingView r;
    r.topo = &t;
    r.controller = controller;
    r.cw = walk;
    r.ccw = reverse_walk(walk);
    r.cw_rules = compile_walk(t, r.cw, FlowTag::A, opts);
    CompileOptions ccw_opts = opts;
    ccw_opts.tag_base = opts.tag_base + r.cw_rules.tags_used;
    r.ccw_rules = compile_walk(t, r.ccw, FlowTag::B, ccw_opts);
    r.bounce1 = compile_bounceback(t, r.cw, 1, r.cw_rules, r.ccw_rules);
    r.bounce2 = compile_bounceback(t, r.cw, 2, r.cw_rules, r.ccw_rules);
    return r;
}

}  // namespace ringdiag
