#pragma once

#include <array>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ringdiag/diagnosis.hpp"
#include "ringdiag/fabric.hpp"
#include "ringdiag/rules.hpp"
#include "ringdiag/topology.hpp"
#include "ringdiag/walk.hpp"

namespace ringdiag {

using Json = nlohmann::ordered_json;

inline Json topology_summary_json(const Topology& t) {
    Json j;
    j["name"] = t.name;
    j["num_switches"] = t.num_switches();
    j["num_edges"] = t.num_edges();
    j["num_bridges"] = find_bridges(t).size();
    j["lower_bound"] = rule_lower_bound(t);
    return j;
}

inline Json arc_json(const Arc& a) {
    Json j;
    j["edge_id"] = a.edge;
    j["tail"] = a.tail;
    j["head"] = a.head;
    return j;
}

inline Json walk_json(const Walk& w) {
    WalkMetrics m = walk_metrics(w);
    Json j;
    j["start"] = w.start;
    j["arcs"] = Json::array();
    for (const Arc& a : w.arcs) j["arcs"].push_back(arc_json(a));
    j["metrics"] = Json{{"L", m.length}, {"kappa", m.kappa}, {"rule_cost", m.rule_cost}};
    return j;
}

inline const char* to_string(FlowTag f) { return f == FlowTag::A ? "A" : "B"; }

inline const char* to_string(RuleSetKind k) {
    switch (k) {
        case RuleSetKind::walk_cw: return "walk_cw";
        case RuleSetKind::walk_ccw: return "walk_ccw";
        case RuleSetKind::bounce_1: return "bounce_1";
        case RuleSetKind::bounce_2: return "bounce_2";
        default: return "loopback";
    }
}

inline Json match_json(const Match& m) {
    Json j = Json::object();
    if (m.flow) j["flow"] = to_string(*m.flow);
    if (m.bounce_target) j["bounce_target"] = *m.bounce_target;
    if (m.bounce_set) j["bounce_set"] = *m.bounce_set;
    if (m.vlan) j["vlan"] = *m.vlan;
    if (m.controller) j["controller"] = *m.controller;
    if (m.in_port) j["in_port"] = arc_json(*m.in_port);
    return j;
}

inline Json action_json(const Action& a) {
    Json j;
    switch (a.kind) {
        case Action::Kind::set_vlan:
            j["type"] = "set_vlan";
            j["vlan"] = a.vlan;
            break;
        case Action::Kind::set_flow:
            j["type"] = "set_flow";
            j["flow"] = to_string(a.flow);
            break;
        case Action::Kind::dec_ttl: j["type"] = "dec_ttl"; break;
        case Action::Kind::forward:
            j["type"] = "forward";
            j["out"] = arc_json(a.out);
            break;
        case Action::Kind::send_back_in_port: j["type"] = "send_back_in_port"; break;
        case Action::Kind::to_controller:
            j["type"] = "to_controller";
            j["controller"] = a.controller;
            break;
    }
    return j;
}

inline Json rule_json(const Rule& r) {
    Json j;
    j["switch"] = r.sw;
    j["priority"] = r.priority;
    j["match"] = match_json(r.match);
    j["actions"] = Json::array();
    for (const Action& a : r.actions) j["actions"].push_back(action_json(a));
    return j;
}

inline Json ruleset_json(const RuleSet& rs) {
    Json j;
    j["kind"] = to_string(rs.kind);
    j["ring_length"] = rs.ring_length;
    j["tags_used"] = rs.tags_used;
    j["fallback"] = rs.fallback;
    j["extra_rules"] = rs.extra_rules;
    j["rules"] = Json::array();
    for (const Rule& r : rs.rules) j["rules"].push_back(rule_json(r));
    return j;
}

inline Json rulesets_json(const std::vector<RuleSet>& sets) {
    Json j = Json::array();
    for (const RuleSet& rs : sets) j.push_back(ruleset_json(rs));
    return j;
}

namespace serialize_detail {

inline std::string arc_text(const Topology& t, const Arc& a) {
    return t.label(a.tail) + "->" + t.label(a.head) + " (e" + std::to_string(a.edge) + ")";
}

inline std::string match_text(const Topology& t, const Match& m) {
    std::vector<std::string> parts;
    if (m.flow) parts.push_back(std::string("flow=") + to_string(*m.flow));
    if (m.bounce_target) parts.push_back("target=v" + std::to_string(*m.bounce_target));
    if (m.bounce_set) parts.push_back("set=" + std::to_string(*m.bounce_set));
    if (m.vlan) parts.push_back("vlan=" + std::to_string(*m.vlan));
    if (m.controller) parts.push_back("ctrl=" + std::to_string(*m.controller));
    if (m.in_port) parts.push_back("in=" + arc_text(t, *m.in_port));
    if (parts.empty()) return "*";
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? ", " : "") + parts[i];
    return s;
}

inline std::string actions_text(const Topology& t, const std::vector<Action>& acts) {
    std::string s;
    for (std::size_t i = 0; i < acts.size(); ++i) {
        const Action& a = acts[i];
        if (i) s += "; ";
        switch (a.kind) {
            case Action::Kind::set_vlan: s += "set_vlan " + std::to_string(a.vlan); break;
            case Action::Kind::set_flow: s += std::string("set_flow ") + to_string(a.flow); break;
            case Action::Kind::dec_ttl: s += "dec_ttl"; break;
            case Action::Kind::forward: s += "forward " + arc_text(t, a.out); break;
            case Action::Kind::send_back_in_port: s += "send_back_in_port"; break;
            case Action::Kind::to_controller:
                s += "to_controller " + std::to_string(a.controller);
                break;
        }
    }
    return s;
}

}  // namespace serialize_detail

// Text table in the style of a flow-table listing: one block per rule set,
// one row per rule.
inline std::string render_rule_table(const Topology& t, const std::vector<RuleSet>& sets) {
    std::ostringstream out;
    for (const RuleSet& rs : sets) {
        out << "== " << to_string(rs.kind) << " (" << rs.rules.size() << " rules";
        if (rs.fallback) out << ", fallback +" << rs.extra_rules;
        out << ") ==\n";
        std::vector<std::array<std::string, 4>> rows;
        rows.push_back({"switch", "prio", "match", "actions"});
        for (const Rule& r : rs.rules)
            rows.push_back({t.label(r.sw), std::to_string(r.priority),
                            serialize_detail::match_text(t, r.match),
                            serialize_detail::actions_text(t, r.actions)});
        std::array<std::size_t, 4> width{};
        for (const auto& row : rows)
            for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < 4; ++c)
                out << std::left << std::setw(static_cast<int>(width[c]) + 2) << row[c];
            out << "\n";
        }
        out << "\n";
    }
    return out.str();
}

inline Json probe_json(const ProbeRecord& p) {
    Json j;
    j["target"] = p.target ? Json(*p.target) : Json(nullptr);
    j["returned"] = p.status == ProbeStatus::delivered;
    j["kind"] = p.kind;
    j["direction"] = p.direction;
    j["offset"] = p.offset;
    j["hops_charged"] = p.hops_charged;
    j["status"] = to_string(p.status);
    return j;
}

inline Json report_json(const DiagnosisReport& rep) {
    Json j;
    j["verdict"] = to_string(rep.verdict);
    j["located"] = Json::array();
    for (const Arc& a : rep.located) j["located"].push_back(a.edge);
    j["messages"] = rep.messages;
    j["total_hops"] = rep.total_hops;
    j["latency_us"] = rep.latency_us;
    j["strategy"] = rep.strategy;
    j["probes"] = Json::array();
    for (const ProbeRecord& p : rep.probes) j["probes"].push_back(probe_json(p));
    j["located_arcs"] = Json::array();
    for (const Arc& a : rep.located) j["located_arcs"].push_back(arc_json(a));
    return j;
}

// one line per packet event, for --verbose debugging
inline std::string trace_jsonl(const ProbeOutcome& out) {
    std::ostringstream os;
    for (const TraceEvent& ev : out.trace) {
        Json j;
        switch (ev.kind) {
            case TraceEvent::Kind::traverse: j["event"] = "traverse"; break;
            case TraceEvent::Kind::link_failed: j["event"] = "link_failed"; break;
            case TraceEvent::Kind::rule_fired: j["event"] = "rule_fired"; break;
            case TraceEvent::Kind::no_match: j["event"] = "no_match"; break;
            case TraceEvent::Kind::controller: j["event"] = "controller"; break;
        }
        j["hop"] = ev.hop;
        if (ev.arc) {
            j["edge_id"] = ev.arc->edge;
            j["tail"] = ev.arc->tail;
            j["head"] = ev.arc->head;
        }
        if (ev.sw) j["switch"] = *ev.sw;
        if (ev.rule_index) j["rule"] = *ev.rule_index;
        os << j.dump() << "\n";
    }
    return os.str();
}

}  // namespace ringdiag
