#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ringdiag/fabric.hpp"
#include "ringdiag/ring.hpp"

namespace ringdiag {

enum class Verdict : std::uint8_t { healthy, located };

inline const char* to_string(Verdict v) { return v == Verdict::healthy ? "healthy" : "located"; }

struct ProbeRecord {
    std::string kind;       // "verify" | "bounce"
    std::string direction;  // "cw" | "ccw"
    RingPosition from = 1;
    std::size_t offset = 0;  // ring length for verify laps
    std::optional<RingPosition> target;
    ProbeStatus status = ProbeStatus::delivered;
    std::size_t hops_actual = 0;
    std::size_t hops_charged = 0;
};

struct DiagnosisReport {
    Verdict verdict = Verdict::healthy;
    std::vector<Arc> located;  // ring arcs at the first blocked offset per search
    std::size_t messages = 0;
    std::size_t total_hops = 0;  // charged network load
    double latency_us = 0.0;     // wall model: parallel probes cost their round maximum
    std::string strategy;
    std::vector<ProbeRecord> probes;
};

struct DiagnoseOptions {
    double tau_us = 100.0;      // per-hop delay
    std::size_t m = 1;          // probes per round (parallel / bidirectional)
    bool check_reverse = false; // follow a clean clockwise verify with a reverse lap
};

// positions a control domain may inject at, with their fabrics built once
struct InjectionPlan {
    std::vector<RingPosition> points;
    std::vector<Fabric> fabrics;
};

inline InjectionPlan plan_injections(const RingView& ring, const ControlDomain& d) {
    InjectionPlan plan;
    plan.points = ring.injection_points(d);
    if (plan.points.empty()) throw error("no injection point in control domain");
    plan.fabrics.reserve(plan.points.size());
    for (RingPosition p : plan.points) plan.fabrics.push_back(ring.fabric_for(p));
    return plan;
}

namespace diag_detail {

// One injection position worth of probing; charges hops per the cost model
// (verify = L, bounce to offset o = 2o, lost or not) and tracks the wall
// clock separately so simultaneous probes cost their round maximum.
struct Session {
    const RingView& ring;
    const Fabric& fabric;
    const FailureState& fail;
    RingPosition from;
    DiagnosisReport& rep;
    std::size_t wall_hops = 0;

    bool send(ProbeRecord rec, const Arc& start, const Header& h) {
        ProbeOutcome out = fabric.inject(start, h, fail);
        rec.status = out.status;
        rec.hops_actual = out.hops;
        rep.probes.push_back(rec);
        rep.total_hops += rec.hops_charged;
        return out.delivered();
    }

    bool verify_cw() {
        const std::size_t L = ring.length();
        wall_hops += L;
        return send({"verify", "cw", from, L, {}, {}, 0, L}, ring.cw_start_arc(from),
                    ring.verify_header(from));
    }
    bool verify_ccw() {
        const std::size_t L = ring.length();
        wall_hops += L;
        return send({"verify", "ccw", from, L, {}, {}, 0, L}, ring.ccw_start_arc(from),
                    ring.ccw_lap_header(from));
    }
    // bounce at clockwise offset o from the injection position
    bool probe_cw(std::size_t o) {
        RingPosition t = ring.wrap(static_cast<std::ptrdiff_t>(from) + static_cast<std::ptrdiff_t>(o));
        return send({"bounce", "cw", from, o, t, {}, 0, 2 * o}, ring.cw_start_arc(from),
                    ring.cw_bounce_header(from, t));
    }
    // bounce at counter-clockwise offset j
    bool probe_ccw(std::size_t j) {
        RingPosition t = ring.wrap(static_cast<std::ptrdiff_t>(from) - static_cast<std::ptrdiff_t>(j));
        return send({"bounce", "ccw", from, j, t, {}, 0, 2 * j}, ring.ccw_start_arc(from),
                    ring.ccw_bounce_header(from, t));
    }

    // Does the first clockwise failure lie beyond offset o? Probed from
    // whichever direction is cheaper when both are allowed.
    struct Answer {
        bool beyond;
        std::size_t charged;
    };
    Answer beyond(std::size_t o, bool allow_ccw) {
        const std::size_t L = ring.length();
        if (allow_ccw && 2 * (L - o) < 2 * o) return {!probe_ccw(L - o), 2 * (L - o)};
        return {probe_cw(o), 2 * o};
    }

    // classic halving over (0, L]: first blocked offset of `delivered_at`
    std::size_t bisect(const std::function<bool(std::size_t)>& delivered_at) {
        std::size_t lo = 0, hi = ring.length();
        while (hi - lo > 1) {
            std::size_t mid = lo + (hi - lo) / 2;
            std::size_t charge = 2 * mid;
            wall_hops += charge;
            (delivered_at(mid) ? lo : hi) = mid;
        }
        return hi;
    }

    // m boundaries per round, each probe from the cheaper side when
    // bidirectional; wall clock pays the slowest probe of the round
    std::size_t bisect_rounds(std::size_t m, bool bidirectional) {
        std::size_t lo = 0, hi = ring.length();
        while (hi - lo > 1) {
            std::vector<std::size_t> targets;
            for (std::size_t t = 1; t <= m; ++t) {
                std::size_t o = lo + t * (hi - lo) / (m + 1);
                if (o > lo && o < hi && (targets.empty() || targets.back() != o))
                    targets.push_back(o);
            }
            if (targets.empty()) targets.push_back(lo + (hi - lo) / 2);
            std::size_t nlo = lo, nhi = hi, round_wall = 0;
            for (std::size_t o : targets) {
                Answer a = beyond(o, bidirectional);
                round_wall = std::max(round_wall, a.charged);
                (a.beyond ? nlo : nhi) = a.beyond ? std::max(nlo, o) : std::min(nhi, o);
            }
            wall_hops += round_wall;
            lo = nlo;
            hi = nhi;
        }
        return hi;
    }
};

inline Arc located_arc_cw(const RingView& ring, RingPosition from, std::size_t k) {
    return ring.out_arc(ring.wrap(static_cast<std::ptrdiff_t>(from) + static_cast<std::ptrdiff_t>(k) - 1));
}
inline Arc located_arc_ccw(const RingView& ring, RingPosition from, std::size_t j) {
    return ring.out_arc(ring.wrap(static_cast<std::ptrdiff_t>(from) - static_cast<std::ptrdiff_t>(j)));
}

inline void finish(DiagnosisReport& rep, double tau_us, std::size_t wall_hops) {
    rep.messages = rep.probes.size();
    rep.verdict = rep.located.empty() ? Verdict::healthy : Verdict::located;
    rep.latency_us = latency_us(wall_hops, tau_us);
}

}  // namespace diag_detail

// Verify lap then floor-bisection from the domain's first injection point.
inline DiagnosisReport diagnose_single(const RingView& ring, const InjectionPlan& plan,
                                       const FailureState& fail, const DiagnoseOptions& opts = {}) {
    DiagnosisReport rep;
    rep.strategy = "single";
    diag_detail::Session s{ring, plan.fabrics.front(), fail, plan.points.front(), rep};
    if (!s.verify_cw()) {
        std::size_t k = s.bisect([&](std::size_t o) { return s.probe_cw(o); });
        rep.located.push_back(diag_detail::located_arc_cw(ring, s.from, k));
    } else if (opts.check_reverse && !s.verify_ccw()) {
        std::size_t j = s.bisect([&](std::size_t o) { return s.probe_ccw(o); });
        rep.located.push_back(diag_detail::located_arc_ccw(ring, s.from, j));
    }
    diag_detail::finish(rep, opts.tau_us, s.wall_hops);
    return rep;
}

// m simultaneous bounce targets per round, all clockwise.
inline DiagnosisReport diagnose_parallel(const RingView& ring, const InjectionPlan& plan,
                                         const FailureState& fail,
                                         const DiagnoseOptions& opts = {}) {
    if (opts.m < 1) throw error("diagnose_parallel: m must be at least 1");
    DiagnosisReport rep;
    rep.strategy = "parallel";
    diag_detail::Session s{ring, plan.fabrics.front(), fail, plan.points.front(), rep};
    if (!s.verify_cw()) {
        std::size_t k = s.bisect_rounds(opts.m, false);
        rep.located.push_back(diag_detail::located_arc_cw(ring, s.from, k));
    } else if (opts.check_reverse && !s.verify_ccw()) {
        std::size_t j = s.bisect([&](std::size_t o) { return s.probe_ccw(o); });
        rep.located.push_back(diag_detail::located_arc_ccw(ring, s.from, j));
    }
    diag_detail::finish(rep, opts.tau_us, s.wall_hops);
    return rep;
}

// Like parallel, but each boundary is probed from whichever ring direction
// reaches it cheaper, halving the round trip for far offsets.
inline DiagnosisReport diagnose_bidirectional(const RingView& ring, const InjectionPlan& plan,
                                              const FailureState& fail,
                                              const DiagnoseOptions& opts = {}) {
    if (opts.m < 1) throw error("diagnose_bidirectional: m must be at least 1");
    DiagnosisReport rep;
    rep.strategy = "bidirectional";
    diag_detail::Session s{ring, plan.fabrics.front(), fail, plan.points.front(), rep};
    if (!s.verify_cw()) {
        std::size_t k = s.bisect_rounds(opts.m, true);
        rep.located.push_back(diag_detail::located_arc_cw(ring, s.from, k));
    } else if (opts.check_reverse && !s.verify_ccw()) {
        std::size_t j = s.bisect([&](std::size_t o) { return s.probe_ccw(o); });
        rep.located.push_back(diag_detail::located_arc_ccw(ring, s.from, j));
    }
    diag_detail::finish(rep, opts.tau_us, s.wall_hops);
    return rep;
}

// Every injection point searches both directions; each finds at most the
// nearest failure per direction, so at most 2 * beta distinct links total.
inline DiagnosisReport diagnose_multi(const RingView& ring, const InjectionPlan& plan,
                                      const FailureState& fail,
                                      const DiagnoseOptions& opts = {}) {
    DiagnosisReport rep;
    rep.strategy = "multi";
    std::size_t wall = 0;
    std::vector<Arc> found;
    for (std::size_t i = 0; i < plan.points.size(); ++i) {
        diag_detail::Session s{ring, plan.fabrics[i], fail, plan.points[i], rep};
        if (!s.verify_cw()) {
            std::size_t k = s.bisect([&](std::size_t o) { return s.probe_cw(o); });
            found.push_back(diag_detail::located_arc_cw(ring, s.from, k));
        }
        if (!s.verify_ccw()) {
            std::size_t j = s.bisect([&](std::size_t o) { return s.probe_ccw(o); });
            found.push_back(diag_detail::located_arc_ccw(ring, s.from, j));
        }
        wall += s.wall_hops;
    }
    for (const Arc& a : found) {
        bool seen = false;
        for (const Arc& b : rep.located) seen = seen || b.edge == a.edge;
        if (!seen) rep.located.push_back(a);
    }
    diag_detail::finish(rep, opts.tau_us, wall);
    return rep;
}

enum class Strategy : std::uint8_t { single, parallel, bidirectional, multi };

inline DiagnosisReport diagnose(const RingView& ring, const InjectionPlan& plan,
                                const FailureState& fail, Strategy strategy,
                                const DiagnoseOptions& opts = {}) {
    switch (strategy) {
        case Strategy::single: return diagnose_single(ring, plan, fail, opts);
        case Strategy::parallel: return diagnose_parallel(ring, plan, fail, opts);
        case Strategy::bidirectional: return diagnose_bidirectional(ring, plan, fail, opts);
        default: return diagnose_multi(ring, plan, fail, opts);
    }
}

inline DiagnosisReport diagnose(const RingView& ring, const ControlDomain& domain,
                                const FailureState& fail, Strategy strategy,
                                const DiagnoseOptions& opts = {}) {
    return diagnose(ring, plan_injections(ring, domain), fail, strategy, opts);
}

// smallest k with base^k >= x
inline std::size_t ceil_log(std::size_t base, std::size_t x) {
    if (base < 2) throw error("ceil_log: base must be at least 2");
    std::size_t k = 0;
    unsigned long long p = 1;
    while (p < x) {
        p *= base;
        ++k;
    }
    return k;
}

// Worst/best case message and latency guarantees for a ring of length L
// probed with m simultaneous probes per round.
struct CostBounds {
    std::size_t ring_length = 0;
    std::size_t kappa = 0;
    std::size_t m = 1;
    std::size_t rules_one_bounce = 0;  // 3 L - 2 kappa
    std::size_t rules_two_bounce = 0;  // 4 L - 2 kappa
    std::size_t rounds = 0;            // ceil(log_(m+1) L)
    std::size_t messages_worst = 0;    // 1 + m * rounds
    double latency_worst_us = 0.0;     // (L + 2 L rounds) tau
    double latency_bidirectional_us = 0.0;  // (L + L rounds) tau
    double latency_best_us = 0.0;      // (3 L - 2) tau, single bisection best case
    double latency_single_worst_us = 0.0;   // (L (2 ceil(log2 L) - 1) + 2) tau
};

inline CostBounds cost_bounds(std::size_t L, std::size_t m, double tau_us,
                              std::size_t kappa = 0) {
    if (L < 2 || m < 1) throw error("cost_bounds: need L >= 2 and m >= 1");
    if (2 * kappa > L) throw error("cost_bounds: kappa exceeds ring length");
    CostBounds b;
    b.ring_length = L;
    b.kappa = kappa;
    b.m = m;
    b.rules_one_bounce = 3 * L - 2 * kappa;
    b.rules_two_bounce = 4 * L - 2 * kappa;
    b.rounds = ceil_log(m + 1, L);
    b.messages_worst = 1 + m * b.rounds;
    double Ld = static_cast<double>(L);
    b.latency_worst_us = (Ld + 2.0 * Ld * static_cast<double>(b.rounds)) * tau_us;
    b.latency_bidirectional_us = (Ld + Ld * static_cast<double>(b.rounds)) * tau_us;
    b.latency_best_us = (3.0 * Ld - 2.0) * tau_us;
    b.latency_single_worst_us =
        (Ld * (2.0 * static_cast<double>(ceil_log(2, L)) - 1.0) + 2.0) * tau_us;
    return b;
}

}  // namespace ringdiag
