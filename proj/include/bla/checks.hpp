#pragma once
// Post-trial auditors.
//
// Every trial records a full event trace; these checkers replay it once and
// verify the protocol's safety arguments directly: broadcast agreement and
// totality, write-before-read ordering, acknowledgement justification, label
// tree geometry, set monotonicity, group height bounds, and the end-to-end
// lattice agreement contract on the outputs. A clean run must pass every
// check; the fault-injection harness relies on specific checks firing when a
// guard is disabled.
//
// Ordering is by event index, not timestamp: the trace is appended in causal
// order within each delivery step, so index comparison is exact.

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bla/lattice.hpp"
#include "bla/process.hpp"
#include "bla/simnet.hpp"
#include "bla/trace.hpp"
#include "bla/values.hpp"

namespace bla {

struct Violation {
    const char* check;
    std::string detail;
};

struct CheckReport {
    std::vector<Violation> violations;
    uint64_t checks_run = 0;

    bool ok() const { return violations.empty(); }

    void add(const char* check, std::string detail) {
        if (violations.size() < 64) violations.push_back({check, std::move(detail)});
    }
};

template <JoinLattice L>
struct TrialView {
    TreeParams params;
    Variant variant = Variant::Unauth;
    int t = 0;
    NetConfig net;
    const Trace* trace = nullptr;
    const ValueInterner<L>* interner = nullptr;
    std::function<typename L::Element(Pid)> input_of;
    std::vector<ProcessOutput<L>> outputs;  // [n+1]; faulty slots left default
    std::vector<int> rounds_exec;           // [n+1]
    std::vector<char> decided;              // [n+1]
    SimStats stats;

    bool is_correct(Pid p) const { return p >= 1 && p <= params.n - t; }
    int n_correct() const { return params.n - t; }
};

namespace detail {

inline std::string describe(Pid p, int r) {
    return "pid=" + std::to_string(p) + " r=" + std::to_string(r);
}

}  // namespace detail

template <JoinLattice L>
CheckReport check_trial(const TrialView<L>& view) {
    CheckReport rep;
    const TreeParams& P = view.params;
    const int n = P.n;
    const int Lr = P.rounds;
    const int echo_q = P.echo_quorum();

    // ---- liveness and resource accounting --------------------------------
    ++rep.checks_run;
    for (Pid p = 1; p <= view.n_correct(); ++p)
        if (!view.decided[static_cast<size_t>(p)])
            rep.add("termination", "undecided " + detail::describe(p, -1));
    if (!view.stats.drained) rep.add("termination", "queue not drained");
    if (view.stats.budget_exceeded) rep.add("termination", "delivery budget exceeded");
    if (view.net.model == DelayModel::Adversarial &&
        view.stats.max_deferral > static_cast<uint64_t>(view.net.fairness_D))
        rep.add("fairness", "max deferral " + std::to_string(view.stats.max_deferral) + " > D");

    ++rep.checks_run;
    for (Pid p = 1; p <= view.n_correct(); ++p)
        if (view.decided[static_cast<size_t>(p)] && view.rounds_exec[static_cast<size_t>(p)] != Lr)
            rep.add("round-count", detail::describe(p, view.rounds_exec[static_cast<size_t>(p)]) +
                                       " expected L=" + std::to_string(Lr));

    // ---- replay the trace -------------------------------------------------
    struct DigestInfo {
        ValueSet v;
        int label = 0;
        uint32_t echoers = 0;    // correct processes that decided to echo it
        uint32_t deliverers = 0; // correct processes that delivered it
    };
    struct Inst {
        std::map<uint64_t, DigestInfo> by_digest;
        uint32_t delivered_at = 0;  // correct processes with any delivery
    };
    auto inst_index = [&](Pid origin, Mt mt, int r) -> int {
        int type = mt == Mt::Input ? 0 : mt == Mt::Write ? 1 : 2;
        if (origin < 1 || origin > n || r < 0 || r > Lr) return -1;
        return (r * 3 + type) * (n + 1) + origin;
    };
    std::vector<Inst> insts(static_cast<size_t>((Lr + 1) * 3) * static_cast<size_t>(n + 1));

    struct PerRound {
        bool started = false;
        int label = 0;
        ValueSet V;
        bool classified = false;
        bool master = false;
        ValueSet T;
        bool done = false;
        bool done_master = false;
        ValueSet Vnext;
    };
    std::vector<std::vector<PerRound>> pr(static_cast<size_t>(n + 1),
                                          std::vector<PerRound>(static_cast<size_t>(Lr + 1)));
    std::vector<int> output_count(static_cast<size_t>(n + 1), 0);
    std::vector<int> output_label(static_cast<size_t>(n + 1), 0);
    std::vector<ValueSet> output_vs(static_cast<size_t>(n + 1));

    struct DeliverRec {
        std::size_t idx;
        Pid origin;
        Pid at;
        int r;
    };
    std::vector<DeliverRec> write_delivers, read_delivers;
    std::map<std::pair<Pid, int>, std::vector<std::pair<std::size_t, ValueSet>>> acv_incr;

    struct MasterSend {
        std::size_t idx;
        Pid from, to;
        int r, label;
        ValueSet T;
    };
    std::vector<MasterSend> master_sends;
    struct AckSend {
        std::size_t idx;
        Pid from, to;
        int r;
    };
    std::vector<AckSend> mack_sends, rack_sends;

    const auto& events = view.trace->events;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const TraceEvent& e = events[i];
        switch (e.kind) {
            case Ev::Send:
                if (e.wire == Wire::Master)
                    master_sends.push_back({i, e.from, e.to, e.round, e.label_x2, e.vs});
                else if (e.wire == Wire::Mack && view.is_correct(e.from))
                    mack_sends.push_back({i, e.from, e.to, e.round});
                else if (e.wire == Wire::Rack && view.is_correct(e.from))
                    rack_sends.push_back({i, e.from, e.to, e.round});
                break;
            case Ev::BrbDeliver: {
                int ii = inst_index(e.from, e.mt, e.round);
                if (ii < 0) break;
                Inst& inst = insts[static_cast<size_t>(ii)];
                auto& di = inst.by_digest[e.digest];
                di.v = e.vs;
                di.label = e.label_x2;
                Pid at = e.to;
                if (view.is_correct(at)) {
                    uint32_t bit = 1u << static_cast<uint32_t>(at);
                    if (di.deliverers & bit)
                        rep.add("brb-deliver-once",
                                "instance origin=" + std::to_string(e.from) + " r=" +
                                    std::to_string(e.round) + " delivered twice at " +
                                    std::to_string(at));
                    di.deliverers |= bit;
                    inst.delivered_at |= bit;
                    if (e.mt == Mt::Write) {
                        write_delivers.push_back({i, e.from, at, e.round});
                        acv_incr[{at, e.label_x2}].push_back({i, e.vs});
                    }
                    if (e.mt == Mt::Read) read_delivers.push_back({i, e.from, at, e.round});
                }
                break;
            }
            case Ev::WriteStart: {
                if (!view.is_correct(e.from) || e.round < 1 || e.round > Lr) break;
                PerRound& r = pr[static_cast<size_t>(e.from)][static_cast<size_t>(e.round)];
                r.started = true;
                r.label = e.label_x2;
                r.V = e.vs;
                break;
            }
            case Ev::Classified: {
                if (!view.is_correct(e.from) || e.round < 1 || e.round > Lr) break;
                PerRound& r = pr[static_cast<size_t>(e.from)][static_cast<size_t>(e.round)];
                r.classified = true;
                r.master = e.mt == Mt::ClassMaster;
                r.T = e.vs;
                break;
            }
            case Ev::RoundDone: {
                if (!view.is_correct(e.from) || e.round < 1 || e.round > Lr) break;
                PerRound& r = pr[static_cast<size_t>(e.from)][static_cast<size_t>(e.round)];
                r.done = true;
                r.done_master = e.mt == Mt::ClassMaster;
                r.Vnext = e.vs;
                break;
            }
            case Ev::Output: {
                if (!view.is_correct(e.from)) break;
                output_count[static_cast<size_t>(e.from)]++;
                output_label[static_cast<size_t>(e.from)] = e.label_x2;
                output_vs[static_cast<size_t>(e.from)] = e.vs;
                break;
            }
            default:
                break;
        }
    }

    // Echo decisions, bucketed by digest in a second cheap pass (the digest
    // identifies the payload and thus the instance).
    std::map<uint64_t, uint32_t> echoers_by_digest;
    for (const TraceEvent& e : events)
        if (e.kind == Ev::BrbEcho && view.is_correct(e.from))
            echoers_by_digest[e.digest] |= 1u << static_cast<uint32_t>(e.from);

    const bool clean_finish = view.stats.drained && !view.stats.budget_exceeded;

    // ---- broadcast layer --------------------------------------------------
    ++rep.checks_run;
    for (std::size_t ii = 0; ii < insts.size(); ++ii) {
        const Inst& inst = insts[ii];
        if (inst.by_digest.empty()) continue;
        uint32_t seen_digests = 0;
        uint32_t all_deliverers = 0;
        for (const auto& [dg, di] : inst.by_digest) {
            if (di.deliverers == 0) continue;
            ++seen_digests;
            all_deliverers |= di.deliverers;
            int echo_count = __builtin_popcount(echoers_by_digest[dg]);
            if (echo_count < echo_q - P.f)
                rep.add("brb-echo-backing", "digest " + to_hex(dg) + " delivered with only " +
                                                std::to_string(echo_count) + " correct echoes");
        }
        if (seen_digests > 1)
            rep.add("brb-agreement", "instance " + std::to_string(ii) +
                                         " delivered " + std::to_string(seen_digests) +
                                         " distinct payloads");
        if (clean_finish && all_deliverers != 0 &&
            __builtin_popcount(all_deliverers) != view.n_correct())
            rep.add("brb-totality", "instance " + std::to_string(ii) + " delivered at " +
                                        std::to_string(__builtin_popcount(all_deliverers)) + "/" +
                                        std::to_string(view.n_correct()));
    }

    // ---- write-before-read ordering --------------------------------------
    ++rep.checks_run;
    if (view.variant == Variant::Unauth) {
        for (const DeliverRec& rd : read_delivers) {
            uint32_t writers = 0;
            for (const DeliverRec& wd : write_delivers)
                if (wd.origin == rd.origin && wd.r == rd.r && wd.idx < rd.idx)
                    writers |= 1u << static_cast<uint32_t>(wd.at);
            if (__builtin_popcount(writers) < echo_q - P.f)
                rep.add("write-before-read",
                        "read of origin=" + std::to_string(rd.origin) + " r=" +
                            std::to_string(rd.r) + " delivered after only " +
                            std::to_string(__builtin_popcount(writers)) + " write deliveries");
        }
    } else {
        for (const AckSend& rs : rack_sends) {
            uint32_t writers = 0;
            for (const DeliverRec& wd : write_delivers)
                if (wd.r == rs.r && wd.idx < rs.idx) writers |= 1u << static_cast<uint32_t>(wd.at);
            if (__builtin_popcount(writers) < n - 2 * P.f)
                rep.add("write-before-read",
                        "rack from " + std::to_string(rs.from) + " r=" + std::to_string(rs.r) +
                            " sent after only " + std::to_string(__builtin_popcount(writers)) +
                            " processes saw a write");
        }
    }

    // ---- acknowledgement justification ------------------------------------
    ++rep.checks_run;
    {
        auto acv_at = [&](Pid p, int label, std::size_t before) {
            ValueSet u;
            auto it = acv_incr.find({p, label});
            if (it != acv_incr.end())
                for (const auto& [idx, vs] : it->second)
                    if (idx < before) u |= vs;
            return u;
        };
        for (const AckSend& ms : mack_sends) {
            bool justified = false;
            bool found = false;
            for (const MasterSend& m : master_sends) {
                if (m.from != ms.to || m.to != ms.from || m.r != ms.r || m.idx >= ms.idx) continue;
                found = true;
                if (subset(m.T, acv_at(ms.from, m.label, ms.idx))) {
                    justified = true;
                    break;
                }
            }
            if (found && !justified)
                rep.add("mack-justification",
                        "mack " + std::to_string(ms.from) + "->" + std::to_string(ms.to) + " r=" +
                            std::to_string(ms.r) + " answers an unjustified announcement");
        }
    }

    // ---- slave write continuity -------------------------------------------
    ++rep.checks_run;
    if (Lr >= 2) {
        for (int r = 2; r <= Lr; ++r) {
            for (Pid o = 1; o <= n; ++o) {
                int cur_i = inst_index(o, Mt::Write, r);
                int prev_i = inst_index(o, Mt::Write, r - 1);
                if (cur_i < 0 || prev_i < 0) continue;
                const Inst& cur = insts[static_cast<size_t>(cur_i)];
                const Inst& prev = insts[static_cast<size_t>(prev_i)];
                if (cur.delivered_at == 0 || prev.delivered_at == 0) continue;
                const DigestInfo *cd = nullptr, *pd = nullptr;
                for (const auto& [dg, di] : cur.by_digest)
                    if (di.deliverers) cd = &di;
                for (const auto& [dg, di] : prev.by_digest)
                    if (di.deliverers) pd = &di;
                if (!cd || !pd) continue;
                if (cd->label == pd->label - child_delta_x2(P, r - 1) && !(cd->v == pd->v))
                    rep.add("slave-continuity",
                            "origin=" + std::to_string(o) + " r=" + std::to_string(r) +
                                " slave-labelled write changed its value set");
            }
        }
    }

    // ---- per-process round structure --------------------------------------
    ++rep.checks_run;
    for (Pid p = 1; p <= view.n_correct(); ++p) {
        if (!view.decided[static_cast<size_t>(p)]) continue;
        int expect_label = initial_label(P).numerator_x2;
        ValueSet prev_v;
        bool have_prev = false;
        for (int r = 1; r <= Lr; ++r) {
            const PerRound& R = pr[static_cast<size_t>(p)][static_cast<size_t>(r)];
            if (!R.started || !R.classified || !R.done) {
                rep.add("round-structure", detail::describe(p, r) + " incomplete");
                continue;
            }
            if (R.label != expect_label)
                rep.add("label-path", detail::describe(p, r) + " label " + std::to_string(R.label) +
                                          " expected " + std::to_string(expect_label));
            int d = P.f_pow >> (r - 1);
            int h2 = 2 * static_cast<int>(R.V.count());
            if (h2 < R.label - d || h2 > R.label + d)
                rep.add("window", detail::describe(p, r) + " 2|V|=" + std::to_string(h2) +
                                      " outside [" + std::to_string(R.label - d) + "," +
                                      std::to_string(R.label + d) + "]");
            if (have_prev && !subset(prev_v, R.V))
                rep.add("monotone-V", detail::describe(p, r) + " lost values");
            int t2 = 2 * static_cast<int>(R.T.count());
            if (R.master && t2 <= R.label)
                rep.add("classify-master", detail::describe(p, r) + " 2|T|=" + std::to_string(t2) +
                                               " not above " + std::to_string(R.label));
            if (!R.master) {
                if (t2 > R.label)
                    rep.add("classify-slave", detail::describe(p, r) + " 2|T|=" +
                                                  std::to_string(t2) + " above " +
                                                  std::to_string(R.label));
                if (!(R.Vnext == R.V))
                    rep.add("classify-slave", detail::describe(p, r) + " slave changed its set");
            } else {
                if (2 * static_cast<int>(R.Vnext.count()) <= R.label)
                    rep.add("classify-master",
                            detail::describe(p, r) + " master result not above label");
                if (!subset(R.V, R.Vnext))
                    rep.add("monotone-V", detail::describe(p, r) + " master result lost values");
            }
            if (!view.interner->origins_unique(R.V) || !view.interner->origins_unique(R.Vnext))
                rep.add("origin-uniqueness", detail::describe(p, r));
            expect_label += R.done_master ? (P.f_pow >> r) : -(P.f_pow >> r);
            prev_v = R.Vnext;
            have_prev = true;
        }
        if (output_count[static_cast<size_t>(p)] != 1)
            rep.add("output-once", detail::describe(p, -1) + " outputs=" +
                                       std::to_string(output_count[static_cast<size_t>(p)]));
        else if (output_label[static_cast<size_t>(p)] != expect_label)
            rep.add("label-path", detail::describe(p, -1) + " final label " +
                                      std::to_string(output_label[static_cast<size_t>(p)]) +
                                      " expected " + std::to_string(expect_label));
    }

    // ---- group geometry ----------------------------------------------------
    ++rep.checks_run;
    for (int r = 1; r <= Lr; ++r) {
        std::map<int, std::vector<Pid>> groups;
        for (Pid p = 1; p <= view.n_correct(); ++p) {
            const PerRound& R = pr[static_cast<size_t>(p)][static_cast<size_t>(r)];
            if (R.started) groups[R.label].push_back(p);
        }
        int d = P.f_pow >> (r - 1);
        for (const auto& [k, members] : groups) {
            ValueSet all, slave_u;
            bool any_slave = false;
            for (Pid p : members) {
                const PerRound& R = pr[static_cast<size_t>(p)][static_cast<size_t>(r)];
                all |= R.V;
                if (R.done && !R.done_master) {
                    slave_u |= R.Vnext;
                    any_slave = true;
                }
            }
            if (2 * static_cast<int>(all.count()) > k + d)
                rep.add("group-height", "k=" + std::to_string(k) + " r=" + std::to_string(r) +
                                            " union 2|U|=" +
                                            std::to_string(2 * all.count()) + " above " +
                                            std::to_string(k + d));
            if (any_slave) {
                if (2 * static_cast<int>(slave_u.count()) > k)
                    rep.add("slave-union-height",
                            "k=" + std::to_string(k) + " r=" + std::to_string(r));
                for (Pid p : members) {
                    const PerRound& R = pr[static_cast<size_t>(p)][static_cast<size_t>(r)];
                    if (R.done && R.done_master && !subset(slave_u, R.Vnext))
                        rep.add("slave-union-in-master",
                                "k=" + std::to_string(k) + " r=" + std::to_string(r) + " master " +
                                    std::to_string(p) + " misses slave values");
                }
            }
        }
    }

    // ---- output contract ---------------------------------------------------
    ++rep.checks_run;
    {
        std::vector<Pid> deciders;
        for (Pid p = 1; p <= view.n_correct(); ++p)
            if (view.decided[static_cast<size_t>(p)]) deciders.push_back(p);
        for (Pid p : deciders) {
            const auto& out = view.outputs[static_cast<size_t>(p)];
            if (!L::leq(view.input_of(p), out.y))
                rep.add("downward-validity", detail::describe(p, -1));
            if (!view.interner->origins_unique(out.value_set))
                rep.add("origin-uniqueness", "output of pid=" + std::to_string(p));
        }
        for (std::size_t a = 0; a < deciders.size(); ++a)
            for (std::size_t b = a + 1; b < deciders.size(); ++b) {
                const auto& ya = view.outputs[static_cast<size_t>(deciders[a])].y;
                const auto& yb = view.outputs[static_cast<size_t>(deciders[b])].y;
                if (!L::leq(ya, yb) && !L::leq(yb, ya))
                    rep.add("comparability", "pids " + std::to_string(deciders[a]) + "," +
                                                 std::to_string(deciders[b]));
            }
        // Upward validity: everything in any output traces back to a correct
        // input or to at most one value per faulty origin.
        ValueSet u;
        for (Pid p : deciders) u |= view.outputs[static_cast<size_t>(p)].value_set;
        std::map<Pid, std::set<Vid>> by_origin;
        u.for_each([&](std::size_t id) {
            by_origin[view.interner->at(static_cast<Vid>(id)).origin].insert(static_cast<Vid>(id));
        });
        for (const auto& [origin, ids] : by_origin) {
            if (view.is_correct(origin)) {
                for (Vid id : ids) {
                    const auto& tv = view.interner->at(id);
                    if (!(tv.element == view.input_of(origin)))
                        rep.add("upward-validity", "output holds a value origin=" +
                                                       std::to_string(origin) +
                                                       " never proposed");
                }
            } else if (ids.size() > 1) {
                rep.add("upward-validity", "faulty origin=" + std::to_string(origin) +
                                               " contributed " + std::to_string(ids.size()) +
                                               " values");
            }
        }
        // Same final label, same decided set.
        std::map<int, std::pair<Pid, uint64_t>> label_digest;
        for (Pid p : deciders) {
            const auto& out = view.outputs[static_cast<size_t>(p)];
            auto [it, inserted] =
                label_digest.try_emplace(out.final_label_x2, p, out.set_digest);
            if (!inserted && it->second.second != out.set_digest)
                rep.add("label-agreement", "pids " + std::to_string(it->second.first) + "," +
                                               std::to_string(p) + " share label " +
                                               std::to_string(out.final_label_x2) +
                                               " with different sets");
        }
    }

    // ---- message complexity ------------------------------------------------
    ++rep.checks_run;
    {
        uint64_t nn = static_cast<uint64_t>(n);
        uint64_t bound = 16 * nn * nn * nn * static_cast<uint64_t>(Lr + 1);
        if (view.stats.sent_correct > bound)
            rep.add("message-bound", std::to_string(view.stats.sent_correct) + " > " +
                                         std::to_string(bound));
    }

    return rep;
}

}  // namespace bla
