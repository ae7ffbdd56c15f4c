#pragma once
// Exhaustive small-world schedule enumeration for the reliable-broadcast core.
//
// One broadcast instance, one equivocating origin, every correct process runs
// the real BrbEngine with an always-accepting validity gate. A schedule is a
// total order on deliveries to correct processes; the tree of schedules is
// walked depth-first from a rotating set of first choices until the budget is
// spent. Every drained schedule must satisfy agreement and totality, and with
// this geometry (n = 4, f = 1) must deliver exactly one of the two payloads
// everywhere.

#include <cstdint>
#include <deque>
#include <vector>

#include "bla/brb.hpp"
#include "bla/lattice.hpp"

namespace bla {

struct EnumConfig {
    int n = 4;
    int f = 1;
    uint64_t max_schedules = 20000;
};

struct EnumResult {
    uint64_t schedules = 0;  // drained schedules fully checked
    uint64_t nodes = 0;
    uint64_t delivered_a = 0;  // schedules ending in payload A everywhere
    uint64_t delivered_b = 0;
    uint64_t agreement_failures = 0;
    uint64_t totality_failures = 0;
    uint64_t deliver_twice = 0;
    uint64_t no_delivery = 0;
    std::size_t max_depth = 0;

    bool ok() const {
        return agreement_failures == 0 && totality_failures == 0 && deliver_twice == 0 &&
               no_delivery == 0 && delivered_a > 0 && delivered_b > 0;
    }
};

namespace detail_enum {

struct EnumOwner {
    std::vector<std::pair<Wire, PayloadPtr>> out;
    Valid brb_valid(const BrbPayload&) { return Valid::Yes; }
    uint64_t brb_digest(const BrbPayload& p) { return static_cast<uint64_t>(p.k2); }
    void brb_broadcast_out(Wire w, const PayloadPtr& p) { out.emplace_back(w, p); }
};

struct Event {
    Pid from = 0;
    Pid to = 0;
    Wire wire = Wire::Init;
    PayloadPtr p;
};

/// One replayed world: engines for the correct processes plus the growing
/// event log. Events keep their creation index forever so DFS paths stay
/// meaningful across replays.
class World {
public:
    World(const EnumConfig& cfg, const PayloadPtr& a, const PayloadPtr& b)
        : nc_(cfg.n - 1), byz_(cfg.n) {
        TreeParams params = TreeParams::make(cfg.n, cfg.f);
        owners_.resize(static_cast<std::size_t>(nc_) + 1);
        engines_.reserve(static_cast<std::size_t>(nc_) + 1);
        for (Pid p = 0; p <= nc_; ++p)
            engines_.emplace_back(&owners_[static_cast<std::size_t>(p)], cfg.n,
                                  params.echo_quorum(), params.ready_amplify(),
                                  params.ready_deliver(), 0);
        delivered_digest_.assign(static_cast<std::size_t>(nc_) + 1, 0);
        delivered_count_.assign(static_cast<std::size_t>(nc_) + 1, 0);
        // The equivocator's full arsenal is deliverable from the start: both
        // INIT halves plus unbacked ECHO and READY votes for each half.
        for (Wire w : {Wire::Init, Wire::Echo, Wire::Ready})
            for (const PayloadPtr& pl : {a, b})
                for (Pid to = 1; to <= nc_; ++to)
                    events_.push_back(Event{byz_, to, w, pl});
        consumed_.assign(events_.size(), 0);
    }

    std::size_t seed_events() const { return events_.size(); }

    void deliver(uint32_t id) {
        Event ev = events_[id];  // copy: events_ may reallocate below
        consumed_[id] = 1;
        auto ti = static_cast<std::size_t>(ev.to);
        BrbEngine<EnumOwner>& eng = engines_[ti];
        PayloadPtr d;
        switch (ev.wire) {
            case Wire::Init: d = eng.on_init(ev.from, ev.p); break;
            case Wire::Echo: d = eng.on_echo(ev.from, ev.p); break;
            case Wire::Ready: d = eng.on_ready(ev.from, ev.p); break;
            default: break;
        }
        if (d) {
            if (delivered_count_[ti]++ == 0) delivered_digest_[ti] = owners_[ti].brb_digest(*d);
        }
        auto emitted = std::move(owners_[ti].out);
        owners_[ti].out.clear();
        for (auto& [w, pl] : emitted)
            for (Pid to = 1; to <= nc_; ++to) {
                events_.push_back(Event{ev.to, to, w, pl});
                consumed_.push_back(0);
            }
    }

    std::vector<uint32_t> available() const {
        std::vector<uint32_t> ids;
        for (std::size_t i = 0; i < events_.size(); ++i)
            if (!consumed_[i]) ids.push_back(static_cast<uint32_t>(i));
        return ids;
    }

    void audit(EnumResult& res) const {
        int delivered = 0;
        uint64_t digest = 0;
        bool agree = true;
        for (Pid p = 1; p <= nc_; ++p) {
            auto pi = static_cast<std::size_t>(p);
            if (delivered_count_[pi] > 1) ++res.deliver_twice;
            if (delivered_count_[pi] == 0) continue;
            ++delivered;
            if (digest == 0)
                digest = delivered_digest_[pi];
            else if (digest != delivered_digest_[pi])
                agree = false;
        }
        if (!agree) ++res.agreement_failures;
        if (delivered == 0)
            ++res.no_delivery;
        else if (delivered < nc_)
            ++res.totality_failures;
        else if (agree)
            digest == 1 ? ++res.delivered_a : ++res.delivered_b;
    }

private:
    int nc_;
    Pid byz_;
    std::deque<EnumOwner> owners_;
    std::vector<BrbEngine<EnumOwner>> engines_;
    std::vector<Event> events_;
    std::vector<char> consumed_;
    std::vector<uint64_t> delivered_digest_;
    std::vector<int> delivered_count_;
};

class Explorer {
public:
    Explorer(const EnumConfig& cfg) : cfg_(cfg) {
        BrbPayload pa;
        pa.origin = static_cast<Pid>(cfg.n);
        pa.type = PayloadType::Input;
        pa.k2 = 1;
        pa.r = 0;
        a_ = std::make_shared<const BrbPayload>(std::move(pa));
        BrbPayload pb;
        pb.origin = static_cast<Pid>(cfg.n);
        pb.type = PayloadType::Input;
        pb.k2 = 2;
        pb.r = 0;
        b_ = std::make_shared<const BrbPayload>(std::move(pb));
    }

    EnumResult run() {
        World probe(cfg_, a_, b_);
        std::size_t roots = probe.seed_events();
        uint64_t per_root = cfg_.max_schedules / roots + 1;
        for (std::size_t root = 0; root < roots; ++root) {
            root_ = root;
            budget_ = std::min<uint64_t>(res_.schedules + per_root, cfg_.max_schedules);
            path_.clear();
            path_.push_back(static_cast<uint32_t>(root));
            dfs();
        }
        return res_;
    }

private:
    void dfs() {
        if (res_.schedules >= budget_) return;
        ++res_.nodes;
        World w(cfg_, a_, b_);
        for (uint32_t id : path_) w.deliver(id);
        auto avail = w.available();
        if (avail.empty()) {
            ++res_.schedules;
            if (path_.size() > res_.max_depth) res_.max_depth = path_.size();
            w.audit(res_);
            return;
        }
        // Rotate the branch order by depth and root so sibling subtrees do
        // not all share the same mid-schedule interleavings.
        std::size_t start = (path_.size() * 7 + root_) % avail.size();
        for (std::size_t k = 0; k < avail.size(); ++k) {
            if (res_.schedules >= budget_) return;
            path_.push_back(avail[(start + k) % avail.size()]);
            dfs();
            path_.pop_back();
        }
    }

    EnumConfig cfg_;
    PayloadPtr a_, b_;
    EnumResult res_;
    std::vector<uint32_t> path_;
    std::size_t root_ = 0;
    uint64_t budget_ = 0;
};

}  // namespace detail_enum

inline EnumResult enumerate_brb_schedules(const EnumConfig& cfg = {}) {
    return detail_enum::Explorer(cfg).run();
}

}  // namespace bla
