#pragma once
// Deterministic single-threaded network simulator.
//
// Virtual time is the count of deliveries to correct processes. Two delivery
// disciplines are provided:
//
//  * Uniform: every message gets a bounded random delay drawn from the trial
//    seed; the queue is ordered by (due time, sequence).
//  * Adversarial: a seeded scheduler reorders messages at will under one
//    fairness constraint: a message it has passed over for D consecutive
//    picks is force-delivered, oldest first, before the next free pick. Max
//    observed deferral is recorded so the bound can be audited afterwards.
//
// Faulty pids never receive through the queue: anything addressed to them is
// handed to the adversary at send time (rushing), and faulty-to-faulty
// traffic circulates the same way.

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <queue>
#include <random>
#include <vector>

#include "bla/adversary.hpp"
#include "bla/process.hpp"
#include "bla/trace.hpp"

namespace bla {

enum class DelayModel : uint8_t { Uniform, Adversarial };

inline const char* delay_model_name(DelayModel m) {
    return m == DelayModel::Uniform ? "uniform" : "adversarial";
}

struct NetConfig {
    DelayModel model = DelayModel::Uniform;
    int spread = 10;      // uniform: delay in [1, spread]
    int fairness_D = 10;  // adversarial: max deferral in free picks
};

class Scheduler {
public:
    Scheduler(NetConfig cfg, uint64_t seed) : cfg_(cfg), rng_(mix64(seed ^ 0x5c4ed11eull)) {}

    void push(Message&& m, uint64_t now) {
        uint64_t seq = entries_.size();
        uint64_t key;
        if (cfg_.model == DelayModel::Uniform) {
            key = now + 1 + rng_() % static_cast<uint64_t>(cfg_.spread);
        } else {
            // systematic per-(destination, kind) bias plus noise: some links
            // run consistently late, which is what an adversary would arrange
            uint64_t bias =
                mix64(seed_bias_ ^ (static_cast<uint64_t>(m.to) << 8) ^ static_cast<uint64_t>(m.wire)) & 7;
            key = (bias << 10) | (rng_() & 1023);
        }
        heap_.emplace(key, seq);
        entries_.push_back(Entry{std::move(m), picks_, false});
        ++pending_;
    }

    void seed_bias(uint64_t b) { seed_bias_ = b; }

    bool pop(Message& out) {
        if (pending_ == 0) return false;
        while (fifo_head_ < entries_.size() && entries_[fifo_head_].delivered) ++fifo_head_;
        if (cfg_.model == DelayModel::Adversarial && fifo_head_ < entries_.size()) {
            Entry& e = entries_[fifo_head_];
            if (picks_ - e.born_pick >= static_cast<uint64_t>(cfg_.fairness_D)) {
                deliver(e, out);
                return true;
            }
        }
        while (!heap_.empty()) {
            auto [key, seq] = heap_.top();
            heap_.pop();
            Entry& e = entries_[seq];
            if (e.delivered) continue;
            ++picks_;
            deliver(e, out);
            return true;
        }
        return false;  // unreachable while pending_ > 0
    }

    uint64_t pending() const { return pending_; }
    uint64_t max_deferral() const { return max_deferral_; }

private:
    struct Entry {
        Message m;
        uint64_t born_pick;
        bool delivered;
    };

    void deliver(Entry& e, Message& out) {
        e.delivered = true;
        --pending_;
        if (cfg_.model == DelayModel::Adversarial) {
            uint64_t d = picks_ - e.born_pick;
            if (d > max_deferral_) max_deferral_ = d;
        }
        out = std::move(e.m);
    }

    NetConfig cfg_;
    std::mt19937_64 rng_;
    uint64_t seed_bias_ = 0;
    std::vector<Entry> entries_;
    std::priority_queue<std::pair<uint64_t, uint64_t>, std::vector<std::pair<uint64_t, uint64_t>>,
                        std::greater<>>
        heap_;
    std::size_t fifo_head_ = 0;
    uint64_t picks_ = 0;
    uint64_t pending_ = 0;
    uint64_t max_deferral_ = 0;
};

struct SimStats {
    uint64_t steps = 0;           // deliveries to correct processes
    uint64_t sent_total = 0;
    uint64_t sent_correct = 0;    // sends from correct processes only
    uint64_t sent_byz = 0;
    uint64_t dropped = 0;         // structurally rejected at receivers
    uint64_t max_deferral = 0;
    bool drained = false;
    bool budget_exceeded = false;
    std::array<uint64_t, 9> sent_by_wire{};
};

template <JoinLattice L>
class Simulation {
public:
    Simulation(TreeParams params, Variant variant, Mutations mut, NetConfig net, Strategy strategy,
               int t, uint64_t seed, std::function<typename L::Element(Pid)> input_of,
               ValueInterner<L>* interner, SignatureRegistry* registry, Trace* trace)
        : params_(params),
          t_(t),
          net_(net),
          sched_(net, seed),
          interner_(interner),
          registry_(registry),
          trace_(trace) {
        sched_.seed_bias(mix64(seed ^ 0xb1a5ull));
        procs_.resize(static_cast<size_t>(params_.n) + 1);
        ProcessEnv<L> env{interner_, registry_, trace_, &now_};
        for (Pid p = 1; p <= params_.n - t_; ++p)
            procs_[static_cast<size_t>(p)] =
                std::make_unique<Process<L>>(p, params_, variant, mut, input_of(p), env);
        AdvCtx<L> ctx;
        ctx.params = params_;
        ctx.variant = variant;
        for (Pid b = params_.n - t_ + 1; b <= params_.n; ++b) ctx.byz.push_back(b);
        ctx.interner = interner_;
        ctx.registry = registry_;
        ctx.now = &now_;
        ctx.seed = seed;
        ctx.outbox = &adv_out_;
        ctx.input_of = std::move(input_of);
        adversary_ = make_adversary<L>(strategy, std::move(ctx));
    }

    // Delivery budget: generous headroom over the expected message complexity.
    uint64_t step_budget() const {
        uint64_t n = static_cast<uint64_t>(params_.n);
        return 64 * n * n * n * static_cast<uint64_t>(params_.rounds + 1);
    }

    SimStats run() {
        for (Pid p = 1; p <= params_.n - t_; ++p) {
            procs_[static_cast<size_t>(p)]->start();
            collect(p);
            pump_adversary();
        }
        adversary_->on_start();
        route_adv_out();
        pump_adversary();

        uint64_t budget = step_budget();
        Message m;
        while (sched_.pop(m)) {
            ++now_;
            Pid to = m.to;
            auto& proc = procs_[static_cast<size_t>(to)];
            proc->handle(m);
            collect(to);
            pump_adversary();
            if (now_ >= budget) {
                stats_.budget_exceeded = true;
                break;
            }
        }
        stats_.steps = now_;
        stats_.drained = sched_.pending() == 0;
        stats_.max_deferral = sched_.max_deferral();
        for (Pid p = 1; p <= params_.n - t_; ++p)
            stats_.dropped += procs_[static_cast<size_t>(p)]->dropped();
        return stats_;
    }

    const Process<L>& process(Pid p) const { return *procs_.at(static_cast<size_t>(p)); }
    bool is_byz(Pid p) const { return p > params_.n - t_; }
    int correct_count() const { return params_.n - t_; }
    uint64_t now() const { return now_; }

    bool all_decided() const {
        for (Pid p = 1; p <= params_.n - t_; ++p)
            if (!procs_[static_cast<size_t>(p)]->decided()) return false;
        return true;
    }

private:
    void collect(Pid p) {
        auto& out = procs_[static_cast<size_t>(p)]->pending_out();
        for (auto& m : out) route(std::move(m));
        out.clear();
    }

    void route_adv_out() {
        // The adversary may emit while we route (faulty-to-faulty messages are
        // handed over inline), so drain by index.
        for (std::size_t i = 0; i < adv_out_.size(); ++i) {
            Message m = std::move(adv_out_[i]);
            route(std::move(m));
        }
        adv_out_.clear();
    }

    void pump_adversary() {
        while (!adv_inbox_.empty()) {
            Message m = std::move(adv_inbox_.front());
            adv_inbox_.pop_front();
            adversary_->on_message(m);
            route_adv_out();
        }
    }

    void route(Message&& m) {
        ++stats_.sent_total;
        stats_.sent_by_wire[static_cast<size_t>(m.wire)]++;
        if (is_byz(m.from)) ++stats_.sent_byz;
        else ++stats_.sent_correct;
        trace_send(m);
        if (is_byz(m.to)) {
            adv_inbox_.push_back(std::move(m));
        } else {
            sched_.push(std::move(m), now_);
        }
    }

    void trace_send(const Message& m) {
        if (!trace_) return;
        TraceEvent e;
        e.t = static_cast<uint32_t>(now_);
        e.kind = Ev::Send;
        e.wire = m.wire;
        e.from = static_cast<int16_t>(m.from);
        e.to = static_cast<int16_t>(m.to);
        switch (m.wire) {
            case Wire::Init:
            case Wire::Echo:
            case Wire::Ready:
                if (m.brb) {
                    e.mt = m.brb->type == PayloadType::Input  ? Mt::Input
                           : m.brb->type == PayloadType::Write ? Mt::Write
                                                                : Mt::Read;
                    e.round = m.brb->r;
                    e.label_x2 = m.brb->k2;
                    e.vs = m.brb->v;
                    e.digest = payload_digest(*interner_, *m.brb);
                }
                break;
            case Wire::Wack:
            case Wire::Rack:
            case Wire::Mack:
                e.round = m.ack.r;
                e.vs = m.ack.payload;
                break;
            case Wire::Master:
                e.round = m.master.r;
                e.label_x2 = m.master.k2;
                e.vs = m.master.T;
                break;
            case Wire::ARead:
                e.round = m.aread.r;
                e.label_x2 = m.aread.k2;
                break;
            case Wire::Garbage:
                break;
        }
        trace_->push(e);
    }

    TreeParams params_;
    int t_;
    NetConfig net_;
    Scheduler sched_;
    ValueInterner<L>* interner_;
    SignatureRegistry* registry_;
    Trace* trace_;
    std::vector<std::unique_ptr<Process<L>>> procs_;
    std::unique_ptr<Adversary<L>> adversary_;
    std::vector<Message> adv_out_;
    std::deque<Message> adv_inbox_;
    uint64_t now_ = 0;
    SimStats stats_;
};

}  // namespace bla
