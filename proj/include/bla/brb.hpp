#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bla/message.hpp"

namespace bla {

/// Validity verdicts are monotone: a payload may move from NotYet to Yes but
/// never back. Permanently rejectable payloads simply stay NotYet forever.
enum class Valid : uint8_t { Yes, NotYet };

/**
 * @brief One process's reliable-broadcast engine: INIT / ECHO / READY with a
 * validity-gated echo and per-(origin, type, round) instances.
 *
 * The Owner supplies local context:
 *   Valid    brb_valid(const BrbPayload&)          echo gate, monotone
 *   uint64_t brb_digest(const BrbPayload&)         canonical payload digest
 *   void     brb_broadcast_out(Wire, PayloadPtr)   fan out + trace echo/ready
 *
 * Handlers return the payload newly delivered by that event (at most one), or
 * nullptr; the owner runs its deliver handler on it. Thresholds: echo quorum
 * floor((n+f)/2)+1, ready amplification f+1, delivery 2f+1 (or the weakened
 * value in mutation runs).
 */
template <class Owner>
class BrbEngine {
public:
    BrbEngine(Owner* owner, int n, int echo_q, int amplify_q, int deliver_q, int max_round)
        : owner_(owner), n_(n), echo_q_(echo_q), amplify_q_(amplify_q), deliver_q_(deliver_q),
          max_round_(max_round) {
        instances_.resize(static_cast<std::size_t>(max_round_ + 1) * 3 * (n_ + 1));
        own_sent_.resize(static_cast<std::size_t>(max_round_ + 1) * 3, false);
    }

    /// In-range check for payload coordinates; out-of-range payloads are the
    /// caller's to drop.
    bool addressable(const BrbPayload& p) const {
        return p.origin >= 1 && p.origin <= n_ && p.r >= 0 && p.r <= max_round_;
    }

    void broadcast(const PayloadPtr& p) {
        std::size_t oi = static_cast<std::size_t>(p->r) * 3 + static_cast<std::size_t>(p->type);
        if (own_sent_[oi])
            throw std::logic_error("BrbEngine: duplicate broadcast for (type, round)");
        own_sent_[oi] = true;
        owner_->brb_broadcast_out(Wire::Init, p);
    }

    PayloadPtr on_init(Pid from, const PayloadPtr& p) {
        Instance& ins = at(*p);
        // Only the origin may introduce its own INIT; relayed ones are noise.
        if (from != p->origin || ins.init_seen) return nullptr;
        ins.init_seen = true;
        ins.pending_init = p;
        try_echo(ins);
        return nullptr;
    }

    PayloadPtr on_echo(Pid from, const PayloadPtr& p) {
        Instance& ins = at(*p);
        Candidate& c = candidate(ins, p);
        uint32_t bit = 1u << from;
        if (c.echo_mask & bit) return nullptr;
        c.echo_mask |= bit;
        if (!ins.readied && popcount(c.echo_mask) >= echo_q_) {
            ins.readied = true;
            owner_->brb_broadcast_out(Wire::Ready, c.p);
        }
        return nullptr;
    }

    PayloadPtr on_ready(Pid from, const PayloadPtr& p) {
        Instance& ins = at(*p);
        Candidate& c = candidate(ins, p);
        uint32_t bit = 1u << from;
        if (c.ready_mask & bit) return nullptr;
        c.ready_mask |= bit;
        int readies = popcount(c.ready_mask);
        if (!ins.readied && readies >= amplify_q_) {
            ins.readied = true;
            owner_->brb_broadcast_out(Wire::Ready, c.p);
        }
        if (!ins.delivered && readies >= deliver_q_) {
            ins.delivered = true;
            ins.delivered_payload = c.p;
            return c.p;
        }
        return nullptr;
    }

    /// Re-evaluates parked INITs after local state growth. Returns true if any
    /// echo went out.
    bool recheck_pending() {
        bool progressed = false;
        for (std::size_t i = 0; i < pending_.size();) {
            Instance& ins = instances_[pending_[i]];
            if (ins.pending_init && owner_->brb_valid(*ins.pending_init) == Valid::Yes) {
                do_echo(ins);
                progressed = true;
            }
            if (!ins.pending_init) {
                pending_[i] = pending_.back();
                pending_.pop_back();
            } else {
                ++i;
            }
        }
        return progressed;
    }

    /// Delivered payload for (origin, type, r), or nullptr.
    PayloadPtr delivered(Pid origin, PayloadType t, int r) const {
        return at(origin, t, r).delivered_payload;
    }

    bool has_pending() const { return !pending_.empty(); }

private:
    struct Candidate {
        PayloadPtr p;
        uint64_t digest = 0;
        uint32_t echo_mask = 0;
        uint32_t ready_mask = 0;
    };
    struct Instance {
        PayloadPtr pending_init;  // parked INIT awaiting validity; null once echoed
        bool init_seen = false;
        bool echoed = false;
        bool readied = false;
        bool delivered = false;
        PayloadPtr delivered_payload;
        std::vector<Candidate> cands;
    };

    static int popcount(uint32_t m) { return std::popcount(m); }

    std::size_t index(Pid origin, PayloadType t, int r) const {
        return (static_cast<std::size_t>(r) * 3 + static_cast<std::size_t>(t)) *
                   static_cast<std::size_t>(n_ + 1) +
               static_cast<std::size_t>(origin);
    }
    Instance& at(const BrbPayload& p) { return instances_[index(p.origin, p.type, p.r)]; }
    const Instance& at(Pid o, PayloadType t, int r) const { return instances_[index(o, t, r)]; }

    Candidate& candidate(Instance& ins, const PayloadPtr& p) {
        uint64_t d = owner_->brb_digest(*p);
        for (auto& c : ins.cands)
            if (c.digest == d && (c.p == p || c.p->same_content(*p))) return c;
        ins.cands.push_back(Candidate{p, d, 0, 0});
        return ins.cands.back();
    }

    void try_echo(Instance& ins) {
        if (owner_->brb_valid(*ins.pending_init) == Valid::Yes) {
            do_echo(ins);
        } else {
            pending_.push_back(static_cast<std::size_t>(&ins - instances_.data()));
        }
    }

    void do_echo(Instance& ins) {
        PayloadPtr p = std::move(ins.pending_init);
        ins.pending_init = nullptr;
        ins.echoed = true;
        owner_->brb_broadcast_out(Wire::Echo, p);
    }

    Owner* owner_;
    int n_, echo_q_, amplify_q_, deliver_q_, max_round_;
    std::vector<Instance> instances_;
    std::vector<bool> own_sent_;
    std::vector<std::size_t> pending_;
};

}  // namespace bla
