#pragma once
// Byzantine strategy catalog.
//
// Each strategy controls every faulty pid in the run. The simulator hands the
// adversary all traffic addressed to faulty pids the moment it is sent
// (rushing: the adversary sees messages before any correct process does) and
// routes whatever the adversary emits. Strategies that need to look like an
// honest participant for a while run a hidden "puppet" Process per faulty pid
// and deviate by rewriting selected puppet emissions in flight.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "bla/lattice.hpp"
#include "bla/message.hpp"
#include "bla/process.hpp"
#include "bla/signature.hpp"
#include "bla/values.hpp"

namespace bla {

enum class Strategy : uint8_t {
    Silent,
    Equivocator,
    ValueInjector,
    FakeSlave,
    ReadBeforeWrite,
    RushingMaster,
    JunkAcks,
    StaleProof,
};

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Silent: return "silent";
        case Strategy::Equivocator: return "equivocator";
        case Strategy::ValueInjector: return "value_injector";
        case Strategy::FakeSlave: return "fake_slave";
        case Strategy::ReadBeforeWrite: return "read_before_write";
        case Strategy::RushingMaster: return "rushing_master";
        case Strategy::JunkAcks: return "junk_acks";
        case Strategy::StaleProof: return "stale_proof";
    }
    return "?";
}

inline bool strategy_from_string(const std::string& s, Strategy& out) {
    for (int i = 0; i <= static_cast<int>(Strategy::StaleProof); ++i) {
        Strategy cand = static_cast<Strategy>(i);
        if (s == strategy_name(cand)) {
            out = cand;
            return true;
        }
    }
    return false;
}

inline std::vector<Strategy> all_strategies() {
    std::vector<Strategy> v;
    for (int i = 0; i <= static_cast<int>(Strategy::StaleProof); ++i)
        v.push_back(static_cast<Strategy>(i));
    return v;
}

/// A value no correct process ever proposed, tagged with whatever origin the
/// caller wants to blame.
template <JoinLattice L>
typename L::Element fabricate_element(uint64_t nonce) {
    if constexpr (std::is_same_v<L, SetUnionLattice>) {
        return SetUnionLattice::make({"fab:" + std::to_string(nonce)});
    } else {
        return static_cast<typename L::Element>(1'000'000'000 + static_cast<int64_t>(nonce % 1'000'000));
    }
}

template <JoinLattice L>
struct AdvCtx {
    TreeParams params;
    Variant variant = Variant::Unauth;
    std::vector<Pid> byz;  // faulty pids, ascending
    ValueInterner<L>* interner = nullptr;
    SignatureRegistry* registry = nullptr;
    const uint64_t* now = nullptr;
    uint64_t seed = 0;
    std::vector<Message>* outbox = nullptr;  // drained by the simulator after every call
    std::function<typename L::Element(Pid)> input_of;

    bool is_byz(Pid p) const {
        for (Pid b : byz)
            if (b == p) return true;
        return false;
    }
};

template <JoinLattice L>
class Adversary {
public:
    explicit Adversary(AdvCtx<L> ctx) : ctx_(std::move(ctx)), rng_(ctx_.seed ^ 0xadbeefull) {}
    virtual ~Adversary() = default;

    virtual void on_start() {}
    /// Called for every message addressed to a faulty pid, at send time.
    virtual void on_message(const Message& m) { (void)m; }

protected:
    void emit(Message m) { ctx_.outbox->push_back(std::move(m)); }

    Message base(Wire w, Pid from, Pid to) const {
        Message m;
        m.wire = w;
        m.from = from;
        m.to = to;
        return m;
    }

    void send_to_all(Wire w, Pid from, const PayloadPtr& p) {
        for (Pid q = 1; q <= ctx_.params.n; ++q) {
            Message m = base(w, from, q);
            m.brb = p;
            emit(std::move(m));
        }
    }

    PayloadPtr make_payload(Pid origin, PayloadType t, int k2, int r, ValueSet v, Proof pf = {}) const {
        auto p = std::make_shared<BrbPayload>();
        p->origin = origin;
        p->type = t;
        p->k2 = static_cast<int16_t>(k2);
        p->r = static_cast<int16_t>(r);
        p->v = v;
        p->pf = std::move(pf);
        return p;
    }

    AdvCtx<L> ctx_;
    std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------

template <JoinLattice L>
class SilentAdversary final : public Adversary<L> {
public:
    using Adversary<L>::Adversary;
};

/**
 * Sends two different inputs to two halves of the system and backs each half
 * with colluding echoes and readies from every faulty pid. Against the real
 * broadcast thresholds this is absorbed; with the weakened delivery threshold
 * the two halves deliver different payloads for the same broadcast instance.
 */
template <JoinLattice L>
class EquivocatorAdversary final : public Adversary<L> {
public:
    using Adversary<L>::Adversary;

    void on_start() override {
        auto& ctx = this->ctx_;
        // Split the honest audience down the middle so both halves of the
        // equivocation reach real processes in every geometry.
        int n_correct = ctx.params.n - static_cast<int>(ctx.byz.size());
        int half = (n_correct + 1) / 2;
        for (Pid b : ctx.byz) {
            ValueSet va = ctx.interner->singleton(b, ctx.input_of(b));
            ValueSet vb = ctx.interner->singleton(
                b, fabricate_element<L>(static_cast<uint64_t>(b) * 977 + ctx.seed));
            int k0 = initial_label(ctx.params).numerator_x2;
            PayloadPtr pa = this->make_payload(b, PayloadType::Input, k0, 0, va);
            PayloadPtr pb = this->make_payload(b, PayloadType::Input, k0, 0, vb);
            for (Pid q = 1; q <= ctx.params.n; ++q) {
                Message m = this->base(Wire::Init, b, q);
                m.brb = q <= half ? pa : pb;
                this->emit(std::move(m));
            }
            // Collusion: every faulty pid vouches for the version its target
            // half received.
            for (Pid c : ctx.byz) {
                for (Pid q = 1; q <= ctx.params.n; ++q) {
                    const PayloadPtr& p = q <= half ? pa : pb;
                    Message e = this->base(Wire::Echo, c, q);
                    e.brb = p;
                    this->emit(std::move(e));
                    Message r = this->base(Wire::Ready, c, q);
                    r.brb = p;
                    this->emit(std::move(r));
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Puppet plumbing shared by the strategies that mimic honest behaviour.

template <JoinLattice L>
class PuppetAdversary : public Adversary<L> {
public:
    explicit PuppetAdversary(AdvCtx<L> ctx) : Adversary<L>(std::move(ctx)) {
        ProcessEnv<L> env;
        env.interner = this->ctx_.interner;
        env.registry = this->ctx_.registry;
        env.trace = nullptr;  // puppet events stay out of the audited trace
        env.now = this->ctx_.now;
        for (Pid b : this->ctx_.byz) {
            auto& st = state_[b];
            st.proc = std::make_unique<Process<L>>(b, this->ctx_.params, this->ctx_.variant,
                                                   Mutations{}, this->ctx_.input_of(b), env);
        }
    }

    void on_start() override {
        for (Pid b : this->ctx_.byz) {
            state_[b].proc->start();
            flush(b);
        }
    }

    void on_message(const Message& m) override {
        auto it = state_.find(m.to);
        if (it == state_.end()) return;
        observe(it->second, m);
        it->second.proc->handle(m);
        flush(m.to);
    }

protected:
    struct PuppetState {
        std::unique_ptr<Process<L>> proc;
        // observed while playing honest, used to build deviant proofs later
        int16_t write1_k2 = 0;
        ValueSet write1_v;
        bool wrote1 = false;
        std::vector<ValueSet> rack_payloads;    // by sender pid, round 1
        std::vector<SignedAck> rack_sigs;       // auth, round 1
        std::vector<SignedAck> wack_sigs;       // auth, round 1
        bool deviated = false;
    };

    void observe(PuppetState& st, const Message& m) {
        if (st.rack_payloads.empty())
            st.rack_payloads.assign(static_cast<size_t>(this->ctx_.params.n) + 1, ValueSet{});
        if (m.wire == Wire::Rack && m.ack.r == 1 && m.from >= 1 && m.from <= this->ctx_.params.n) {
            st.rack_payloads[static_cast<size_t>(m.from)] = m.ack.payload;
            if (m.ack.sig) st.rack_sigs.push_back(*m.ack.sig);
        }
        if (m.wire == Wire::Wack && m.ack.r == 1 && m.ack.sig) st.wack_sigs.push_back(*m.ack.sig);
    }

    // Forward puppet emissions, giving the concrete strategy a chance to
    // rewrite each batch.
    void flush(Pid b) {
        auto& st = state_[b];
        auto& out = st.proc->pending_out();
        for (auto& m : out) {
            if (m.wire == Wire::Init && m.brb && m.brb->type == PayloadType::Write && m.brb->r == 1 &&
                !st.wrote1) {
                st.wrote1 = true;
                st.write1_k2 = m.brb->k2;
                st.write1_v = m.brb->v;
            }
        }
        rewrite(b, st, out);
        for (auto& m : out) this->emit(std::move(m));
        out.clear();
    }

    /// Strategy hook: mutate the batch in place before it is sent.
    virtual void rewrite(Pid b, PuppetState& st, std::vector<Message>& batch) = 0;

    // Replace the payload of every copy of b's round-2 write in the batch.
    void swap_round2_write(PuppetState& st, std::vector<Message>& batch, const PayloadPtr& repl) {
        const BrbPayload* orig = nullptr;
        for (auto& m : batch) {
            if (m.wire == Wire::Init && m.brb && m.brb->origin != 0 &&
                m.brb->type == PayloadType::Write && m.brb->r == 2) {
                if (!orig) orig = m.brb.get();
                if (m.brb.get() == orig) m.brb = repl;
            }
        }
        if (orig) st.deviated = true;
    }

    bool batch_has_round2_write(const std::vector<Message>& batch) const {
        for (const auto& m : batch)
            if (m.wire == Wire::Init && m.brb && m.brb->type == PayloadType::Write && m.brb->r == 2)
                return true;
        return false;
    }

    int slave2_label(const PuppetState& st) const {
        return st.write1_k2 - child_delta_x2(this->ctx_.params, 1);
    }

    std::map<Pid, PuppetState> state_;
};

/**
 * Honest through round 1, then broadcasts a slave-labelled round-2 write
 * carrying a freshly fabricated value instead of the value it actually wrote.
 * The slave admission rule requires the carried set to equal the previous
 * write, so the broadcast parks forever; with that rule switched off the
 * fabrication is accepted and a second distinct value per faulty origin leaks
 * into the run.
 */
template <JoinLattice L>
class ValueInjectorAdversary final : public PuppetAdversary<L> {
public:
    using PuppetAdversary<L>::PuppetAdversary;

protected:
    void rewrite(Pid b, typename PuppetAdversary<L>::PuppetState& st,
                 std::vector<Message>& batch) override {
        if (st.deviated || !st.wrote1 || !this->batch_has_round2_write(batch)) return;
        Proof pf;
        // keep whatever genuine proof the puppet produced
        for (const auto& m : batch)
            if (m.wire == Wire::Init && m.brb && m.brb->type == PayloadType::Write && m.brb->r == 2) {
                pf = m.brb->pf;
                break;
            }
        ValueSet fresh = this->ctx_.interner->singleton(
            b, fabricate_element<L>(0x1439u + static_cast<uint64_t>(b) * 31 + this->ctx_.seed * 7));
        PayloadPtr repl = this->make_payload(b, PayloadType::Write, this->slave2_label(st), 2, fresh,
                                             std::move(pf));
        this->swap_round2_write(st, batch, repl);
    }
};

/**
 * Claims the slave label for round 2 while forging the proof: either junk
 * read-time entries (rejected by each receiver's own snapshot comparison) or
 * a proof whose value union is too tall for the previous label (rejected by
 * the height bound). In the signed variant it reuses genuine rack
 * certificates whose union exceeds the label, which the height bound catches.
 */
template <JoinLattice L>
class FakeSlaveAdversary final : public PuppetAdversary<L> {
public:
    using PuppetAdversary<L>::PuppetAdversary;

protected:
    void rewrite(Pid b, typename PuppetAdversary<L>::PuppetState& st,
                 std::vector<Message>& batch) override {
        if (st.deviated || !st.wrote1 || !this->batch_has_round2_write(batch)) return;
        auto& ctx = this->ctx_;
        Proof pf;
        if (ctx.variant == Variant::Unauth) {
            size_t slots = static_cast<size_t>(ctx.params.n) + 1;
            pf.rt.assign(slots, ValueSet{});
            bool junk_mode = (ctx.seed & 1) != 0;
            if (junk_mode) {
                // wrong snapshot at every receiver
                for (size_t q = 1; q < slots; ++q)
                    pf.rt[q] = ctx.interner->singleton(
                        b, fabricate_element<L>(0x77aa + q * 13 + static_cast<uint64_t>(b)));
            } else {
                // genuine snapshots, plus an own-slot stuffed so the union
                // overshoots the height bound
                if (!st.rack_payloads.empty())
                    for (size_t q = 1; q < slots; ++q) pf.rt[q] = st.rack_payloads[q];
                ValueSet stuffed;
                for (int i = 0; i <= ctx.params.n; ++i)
                    stuffed |= ctx.interner->singleton(
                        b, fabricate_element<L>(0x5133 + static_cast<uint64_t>(i) * 101 +
                                                static_cast<uint64_t>(b) * 7));
                pf.rt[static_cast<size_t>(b)] = stuffed;
            }
        } else {
            pf.racks = st.rack_sigs;  // genuine certificates; union is the tell
        }
        PayloadPtr repl = this->make_payload(b, PayloadType::Write, this->slave2_label(st), 2,
                                             st.write1_v, std::move(pf));
        this->swap_round2_write(st, batch, repl);
    }
};

/**
 * Proposes its input honestly but then asks the system to answer a read for a
 * write that never happened. The read validity rule keeps every correct
 * process from vouching; with the rule off, answers flow before any write
 * could justify them.
 */
template <JoinLattice L>
class ReadBeforeWriteAdversary final : public Adversary<L> {
public:
    using Adversary<L>::Adversary;

    void on_start() override {
        auto& ctx = this->ctx_;
        if (ctx.params.rounds < 1) return;
        int k0 = initial_label(ctx.params).numerator_x2;
        for (Pid b : ctx.byz) {
            ValueSet v = ctx.interner->singleton(b, ctx.input_of(b));
            this->send_to_all(Wire::Init, b, this->make_payload(b, PayloadType::Input, k0, 0, v));
            if (ctx.variant == Variant::Unauth) {
                this->send_to_all(Wire::Init, b,
                                  this->make_payload(b, PayloadType::Read, k0, 1, ValueSet{}));
            } else {
                auto W = std::make_shared<const std::vector<SignedAck>>();
                for (Pid q = 1; q <= ctx.params.n; ++q) {
                    Message m = this->base(Wire::ARead, b, q);
                    m.aread.r = 1;
                    m.aread.k2 = static_cast<int16_t>(k0);
                    m.aread.W = W;
                    this->emit(std::move(m));
                }
            }
        }
    }
};

/**
 * Skips the write/read phases entirely and announces itself as a round-1
 * master: either with a fabricated value set nobody can justify, or with a
 * value observed from rushed input traffic. Correct responders hold their ack
 * until the announced set is justified by their own accepted pool.
 */
template <JoinLattice L>
class RushingMasterAdversary final : public Adversary<L> {
public:
    using Adversary<L>::Adversary;

    void on_start() override {
        auto& ctx = this->ctx_;
        if (ctx.params.rounds < 1) return;
        int k0 = initial_label(ctx.params).numerator_x2;
        for (Pid b : ctx.byz) {
            ValueSet v = ctx.interner->singleton(b, ctx.input_of(b));
            this->send_to_all(Wire::Init, b, this->make_payload(b, PayloadType::Input, k0, 0, v));
            if ((ctx.seed ^ static_cast<uint64_t>(b)) & 1) {
                // fabricated set blamed on a correct origin: never justifiable
                ValueSet junk = ctx.interner->singleton(
                    1, fabricate_element<L>(0x9d + static_cast<uint64_t>(b) * 19 + ctx.seed));
                announce(b, junk);
            }
            // else: wait for rushed input traffic, see on_message
        }
    }

    void on_message(const Message& m) override {
        auto& ctx = this->ctx_;
        if (ctx.params.rounds < 1) return;
        if (m.wire != Wire::Init || !m.brb || m.brb->type != PayloadType::Input) return;
        Pid b = m.to;
        if (!ctx.is_byz(b)) return;
        if (((ctx.seed ^ static_cast<uint64_t>(b)) & 1) == 0 && !announced_.count(b)) {
            announce(b, m.brb->v);  // observed value: eventually justifiable
        }
    }

private:
    void announce(Pid b, const ValueSet& T) {
        if (announced_.count(b)) return;
        announced_[b] = true;
        int k0 = initial_label(this->ctx_.params).numerator_x2;
        for (Pid q = 1; q <= this->ctx_.params.n; ++q) {
            Message m = this->base(Wire::Master, b, q);
            m.master.r = 1;
            m.master.k2 = static_cast<int16_t>(k0);
            m.master.T = T;
            this->emit(std::move(m));
        }
    }

    std::map<Pid, bool> announced_;
};

/**
 * Replies to the first broadcast initiation it sees from each sender with a
 * burst of malformed or unjustified acknowledgements plus one unparseable
 * message, exercising every defensive drop path without stalling anyone.
 */
template <JoinLattice L>
class JunkAcksAdversary final : public Adversary<L> {
public:
    using Adversary<L>::Adversary;

    void on_start() override {
        auto& ctx = this->ctx_;
        int k0 = initial_label(ctx.params).numerator_x2;
        for (Pid b : ctx.byz) {
            ValueSet v = ctx.interner->singleton(b, ctx.input_of(b));
            this->send_to_all(Wire::Init, b, this->make_payload(b, PayloadType::Input, k0, 0, v));
        }
    }

    void on_message(const Message& m) override {
        auto& ctx = this->ctx_;
        if (m.wire != Wire::Init || !m.brb) return;
        Pid b = m.to;
        if (!ctx.is_byz(b)) return;
        if (m.from < 1 || m.from > ctx.params.n) return;
        uint64_t key = static_cast<uint64_t>(b) << 32 | static_cast<uint32_t>(m.from);
        if (replied_.count(key)) return;
        replied_[key] = true;
        if (ctx.params.rounds < 1) return;

        Message w = this->base(Wire::Wack, b, m.from);
        w.ack.r = 1;
        if (ctx.variant == Variant::Auth) {
            SignedAck sig;
            sig.kind = AckKind::Wack;
            sig.signer = b;
            sig.r = 1;
            sig.payload = m.brb->v;
            bool forged = (this->rng_() & 1) != 0;
            sig.tag = forged ? this->rng_() | 1
                             : ctx.registry->sign(b, ack_sign_bytes(*ctx.interner, AckKind::Wack, 1,
                                                                    sig.payload));
            w.ack.payload = sig.payload;
            w.ack.sig = sig;
        }
        this->emit(std::move(w));

        Message r = this->base(Wire::Rack, b, m.from);
        r.ack.r = 1;
        r.ack.payload = m.brb->v;  // observed values: justifiable later at best
        if (ctx.variant == Variant::Auth) {
            SignedAck sig;
            sig.kind = AckKind::Rack;
            sig.signer = b;
            sig.r = 1;
            sig.payload = r.ack.payload;
            sig.tag = ctx.registry->sign(b, ack_sign_bytes(*ctx.interner, AckKind::Rack, 1, sig.payload));
            r.ack.sig = sig;
        }
        this->emit(std::move(r));

        Message k = this->base(Wire::Mack, b, m.from);
        k.ack.r = 1;
        k.ack.payload = m.brb->v;
        this->emit(std::move(k));

        this->emit(this->base(Wire::Garbage, b, m.from));
    }

private:
    std::map<uint64_t, bool> replied_;
};

/**
 * Honest through round 1, then backs its round-2 messages with stale
 * evidence: an all-empty snapshot proof, write certificates where read ones
 * are required, or last round's certificates replayed for this round. Each of
 * these is rejected by the snapshot comparison or the certificate's bound
 * kind and round.
 */
template <JoinLattice L>
class StaleProofAdversary final : public PuppetAdversary<L> {
public:
    using PuppetAdversary<L>::PuppetAdversary;

protected:
    void rewrite(Pid b, typename PuppetAdversary<L>::PuppetState& st,
                 std::vector<Message>& batch) override {
        auto& ctx = this->ctx_;
        if (ctx.variant == Variant::Auth) {
            // round-stale certificate on the round-2 read
            for (auto& m : batch) {
                if (m.wire == Wire::ARead && m.aread.r == 2)
                    m.aread.W = std::make_shared<const std::vector<SignedAck>>(st.wack_sigs);
            }
        }
        if (st.deviated || !st.wrote1 || !this->batch_has_round2_write(batch)) return;
        Proof pf;
        if (ctx.variant == Variant::Unauth) {
            pf.rt.assign(static_cast<size_t>(ctx.params.n) + 1, ValueSet{});  // all-empty snapshots
        } else {
            pf.racks = st.wack_sigs;  // kind-stale: write acks where read acks belong
        }
        ValueSet v;
        int k2;
        for (const auto& m : batch)
            if (m.wire == Wire::Init && m.brb && m.brb->type == PayloadType::Write && m.brb->r == 2) {
                v = m.brb->v;
                break;
            }
        k2 = this->slave2_label(st);
        PayloadPtr repl = this->make_payload(b, PayloadType::Write, k2, 2, v, std::move(pf));
        this->swap_round2_write(st, batch, repl);
    }
};

template <JoinLattice L>
std::unique_ptr<Adversary<L>> make_adversary(Strategy s, AdvCtx<L> ctx) {
    switch (s) {
        case Strategy::Silent: return std::make_unique<SilentAdversary<L>>(std::move(ctx));
        case Strategy::Equivocator: return std::make_unique<EquivocatorAdversary<L>>(std::move(ctx));
        case Strategy::ValueInjector:
            return std::make_unique<ValueInjectorAdversary<L>>(std::move(ctx));
        case Strategy::FakeSlave: return std::make_unique<FakeSlaveAdversary<L>>(std::move(ctx));
        case Strategy::ReadBeforeWrite:
            return std::make_unique<ReadBeforeWriteAdversary<L>>(std::move(ctx));
        case Strategy::RushingMaster:
            return std::make_unique<RushingMasterAdversary<L>>(std::move(ctx));
        case Strategy::JunkAcks: return std::make_unique<JunkAcksAdversary<L>>(std::move(ctx));
        case Strategy::StaleProof: return std::make_unique<StaleProofAdversary<L>>(std::move(ctx));
    }
    return std::make_unique<SilentAdversary<L>>(std::move(ctx));
}

}  // namespace bla
