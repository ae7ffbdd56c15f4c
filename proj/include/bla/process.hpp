#pragma once
// Protocol state machine for one correct process.
//
// A Process owns one BrbEngine plus the per-round classifier state and runs
// the generalised lattice agreement protocol over the label tree described in
// lattice.hpp.  It is variant-parameterised: the unauthenticated variant uses
// reliable broadcast for writes *and* reads, the authenticated variant keeps
// reliable broadcast for writes but replaces read dissemination with signed
// ack certificates.
//
// The process is a pure reactive object: the simulator feeds it one Message
// at a time through handle() (plus one start() call), and it appends every
// outbound message to an internal vector the simulator collects afterwards.
// There is no wall clock anywhere; determinism is the whole point.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bla/brb.hpp"
#include "bla/lattice.hpp"
#include "bla/message.hpp"
#include "bla/signature.hpp"
#include "bla/trace.hpp"
#include "bla/values.hpp"

namespace bla {

enum class Variant : uint8_t { Unauth, Auth };

inline const char* variant_name(Variant v) {
    return v == Variant::Unauth ? "unauth" : "auth";
}

// Fault-injection switches used by the mutation-sensitivity harness.  All
// false in normal operation.
struct Mutations {
    bool slave_proof_off = false;  // accept any slave-labelled write once the
                                   // sender's previous label is known
    bool read_gate_off = false;    // answer reads without their validity check
    bool master_wait_off = false;  // ack master announcements immediately
    bool brb_weak = false;         // deliver after max(1,f) readies instead of 2f+1

    bool any() const { return slave_proof_off || read_gate_off || master_wait_off || brb_weak; }
};

template <JoinLattice L>
struct ProcessEnv {
    ValueInterner<L>* interner = nullptr;
    SignatureRegistry* registry = nullptr;
    Trace* trace = nullptr;
    const uint64_t* now = nullptr;  // simulator step counter, for trace stamps
};

template <JoinLattice L>
struct ProcessOutput {
    bool decided = false;
    typename L::Element y{};
    ValueSet value_set{};
    int final_label_x2 = 0;
    uint64_t y_digest = 0;    // canonical digest of the joined element
    uint64_t set_digest = 0;  // canonical digest of the final value set
};

template <JoinLattice L>
class Process {
public:
    using Payload = BrbPayload;

    Process(Pid pid, TreeParams params, Variant variant, Mutations mut,
            typename L::Element input, ProcessEnv<L> env)
        : pid_(pid),
          params_(params),
          variant_(variant),
          mut_(mut),
          input_(std::move(input)),
          env_(env),
          brb_(this, params.n,
               params.echo_quorum(),
               params.ready_amplify(),
               mut.brb_weak ? std::max(1, params.f) : params.ready_deliver(),
               params.rounds) {
        rounds_.resize(static_cast<size_t>(params_.rounds) + 1);
        for (auto& rs : rounds_) {
            rs.RV.assign(static_cast<size_t>(params_.n) + 1, ValueSet{});
            rs.RT.assign(static_cast<size_t>(params_.n) + 1, std::nullopt);
        }
    }

    Pid pid() const { return pid_; }
    const TreeParams& params() const { return params_; }
    Variant variant() const { return variant_; }
    bool decided() const { return out_final_.decided; }
    const ProcessOutput<L>& output() const { return out_final_; }
    int rounds_executed() const { return rounds_entered_; }
    uint64_t dropped() const { return dropped_; }

    // Take the messages produced by the last start()/handle() call.
    std::vector<Message>& pending_out() { return out_; }

    // Kick off the protocol: reliably broadcast the input value.
    void start() {
        auto p = std::make_shared<Payload>();
        p->origin = pid_;
        p->type = PayloadType::Input;
        p->k2 = static_cast<int16_t>(initial_label(params_).numerator_x2);
        p->r = 0;
        p->v = env_.interner->singleton(pid_, input_);
        trace(Ev::InputBcast, Mt::Input, pid_, 0, 0, p->k2, p->v, digest_of(p));
        brb_.broadcast(p);
        drain();
    }

    void handle(const Message& m) {
        switch (m.wire) {
            case Wire::Init:
            case Wire::Echo:
            case Wire::Ready:
                handle_brb(m);
                break;
            case Wire::Wack:
                handle_wack(m);
                break;
            case Wire::Rack:
                handle_rack(m);
                break;
            case Wire::Master:
                handle_master(m);
                break;
            case Wire::Mack:
                handle_mack(m);
                break;
            case Wire::ARead:
                if (variant_ == Variant::Auth) handle_aread(m);
                else drop(m);
                break;
            case Wire::Garbage:
                drop(m);
                break;
        }
        drain();
    }

    // ---- BrbEngine owner hooks -------------------------------------------

    uint64_t brb_digest(const Payload& p) const { return payload_digest(*env_.interner, p); }

    Valid brb_valid(const Payload& p) const {
        switch (p.type) {
            case PayloadType::Input:
                return Valid::Yes;  // structural checks happened at ingress
            case PayloadType::Write:
                return valid_write(p);
            case PayloadType::Read:
                // Reads travel by reliable broadcast only in the
                // unauthenticated variant; the authenticated one never
                // vouches for them.
                if (variant_ == Variant::Auth) return Valid::NotYet;
                return valid_read(p);
        }
        return Valid::NotYet;
    }

    void brb_broadcast_out(Wire wire, const PayloadPtr& p) {
        Ev ev = wire == Wire::Init ? Ev::BrbInit : wire == Wire::Echo ? Ev::BrbEcho : Ev::BrbReady;
        trace(ev, mt_of(p->type), pid_, 0, p->r, p->k2, p->v, digest_of(p));
        for (Pid q = 1; q <= params_.n; ++q) {
            Message m;
            m.wire = wire;
            m.from = pid_;
            m.to = q;
            m.brb = p;
            out_.push_back(std::move(m));
        }
    }

private:
    // ---- per-round classifier state --------------------------------------

    enum class Phase : uint8_t { Idle, AwaitWacks, AwaitRacks, AwaitMacks, Done };

    struct RoundState {
        bool entered = false;
        Phase phase = Phase::Idle;
        int16_t k2 = 0;  // label of the group this process writes in
        ValueSet V;      // classifier input for this round

        // write acknowledgements
        uint32_t wack_mask = 0;          // unauth: distinct senders
        std::vector<SignedAck> wacks;    // auth: verified, one per signer

        // read phase
        std::vector<Message> parked_racks;  // first rack per sender, arrival order
        uint32_t rack_seen = 0;
        uint32_t rack_recorded = 0;
        int racks_recorded = 0;
        std::vector<ValueSet> RV;           // recorded rack payloads, by sender
        std::vector<SignedAck> rv_sigs;     // auth: the recorded signed racks
        bool classified = false;
        bool is_master = false;
        ValueSet T;

        // master path
        std::vector<Message> parked_macks;
        uint32_t mack_seen = 0;
        uint32_t mack_recorded = 0;
        int macks_recorded = 0;
        ValueSet Tprime;
        bool result_done = false;

        // inbound master announcements (any round, phase-independent)
        std::vector<Message> parked_masters;
        uint32_t master_seen = 0;

        // tables fed by deliveries, phase-independent
        std::map<int16_t, ValueSet> ACV;            // label -> accepted union
        std::vector<std::optional<ValueSet>> RT;    // read-time snapshot per origin
        uint32_t aread_replied = 0;                 // auth: one reply per sender
    };

    // ---- ingress ----------------------------------------------------------

    void handle_brb(const Message& m) {
        if (!m.brb || !brb_.addressable(*m.brb) || !structural_ok(*m.brb)) {
            drop(m);
            return;
        }
        PayloadPtr delivered;
        switch (m.wire) {
            case Wire::Init: delivered = brb_.on_init(m.from, m.brb); break;
            case Wire::Echo: delivered = brb_.on_echo(m.from, m.brb); break;
            default: delivered = brb_.on_ready(m.from, m.brb); break;
        }
        if (delivered) apply_delivery(delivered);
    }

    // Shape checks that do not depend on protocol state.  Anything failing
    // here could never have been emitted by a correct process.
    bool structural_ok(const Payload& p) const {
        switch (p.type) {
            case PayloadType::Input: {
                if (p.r != 0) return false;
                if (p.v.count() != 1) return false;
                bool ok = true;
                p.v.for_each([&](uint32_t id) {
                    const auto& tv = env_.interner->at(id);
                    if (tv.origin != p.origin) ok = false;
                });
                return ok && origins_in_range(p.v);
            }
            case PayloadType::Write:
                if (p.r < 1 || p.r > params_.rounds) return false;
                return origins_in_range(p.v);
            case PayloadType::Read:
                return p.r >= 1 && p.r <= params_.rounds;
        }
        return false;
    }

    bool origins_in_range(const ValueSet& vs) const {
        bool ok = true;
        vs.for_each([&](uint32_t id) {
            Pid o = env_.interner->at(id).origin;
            if (o < 1 || o > params_.n) ok = false;
        });
        return ok;
    }

    void drop(const Message& m) {
        ++dropped_;
        trace(Ev::Drop, Mt::None, m.from, pid_, 0, 0, ValueSet{}, 0);
    }

    // ---- BRB delivery -----------------------------------------------------

    void apply_delivery(const PayloadPtr& p) {
        trace(Ev::BrbDeliver, mt_of(p->type), p->origin, pid_, p->r, p->k2, p->v, digest_of(p));
        switch (p->type) {
            case PayloadType::Input: deliver_input(*p); break;
            case PayloadType::Write: deliver_write(*p); break;
            case PayloadType::Read: deliver_read(*p); break;
        }
    }

    void deliver_input(const Payload& p) {
        int16_t k0 = static_cast<int16_t>(initial_label(params_).numerator_x2);
        S_[k0] |= p.v;
        input_origins_ |= pid_bit(p.origin);
        // The quorum must include our own input: self-delivery is certain for
        // a correct process, and the eventual output must sit above it.
        if (!v1_fixed_ && (input_origins_ & pid_bit(pid_)) &&
            popcount(input_origins_) >= params_.ack_quorum()) {
            v1_fixed_ = true;
            ValueSet v1 = S_[k0];
            trace(Ev::V1Fixed, Mt::None, pid_, 0, 0, k0, v1, 0);
            if (params_.rounds == 0) {
                finish(v1, k0);
            } else {
                enter_round(1, v1, k0);
            }
        }
    }

    void deliver_write(const Payload& p) {
        int16_t merged = static_cast<int16_t>(
            p.k2 + child_delta_x2(params_, p.r));  // the master-child pool this write feeds
        S_[merged] |= p.v;
        RoundState& rs = rounds_[static_cast<size_t>(p.r)];
        rs.ACV[static_cast<int16_t>(p.k2)] |= p.v;
        // The sender's label for this round is now pinned; slave checks for
        // round r+1 read it back through the broadcast engine.

        Message reply;
        reply.wire = Wire::Wack;
        reply.from = pid_;
        reply.to = p.origin;
        reply.ack.r = p.r;
        if (variant_ == Variant::Auth) {
            reply.ack.payload = rs.ACV[static_cast<int16_t>(p.k2)];
            SignedAck sig;
            sig.kind = AckKind::Wack;
            sig.signer = pid_;
            sig.r = p.r;
            sig.payload = reply.ack.payload;
            sig.tag = env_.registry->sign(pid_, ack_sign_bytes(*env_.interner, AckKind::Wack, p.r, sig.payload));
            reply.ack.sig = sig;
        }
        out_.push_back(std::move(reply));
    }

    void deliver_read(const Payload& p) {
        if (variant_ == Variant::Auth) return;  // unreachable: reads are never validated
        RoundState& rs = rounds_[static_cast<size_t>(p.r)];
        auto& slot = rs.RT[static_cast<size_t>(p.origin)];
        if (!slot) slot = rs.ACV[static_cast<int16_t>(p.k2)];
        Message reply;
        reply.wire = Wire::Rack;
        reply.from = pid_;
        reply.to = p.origin;
        reply.ack.r = p.r;
        reply.ack.payload = *slot;
        out_.push_back(std::move(reply));
    }

    // ---- ack handling -----------------------------------------------------

    void handle_wack(const Message& m) {
        int r = m.ack.r;
        if (r < 1 || r > params_.rounds) { drop(m); return; }
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        if (variant_ == Variant::Unauth) {
            rs.wack_mask |= pid_bit(m.from);
            return;
        }
        if (!m.ack.sig) { drop(m); return; }
        const SignedAck& sig = *m.ack.sig;
        if (sig.kind != AckKind::Wack || sig.r != r) { drop(m); return; }
        if (sig.signer < 1 || sig.signer > params_.n) { drop(m); return; }
        // Certificates are counted by signer, not by wire sender: a relayed
        // ack is as good as a direct one as long as the signature holds.
        for (const auto& have : rs.wacks)
            if (have.signer == sig.signer) return;
        if (!env_.registry->verify(sig.signer,
                                   ack_sign_bytes(*env_.interner, AckKind::Wack, r, sig.payload),
                                   sig.tag)) {
            drop(m);
            return;
        }
        rs.wacks.push_back(sig);
    }

    void handle_rack(const Message& m) {
        int r = m.ack.r;
        if (r < 1 || r > params_.rounds) { drop(m); return; }
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        if (rs.rack_seen & pid_bit(m.from)) return;
        if (variant_ == Variant::Auth) {
            if (!m.ack.sig) { drop(m); return; }
            const SignedAck& sig = *m.ack.sig;
            if (sig.kind != AckKind::Rack || sig.r != r || sig.signer != m.from) { drop(m); return; }
            if (!env_.registry->verify(sig.signer,
                                       ack_sign_bytes(*env_.interner, AckKind::Rack, r, sig.payload),
                                       sig.tag)) {
                drop(m);
                return;
            }
        }
        rs.rack_seen |= pid_bit(m.from);
        rs.parked_racks.push_back(m);
    }

    void handle_master(const Message& m) {
        int r = m.master.r;
        if (r < 1 || r > params_.rounds) { drop(m); return; }
        if (!origins_in_range(m.master.T)) { drop(m); return; }
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        if (rs.master_seen & pid_bit(m.from)) return;
        rs.master_seen |= pid_bit(m.from);
        rs.parked_masters.push_back(m);
    }

    void handle_mack(const Message& m) {
        int r = m.ack.r;
        if (r < 1 || r > params_.rounds) { drop(m); return; }
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        if (rs.mack_seen & pid_bit(m.from)) return;
        rs.mack_seen |= pid_bit(m.from);
        rs.parked_macks.push_back(m);
    }

    // Authenticated read: a plain message carrying a wack certificate.
    void handle_aread(const Message& m) {
        int r = m.aread.r;
        if (r < 1 || r > params_.rounds) { drop(m); return; }
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        if (rs.aread_replied & pid_bit(m.from)) return;  // one verdict per sender per round
        rs.aread_replied |= pid_bit(m.from);
        if (!mut_.read_gate_off) {
            if (!m.aread.W || !cert_valid(AckKind::Wack, *m.aread.W, r)) { drop(m); return; }
        }
        ValueSet snap = rs.ACV[static_cast<int16_t>(m.aread.k2)];
        Message reply;
        reply.wire = Wire::Rack;
        reply.from = pid_;
        reply.to = m.from;
        reply.ack.r = r;
        reply.ack.payload = snap;
        SignedAck sig;
        sig.kind = AckKind::Rack;
        sig.signer = pid_;
        sig.r = r;
        sig.payload = snap;
        sig.tag = env_.registry->sign(pid_, ack_sign_bytes(*env_.interner, AckKind::Rack, r, snap));
        reply.ack.sig = sig;
        out_.push_back(std::move(reply));
    }

    // n-f correctly signed acks of the right kind and round, distinct signers.
    bool cert_valid(AckKind kind, const std::vector<SignedAck>& acks, int r) const {
        uint32_t signers = 0;
        for (const auto& a : acks) {
            if (a.kind != kind || a.r != r) continue;
            if (a.signer < 1 || a.signer > params_.n) continue;
            if (signers & pid_bit(a.signer)) continue;
            if (!env_.registry->verify(a.signer, ack_sign_bytes(*env_.interner, kind, r, a.payload), a.tag))
                continue;
            signers |= pid_bit(a.signer);
        }
        return popcount(signers) >= params_.ack_quorum();
    }

    // ---- validity predicates (the BRB gate) -------------------------------

    Valid valid_write(const Payload& p) const {
        int r = p.r;
        if (r >= 2) {
            PayloadPtr prev = brb_.delivered(p.origin, PayloadType::Write, r - 1);
            if (!prev) return Valid::NotYet;  // previous label not pinned yet
            int lb = prev->k2;
            bool claims_slave = p.k2 == lb - child_delta_x2(params_, r - 1);
            if (claims_slave) return mut_.slave_proof_off ? Valid::Yes : valid_slave(p, *prev, lb);
        }
        // Master-labelled (or first-round) write: every claimed value must
        // already sit in the group's accepted pool.
        auto it = S_.find(static_cast<int16_t>(p.k2));
        const ValueSet* pool = it == S_.end() ? nullptr : &it->second;
        if (!pool) return p.v.none() ? Valid::Yes : Valid::NotYet;
        return subset(p.v, *pool) ? Valid::Yes : Valid::NotYet;
    }

    Valid valid_slave(const Payload& p, const Payload& prev, int lb) const {
        // (a) the slave must carry exactly what it wrote last round
        if (!(prev.v == p.v)) return Valid::NotYet;
        if (variant_ == Variant::Unauth) {
            // (b) its proof must quote the snapshot we handed it when we
            // answered its read last round
            const RoundState& pr = rounds_[static_cast<size_t>(p.r - 1)];
            const auto& mine = pr.RT[static_cast<size_t>(p.origin)];
            if (!mine) return Valid::NotYet;
            if (p.pf.rt.size() != static_cast<size_t>(params_.n) + 1) return Valid::NotYet;
            if (!(p.pf.rt[static_cast<size_t>(pid_)] == *mine)) return Valid::NotYet;
            // (c) and the proof union must fit under its previous label
            ValueSet u;
            for (Pid q = 1; q <= params_.n; ++q) u |= p.pf.rt[static_cast<size_t>(q)];
            if (2 * static_cast<int>(u.count()) > lb) return Valid::NotYet;
            return Valid::Yes;
        }
        // Auth: the proof is a rack certificate for the previous round whose
        // union fits under the previous label.
        if (!cert_valid(AckKind::Rack, p.pf.racks, p.r - 1)) return Valid::NotYet;
        ValueSet u;
        uint32_t signers = 0;
        for (const auto& a : p.pf.racks) {
            if (a.kind != AckKind::Rack || a.r != p.r - 1) continue;
            if (a.signer < 1 || a.signer > params_.n) continue;
            if (signers & pid_bit(a.signer)) continue;
            signers |= pid_bit(a.signer);
            u |= a.payload;
        }
        if (2 * static_cast<int>(u.count()) > lb) return Valid::NotYet;
        return Valid::Yes;
    }

    Valid valid_read(const Payload& p) const {
        if (mut_.read_gate_off) return Valid::Yes;
        PayloadPtr w = brb_.delivered(p.origin, PayloadType::Write, p.r);
        if (w && w->k2 == p.k2) return Valid::Yes;
        return Valid::NotYet;
    }

    // ---- round machinery --------------------------------------------------

    void enter_round(int r, ValueSet V, int k2) {
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        rs.entered = true;
        rs.phase = Phase::AwaitWacks;
        rs.k2 = static_cast<int16_t>(k2);
        rs.V = V;
        ++rounds_entered_;
        trace(Ev::WriteStart, Mt::Write, pid_, 0, r, k2, V, 0);

        auto p = std::make_shared<Payload>();
        p->origin = pid_;
        p->type = PayloadType::Write;
        p->k2 = static_cast<int16_t>(k2);
        p->r = static_cast<int16_t>(r);
        p->v = V;
        if (r >= 2) {
            const RoundState& prev = rounds_[static_cast<size_t>(r - 1)];
            if (!prev.is_master) {
                if (variant_ == Variant::Unauth) {
                    p->pf.rt = prev.RV;
                } else {
                    p->pf.racks = prev.rv_sigs;
                }
            }
        }
        brb_.broadcast(p);
    }

    bool wacks_ready(const RoundState& rs) const {
        int have = variant_ == Variant::Unauth ? popcount(rs.wack_mask)
                                               : static_cast<int>(rs.wacks.size());
        return have >= params_.ack_quorum();
    }

    void begin_read(int r) {
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        rs.phase = Phase::AwaitRacks;
        trace(Ev::ReadStart, Mt::Read, pid_, 0, r, rs.k2, ValueSet{}, 0);
        if (variant_ == Variant::Unauth) {
            auto p = std::make_shared<Payload>();
            p->origin = pid_;
            p->type = PayloadType::Read;
            p->k2 = rs.k2;
            p->r = static_cast<int16_t>(r);
            brb_.broadcast(p);
        } else {
            auto W = std::make_shared<const std::vector<SignedAck>>(rs.wacks);
            for (Pid q = 1; q <= params_.n; ++q) {
                Message m;
                m.wire = Wire::ARead;
                m.from = pid_;
                m.to = q;
                m.aread.r = r;
                m.aread.k2 = rs.k2;
                m.aread.W = W;
                out_.push_back(std::move(m));
            }
        }
    }

    // Record parked racks one at a time, in arrival order, until n-f of them
    // have passed the acceptance test; the n-f'th triggers classification.
    bool pump_racks(int r) {
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        if (rs.phase != Phase::AwaitRacks) return false;
        bool progressed = false;
        for (const Message& m : rs.parked_racks) {
            if (rs.phase != Phase::AwaitRacks) break;
            Pid sender = m.from;
            uint32_t bit = pid_bit(sender);
            if (rs.rack_recorded & bit) continue;
            const ValueSet& R = m.ack.payload;
            if (!subset(R, rs.ACV[rs.k2])) continue;  // not yet justified
            rs.rack_recorded |= bit;
            rs.RV[static_cast<size_t>(sender)] = R;
            if (variant_ == Variant::Auth && m.ack.sig) rs.rv_sigs.push_back(*m.ack.sig);
            ++rs.racks_recorded;
            progressed = true;
            if (rs.racks_recorded >= params_.ack_quorum()) {
                classify(r);
                break;
            }
        }
        return progressed;
    }

    void classify(int r) {
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        rs.classified = true;
        ValueSet T;
        for (Pid q = 1; q <= params_.n; ++q) T |= rs.RV[static_cast<size_t>(q)];
        rs.T = T;
        if (exceeds_threshold(T.count(), Label{rs.k2})) {
            rs.is_master = true;
            rs.phase = Phase::AwaitMacks;
            trace(Ev::Classified, Mt::ClassMaster, pid_, 0, r, rs.k2, T, 0);
            trace(Ev::MasterWR, Mt::ClassMaster, pid_, 0, r, rs.k2, T, 0);
            for (Pid q = 1; q <= params_.n; ++q) {
                Message m;
                m.wire = Wire::Master;
                m.from = pid_;
                m.to = q;
                m.master.r = r;
                m.master.k2 = rs.k2;
                m.master.T = T;
                out_.push_back(std::move(m));
            }
        } else {
            trace(Ev::Classified, Mt::ClassSlave, pid_, 0, r, rs.k2, T, 0);
            round_result(r, rs.V, /*master=*/false);
        }
    }

    // Answer master announcements whose T has become justified by our ACV.
    bool pump_masters(int r) {
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        bool progressed = false;
        for (auto& m : rs.parked_masters) {
            if (m.wire != Wire::Master) continue;  // already answered, slot cleared
            if (!mut_.master_wait_off && !subset(m.master.T, rs.ACV[static_cast<int16_t>(m.master.k2)]))
                continue;
            Message reply;
            reply.wire = Wire::Mack;
            reply.from = pid_;
            reply.to = m.from;
            reply.ack.r = r;
            reply.ack.payload = rs.ACV[static_cast<int16_t>(m.master.k2)];
            out_.push_back(std::move(reply));
            m.wire = Wire::Garbage;  // tombstone: answered
            progressed = true;
        }
        return progressed;
    }

    bool pump_macks(int r) {
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        if (rs.phase != Phase::AwaitMacks) return false;
        bool progressed = false;
        for (const Message& m : rs.parked_macks) {
            if (rs.phase != Phase::AwaitMacks) break;
            uint32_t bit = pid_bit(m.from);
            if (rs.mack_recorded & bit) continue;
            const ValueSet& R = m.ack.payload;
            if (!subset(R, rs.ACV[rs.k2])) continue;
            rs.mack_recorded |= bit;
            rs.Tprime |= R;
            ++rs.macks_recorded;
            progressed = true;
            if (rs.macks_recorded >= params_.ack_quorum()) {
                ValueSet result = rs.Tprime;
                round_result(r, result, /*master=*/true);
                break;
            }
        }
        return progressed;
    }

    void round_result(int r, ValueSet V_next, bool master) {
        RoundState& rs = rounds_[static_cast<size_t>(r)];
        rs.phase = Phase::Done;
        rs.result_done = true;
        trace(Ev::RoundDone, master ? Mt::ClassMaster : Mt::ClassSlave, pid_, 0, r, rs.k2, V_next, 0);
        Label cur{rs.k2};
        Label next = master ? master_label(cur, r, params_) : slave_label(cur, r, params_);
        trace(Ev::LabelUpdate, Mt::None, pid_, 0, r, next.numerator_x2, ValueSet{}, 0);
        if (r == params_.rounds) {
            finish(V_next, next.numerator_x2);
        } else {
            enter_round(r + 1, V_next, next.numerator_x2);
        }
    }

    void finish(ValueSet V, int label_x2) {
        out_final_.decided = true;
        out_final_.value_set = V;
        out_final_.final_label_x2 = label_x2;
        // An empty final set can only arise under injected faults; decide
        // bottom rather than aborting so the safety checkers get to observe
        // the damage.
        out_final_.y = V.none() ? L::bottom() : env_.interner->join_all(V);
        ByteSink sink;
        L::encode(sink, out_final_.y);
        out_final_.y_digest = sink.digest();
        out_final_.set_digest = env_.interner->digest(V);
        trace(Ev::Output, Mt::None, pid_, 0, params_.rounds, label_x2, V, out_final_.y_digest);
    }

    // Run every deferred check to a fixpoint.  Each pump is cheap and the
    // whole loop is bounded by total protocol progress, so this cannot spin.
    void drain() {
        bool again = true;
        while (again) {
            again = false;
            if (brb_.recheck_pending()) again = true;
            for (int r = 1; r <= params_.rounds; ++r) {
                RoundState& rs = rounds_[static_cast<size_t>(r)];
                if (pump_masters(r)) again = true;
                if (rs.entered) {
                    if (rs.phase == Phase::AwaitWacks && wacks_ready(rs)) {
                        begin_read(r);
                        again = true;
                    }
                    if (pump_racks(r)) again = true;
                    if (pump_macks(r)) again = true;
                }
            }
        }
    }

    // ---- small helpers ----------------------------------------------------

    static uint32_t pid_bit(Pid p) { return 1u << static_cast<uint32_t>(p); }

    static int popcount(uint32_t m) { return __builtin_popcount(m); }

    uint64_t digest_of(const PayloadPtr& p) const { return payload_digest(*env_.interner, *p); }

    static Mt mt_of(PayloadType t) {
        switch (t) {
            case PayloadType::Input: return Mt::Input;
            case PayloadType::Write: return Mt::Write;
            case PayloadType::Read: return Mt::Read;
        }
        return Mt::None;
    }

    void trace(Ev ev, Mt mt, Pid from, Pid to, int round, int label_x2,
               const ValueSet& vs, uint64_t digest) {
        if (!env_.trace) return;
        TraceEvent e;
        e.t = env_.now ? static_cast<uint32_t>(*env_.now) : 0;
        e.kind = ev;
        e.wire = Wire::Garbage;  // not a wire event
        e.mt = mt;
        e.from = from;
        e.to = to;
        e.round = static_cast<int16_t>(round);
        e.label_x2 = static_cast<int16_t>(label_x2);
        e.vs = vs;
        e.digest = digest;
        env_.trace->push(e);
    }

    Pid pid_;
    TreeParams params_;
    Variant variant_;
    Mutations mut_;
    typename L::Element input_;
    ProcessEnv<L> env_;
    BrbEngine<Process> brb_;

    std::map<int16_t, ValueSet> S_;  // accepted pool per group label
    uint32_t input_origins_ = 0;
    bool v1_fixed_ = false;
    std::vector<RoundState> rounds_;  // index 1..rounds
    int rounds_entered_ = 0;
    ProcessOutput<L> out_final_;
    uint64_t dropped_ = 0;
    std::vector<Message> out_;
};

}  // namespace bla
