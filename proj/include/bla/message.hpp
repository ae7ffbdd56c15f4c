#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "bla/digest.hpp"
#include "bla/lattice.hpp"
#include "bla/values.hpp"

namespace bla {

/// Wire message kinds, i.e. what travels point-to-point.
enum class Wire : uint8_t { Init, Echo, Ready, Wack, Rack, Master, Mack, ARead, Garbage };

/// What a reliable broadcast carries.
enum class PayloadType : uint8_t { Input, Write, Read };

enum class AckKind : uint8_t { Wack, Rack };

/// An acknowledgement signed through the registry scheme (auth variant).
struct SignedAck {
    AckKind kind = AckKind::Wack;
    Pid signer = 0;
    int16_t r = 0;
    ValueSet payload;  // carried ACV snapshot; not semantically checked
    uint64_t tag = 0;
    bool operator==(const SignedAck&) const = default;
};

/// Slave-claim proof attached to a write. Unauth writes carry the previous
/// round's RV array (index by pid, empty sets for unheard processes); auth
/// writes carry the previous round's signed racks. Masters and round-1 writes
/// carry an empty proof.
struct Proof {
    std::vector<ValueSet> rt;        // size 0 or n+1
    std::vector<SignedAck> racks;
    bool empty() const { return rt.empty() && racks.empty(); }
    bool operator==(const Proof&) const = default;
};

struct BrbPayload {
    Pid origin = 0;
    PayloadType type = PayloadType::Input;
    int16_t k2 = 0;
    int16_t r = 0;
    ValueSet v;
    Proof pf;
    mutable uint64_t digest_cache = 0;  // lazily filled; 0 means unknown
    bool same_content(const BrbPayload& o) const {
        return origin == o.origin && type == o.type && k2 == o.k2 && r == o.r &&
               v == o.v && pf == o.pf;
    }
};

using PayloadPtr = std::shared_ptr<const BrbPayload>;

struct AckBody {
    int16_t r = 0;
    ValueSet payload;                 // empty for unauth wacks
    std::optional<SignedAck> sig;     // set in the auth variant for wack/rack
};

struct MasterBody {
    int16_t r = 0;
    int16_t k2 = 0;
    ValueSet T;
};

struct AReadBody {
    int16_t r = 0;
    int16_t k2 = 0;
    std::shared_ptr<const std::vector<SignedAck>> W;  // the n-f verified wacks
};

struct Message {
    Wire wire = Wire::Garbage;
    Pid from = 0;
    Pid to = 0;
    PayloadPtr brb;     // Init / Echo / Ready
    AckBody ack;        // Wack / Rack / Mack
    MasterBody master;  // Master
    AReadBody aread;    // ARead
};

// ---- canonical encoding -----------------------------------------------------
// Field order is part of the wire contract: kind, round, label, then payload
// content with sorted, length-prefixed members. Signatures and quorum identity
// both run over these bytes.

template <JoinLattice L>
void encode_proof(ByteSink& s, const ValueInterner<L>& in, const Proof& pf) {
    s.u32(static_cast<uint32_t>(pf.rt.size()));
    for (const auto& vs : pf.rt) in.encode(s, vs);
    s.u32(static_cast<uint32_t>(pf.racks.size()));
    for (const auto& a : pf.racks) {
        s.u8(static_cast<uint8_t>(a.kind));
        s.i32(a.signer);
        s.i32(a.r);
        in.encode(s, a.payload);
        s.u64(a.tag);
    }
}

template <JoinLattice L>
void encode_payload(ByteSink& s, const ValueInterner<L>& in, const BrbPayload& p) {
    s.u8(static_cast<uint8_t>(p.type));
    s.i32(p.r);
    s.i32(p.k2);
    s.i32(p.origin);
    in.encode(s, p.v);
    encode_proof(s, in, p.pf);
}

template <JoinLattice L>
uint64_t payload_digest(const ValueInterner<L>& in, const BrbPayload& p) {
    if (p.digest_cache == 0) {
        ByteSink s;
        encode_payload(s, in, p);
        uint64_t d = s.digest();
        p.digest_cache = d ? d : 1;  // reserve 0 for "unknown"
    }
    return p.digest_cache;
}

/// Bytes an auth process signs for a wack or rack; label is fixed to 0 since
/// acks carry no label.
template <JoinLattice L>
std::string ack_sign_bytes(const ValueInterner<L>& in, AckKind kind, int r, const ValueSet& payload) {
    ByteSink s;
    s.u8(static_cast<uint8_t>(kind));
    s.i32(r);
    s.i32(0);
    in.encode(s, payload);
    return s.str();
}

inline const char* wire_name(Wire w) {
    switch (w) {
        case Wire::Init: return "init";
        case Wire::Echo: return "echo";
        case Wire::Ready: return "ready";
        case Wire::Wack: return "wack";
        case Wire::Rack: return "rack";
        case Wire::Master: return "master";
        case Wire::Mack: return "mack";
        case Wire::ARead: return "aread";
        case Wire::Garbage: return "garbage";
    }
    return "?";
}

inline const char* payload_type_name(PayloadType t) {
    switch (t) {
        case PayloadType::Input: return "input";
        case PayloadType::Write: return "write";
        case PayloadType::Read: return "read";
    }
    return "?";
}

}  // namespace bla
