#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "bla/digest.hpp"
#include "bla/message.hpp"
#include "bla/values.hpp"

namespace bla {

enum class Ev : uint8_t {
    Send,        // one point-to-point message enqueued
    BrbInit,     // process initiated a reliable broadcast
    BrbDeliver,  // from = payload origin, to = delivering process
    BrbEcho,     // process decided to echo (broadcast follows as sends)
    BrbReady,
    InputBcast,
    V1Fixed,
    WriteStart,  // round entry: label + V snapshot
    ReadStart,
    Classified,  // mt carries the class, vs carries T
    MasterWR,
    RoundDone,   // vs carries post-round V
    LabelUpdate,
    Output,      // vs carries V^{L+1}
    Drop,        // malformed or out-of-range message discarded
};

/// Secondary tag: the BRB payload type, message class, or classification.
enum class Mt : uint8_t { None, Input, Write, Read, ClassMaster, ClassSlave };

struct TraceEvent {
    uint32_t t = 0;      // virtual time = delivery step counter
    Ev kind = Ev::Send;
    Wire wire = Wire::Garbage;  // meaningful for Send/Drop
    Mt mt = Mt::None;
    int16_t from = 0;
    int16_t to = 0;
    int16_t round = -1;
    int16_t label_x2 = 0;
    ValueSet vs;         // event-kind specific snapshot (see kinds above)
    uint64_t digest = 0; // payload digest for sends, set digest otherwise
};

inline const char* ev_name(Ev e) {
    switch (e) {
        case Ev::Send: return "send";
        case Ev::BrbInit: return "brb_init";
        case Ev::BrbDeliver: return "brb_deliver";
        case Ev::BrbEcho: return "brb_echo";
        case Ev::BrbReady: return "brb_ready";
        case Ev::InputBcast: return "input_bcast";
        case Ev::V1Fixed: return "v1_fixed";
        case Ev::WriteStart: return "write_start";
        case Ev::ReadStart: return "read_start";
        case Ev::Classified: return "classified";
        case Ev::MasterWR: return "master_wr";
        case Ev::RoundDone: return "round_done";
        case Ev::LabelUpdate: return "label_update";
        case Ev::Output: return "output";
        case Ev::Drop: return "drop";
    }
    return "?";
}

inline const char* mt_name(Mt m) {
    switch (m) {
        case Mt::None: return "";
        case Mt::Input: return "input";
        case Mt::Write: return "write";
        case Mt::Read: return "read";
        case Mt::ClassMaster: return "master";
        case Mt::ClassSlave: return "slave";
    }
    return "?";
}

/// mtype string for the JSONL export: wire kind, plus the BRB payload type for
/// init/echo/ready sends ("echo.write"), or the secondary tag alone for
/// protocol-level events.
inline std::string mtype_string(const TraceEvent& e) {
    if (e.kind == Ev::Send || e.kind == Ev::Drop) {
        std::string s = wire_name(e.wire);
        if (e.wire == Wire::Init || e.wire == Wire::Echo || e.wire == Wire::Ready) {
            s += '.';
            s += mt_name(e.mt);
        }
        return s;
    }
    return mt_name(e.mt);
}

class Trace {
public:
    std::vector<TraceEvent> events;

    void push(TraceEvent e) { events.push_back(e); }

    /// Deterministic digest over every recorded event; criterion for replay
    /// equality.
    uint64_t digest() const {
        uint64_t h = 0xcbf29ce484222325ull;
        for (const auto& e : events) {
            uint64_t fields[4] = {
                (static_cast<uint64_t>(e.t) << 32) ^ (static_cast<uint64_t>(static_cast<uint8_t>(e.kind)) << 24) ^
                    (static_cast<uint64_t>(static_cast<uint8_t>(e.wire)) << 16) ^
                    static_cast<uint64_t>(static_cast<uint8_t>(e.mt)),
                (static_cast<uint64_t>(static_cast<uint16_t>(e.from)) << 48) ^
                    (static_cast<uint64_t>(static_cast<uint16_t>(e.to)) << 32) ^
                    (static_cast<uint64_t>(static_cast<uint16_t>(e.round)) << 16) ^
                    static_cast<uint64_t>(static_cast<uint16_t>(e.label_x2)),
                e.digest,
                e.vs.words()[0] ^ (e.vs.words()[1] * 3) ^ (e.vs.words()[2] * 5) ^ (e.vs.words()[3] * 7),
            };
            h = fnv1a(fields, sizeof(fields), h);
        }
        return h;
    }

    /// JSONL export, one event per line, exactly the documented eight keys:
    /// {"t","kind","from","to","round","mtype","label_x2","digest"}.
    void write_jsonl(std::ostream& os) const {
        for (const auto& e : events) {
            os << "{\"t\":" << e.t
               << ",\"kind\":\"" << ev_name(e.kind)
               << "\",\"from\":" << e.from
               << ",\"to\":" << e.to
               << ",\"round\":" << e.round
               << ",\"mtype\":\"" << mtype_string(e)
               << "\",\"label_x2\":" << e.label_x2
               << ",\"digest\":\"" << to_hex(e.digest) << "\"}\n";
        }
    }
};

}  // namespace bla
