#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bla/bitset.hpp"
#include "bla/digest.hpp"
#include "bla/lattice.hpp"

namespace bla {

/// A lattice element tagged with the process id that introduced it.
template <JoinLattice L>
struct TaggedValue {
    Pid origin = 0;
    typename L::Element element{};
};

/// Dense id of an interned TaggedValue within one trial.
using Vid = uint32_t;

/// A set of tagged values, as a bitset over interned ids. All the V, ACV, S,
/// RV, RT, T sets of the protocol are ValueSets. Equality, union, subset and
/// height are exact bitset operations.
using ValueSet = Bitset256;

/**
 * @brief Per-trial intern table mapping (origin, element) to a dense id.
 *
 * Ids are assigned in first-intern order, which is deterministic because all
 * message handling is. The table is shared by every process in a trial plus
 * the adversary; it is bookkeeping infrastructure, not protocol state.
 */
template <JoinLattice L>
class ValueInterner {
public:
    Vid intern(Pid origin, const typename L::Element& element) {
        ByteSink s;
        s.i32(origin);
        L::encode(s, element);
        auto it = index_.find(s.str());
        if (it != index_.end()) return it->second;
        if (values_.size() >= Bitset256::kBits)
            throw std::length_error("ValueInterner: more than 256 distinct tagged values in one trial");
        Vid id = static_cast<Vid>(values_.size());
        values_.push_back(TaggedValue<L>{origin, element});
        index_.emplace(s.str(), id);
        return id;
    }

    const TaggedValue<L>& at(Vid id) const { return values_.at(id); }
    std::size_t size() const { return values_.size(); }

    ValueSet singleton(Pid origin, const typename L::Element& element) {
        ValueSet vs;
        vs.set(intern(origin, element));
        return vs;
    }

    /// Join of the lattice elements of vs; tags are dropped. Empty input is a
    /// caller bug (a semi-lattice need not have a bottom).
    typename L::Element join_all(const ValueSet& vs) const {
        if (vs.none()) throw std::logic_error("join_all: empty ValueSet");
        typename L::Element acc = L::bottom();
        bool first = true;
        vs.for_each([&](std::size_t id) {
            const auto& tv = values_[id];
            if (first) {
                acc = tv.element;
                first = false;
            } else {
                acc = L::join(acc, tv.element);
            }
        });
        return acc;
    }

    /// Canonical bytes of a ValueSet: members sorted by (origin, element
    /// bytes), independent of intern order. Feeds digests and signatures.
    void encode(ByteSink& out, const ValueSet& vs) const {
        std::vector<std::pair<std::pair<Pid, std::string>, Vid>> members;
        vs.for_each([&](std::size_t id) {
            ByteSink es;
            L::encode(es, values_[id].element);
            members.push_back({{values_[id].origin, es.str()}, static_cast<Vid>(id)});
        });
        std::sort(members.begin(), members.end());
        out.u32(static_cast<uint32_t>(members.size()));
        for (const auto& m : members) {
            out.i32(m.first.first);
            out.bytes(m.first.second);
        }
    }

    uint64_t digest(const ValueSet& vs) const {
        ByteSink s;
        encode(s, vs);
        return s.digest();
    }

    /// True iff no two members of vs share an origin. Protocol invariant on
    /// every honestly maintained set; checked, not asserted, so mutation runs
    /// can observe the violation instead of aborting.
    bool origins_unique(const ValueSet& vs) const {
        uint64_t seen[4] = {0, 0, 0, 0};  // pid bitmap, pids < 256
        bool ok = true;
        vs.for_each([&](std::size_t id) {
            Pid o = values_[id].origin;
            if (o < 0 || o >= 256) {
                ok = false;
                return;
            }
            uint64_t bit = uint64_t{1} << (o & 63);
            if (seen[o >> 6] & bit) ok = false;
            seen[o >> 6] |= bit;
        });
        return ok;
    }

    /// Distinct origins present in vs.
    std::vector<Pid> origins(const ValueSet& vs) const {
        std::vector<Pid> out;
        vs.for_each([&](std::size_t id) { out.push_back(values_[id].origin); });
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    std::vector<TaggedValue<L>> values_;
    std::map<std::string, Vid> index_;  // canonical bytes -> id
};

inline bool subset(const ValueSet& a, const ValueSet& b) { return a.subset_of(b); }

}  // namespace bla
