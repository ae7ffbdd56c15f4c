#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bla/digest.hpp"
#include "bla/lattice.hpp"

namespace bla {

/**
 * @brief In-simulation signature oracle.
 *
 * A trusted registry records every legitimate sign call; verify is a registry
 * lookup, so forgery is impossible by construction. Byzantine strategies reach
 * sign() only through an API bound to their own pid. The contract (sign /
 * verify over canonical bytes) matches what a real scheme would provide, so
 * one could be swapped in behind it.
 */
class SignatureRegistry {
public:
    uint64_t sign(Pid signer, std::string_view bytes) {
        uint64_t bd = fnv1a(bytes);
        auto key = std::make_pair(signer, bd);
        auto it = issued_.find(key);
        if (it != issued_.end()) return it->second;
        uint64_t tag = mix64(0x5161u ^ (static_cast<uint64_t>(signer) << 40) ^ bd ^ next_++);
        if (tag == 0) tag = 1;
        issued_.emplace(key, tag);
        log_.push_back({signer, bd, tag});
        return tag;
    }

    bool verify(Pid signer, std::string_view bytes, uint64_t tag) const {
        auto it = issued_.find(std::make_pair(signer, fnv1a(bytes)));
        return it != issued_.end() && it->second == tag;
    }

    struct Record {
        Pid signer;
        uint64_t bytes_digest;
        uint64_t tag;
    };
    const std::vector<Record>& log() const { return log_; }

private:
    std::map<std::pair<Pid, uint64_t>, uint64_t> issued_;
    uint64_t next_ = 0;
    std::vector<Record> log_;
};

}  // namespace bla
