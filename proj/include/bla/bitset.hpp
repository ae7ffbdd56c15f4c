#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstddef>

namespace bla {

/// Fixed 256-bit set keyed by small dense ids. Value semantics, exact equality.
/// 256 bits is a hard cap on distinct interned tagged values per trial; the
/// interner enforces it.
class Bitset256 {
public:
    static constexpr std::size_t kWords = 4;
    static constexpr std::size_t kBits = kWords * 64;

    constexpr Bitset256() : w_{0, 0, 0, 0} {}

    void set(std::size_t i) { w_[i >> 6] |= (uint64_t{1} << (i & 63)); }
    void reset(std::size_t i) { w_[i >> 6] &= ~(uint64_t{1} << (i & 63)); }
    bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }

    bool any() const { return (w_[0] | w_[1] | w_[2] | w_[3]) != 0; }
    bool none() const { return !any(); }

    std::size_t count() const {
        return std::popcount(w_[0]) + std::popcount(w_[1]) +
               std::popcount(w_[2]) + std::popcount(w_[3]);
    }

    Bitset256& operator|=(const Bitset256& o) {
        for (std::size_t i = 0; i < kWords; ++i) w_[i] |= o.w_[i];
        return *this;
    }
    Bitset256& operator&=(const Bitset256& o) {
        for (std::size_t i = 0; i < kWords; ++i) w_[i] &= o.w_[i];
        return *this;
    }
    friend Bitset256 operator|(Bitset256 a, const Bitset256& b) { return a |= b; }
    friend Bitset256 operator&(Bitset256 a, const Bitset256& b) { return a &= b; }

    /// True iff every bit of *this is also set in o.
    bool subset_of(const Bitset256& o) const {
        for (std::size_t i = 0; i < kWords; ++i)
            if (w_[i] & ~o.w_[i]) return false;
        return true;
    }

    bool operator==(const Bitset256& o) const = default;

    /// Calls fn(index) for each set bit in ascending order.
    template <class Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t wi = 0; wi < kWords; ++wi) {
            uint64_t w = w_[wi];
            while (w) {
                fn(wi * 64 + static_cast<std::size_t>(std::countr_zero(w)));
                w &= w - 1;
            }
        }
    }

    const std::array<uint64_t, kWords>& words() const { return w_; }

private:
    std::array<uint64_t, kWords> w_;
};

}  // namespace bla
