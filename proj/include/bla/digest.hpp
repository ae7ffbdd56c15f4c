#pragma once

#include <cstdint>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace bla {

/// FNV-1a, 64-bit. Deterministic across platforms, unlike std::hash.
inline uint64_t fnv1a(const void* data, std::size_t len, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
    return fnv1a(s.data(), s.size(), h);
}

/// 64-bit mix (splitmix64 finalizer). Used for seed derivation and scheduler weights.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Append-only byte buffer for canonical encodings. Every digest, signature,
/// and payload-identity comparison goes through bytes produced here, so the
/// field order written by callers is part of the wire contract.
class ByteSink {
public:
    void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u16(uint16_t v) { append_le(v, 2); }
    void u32(uint32_t v) { append_le(v, 4); }
    void u64(uint64_t v) { append_le(v, 8); }
    void i32(int32_t v) { append_le(static_cast<uint32_t>(v), 4); }
    void i64(int64_t v) { append_le(static_cast<uint64_t>(v), 8); }
    void bytes(std::string_view s) {
        u32(static_cast<uint32_t>(s.size()));
        buf_.append(s);
    }

    const std::string& str() const { return buf_; }
    uint64_t digest() const { return fnv1a(buf_); }
    void clear() { buf_.clear(); }

private:
    void append_le(uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    std::string buf_;
};

inline std::string to_hex(uint64_t v) {
    static const char* d = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = d[v & 0xf];
        v >>= 4;
    }
    return s;
}

}  // namespace bla
