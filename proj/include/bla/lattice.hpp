#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "bla/digest.hpp"

namespace bla {

using Pid = int;  // process ids are 1..n; 0 means "none"

/**
 * @brief Join semi-lattice contract.
 *
 * Requirements on the algebra: join is associative, commutative and
 * idempotent, and leq(a,b) holds iff join(a,b) == b. encode() must produce a
 * canonical byte string, i.e. equal elements encode identically.
 */
template <class L>
concept JoinLattice = requires(const typename L::Element& a, const typename L::Element& b, ByteSink& s) {
    { L::join(a, b) } -> std::same_as<typename L::Element>;
    { L::leq(a, b) } -> std::same_as<bool>;
    { L::bottom() } -> std::same_as<typename L::Element>;
    { L::encode(s, a) };
};

/// Finite sets of opaque byte strings under union; leq is subset.
struct SetUnionLattice {
    using Element = std::vector<std::string>;  // sorted, unique

    static Element make(std::initializer_list<std::string> xs) {
        Element e(xs);
        normalize(e);
        return e;
    }
    static void normalize(Element& e) {
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
    }
    static Element bottom() { return {}; }
    static Element join(const Element& a, const Element& b) {
        Element out;
        out.reserve(a.size() + b.size());
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        return out;
    }
    static bool leq(const Element& a, const Element& b) {
        return std::includes(b.begin(), b.end(), a.begin(), a.end());
    }
    static void encode(ByteSink& s, const Element& e) {
        s.u32(static_cast<uint32_t>(e.size()));
        for (const auto& x : e) s.bytes(x);
    }
};

/// Integers under max; leq is <=. Total order, used for generality tests.
struct MaxIntLattice {
    using Element = int64_t;

    static Element bottom() { return INT64_MIN; }
    static Element join(Element a, Element b) { return a < b ? b : a; }
    static bool leq(Element a, Element b) { return a <= b; }
    static void encode(ByteSink& s, Element e) { s.i64(e); }
};

static_assert(JoinLattice<SetUnionLattice>);
static_assert(JoinLattice<MaxIntLattice>);

/**
 * @brief Classification-tree label, stored as value*2 so every label in the
 * tree is an exact integer. All comparisons and the height threshold are
 * integer operations; no floating point anywhere.
 */
struct Label {
    int numerator_x2 = 0;
    bool operator==(const Label&) const = default;
};

/**
 * @brief Tree geometry for one (n, f) configuration.
 *
 * Label arithmetic uses the padded f_pow = 2^L; all quorum sizes use the true
 * f. L = 0 iff f = 0 (no classifier rounds); otherwise L = max(1, ceil(log2 f))
 * so that the leaf-level label gap f_pow / 2^L is exactly one x2 unit.
 */
struct TreeParams {
    int n = 0;
    int f = 0;
    int f_pow = 0;  // f' = 2^L, 0 when f = 0
    int rounds = 0; // L

    static TreeParams make(int n, int f) {
        if (n < 1 || f < 0 || f >= n)
            throw std::invalid_argument("TreeParams: need n >= 1 and 0 <= f < n");
        TreeParams p;
        p.n = n;
        p.f = f;
        if (f == 0) {
            p.rounds = 0;
            p.f_pow = 0;
        } else {
            int L = 1;
            while ((1 << L) < f) ++L;  // ceil(log2 f), floored at 1
            p.rounds = L;
            p.f_pow = 1 << L;
        }
        return p;
    }

    // Quorum sizes, all in true-f terms.
    int echo_quorum() const { return (n + f) / 2 + 1; }
    int ready_amplify() const { return f + 1; }
    int ready_deliver() const { return 2 * f + 1; }
    int ack_quorum() const { return n - f; }
};

inline Label initial_label(const TreeParams& p) {
    return Label{2 * p.n - p.f_pow};
}

/// Child-label delta at round r, in x2 units: f'/2^r, exact for 1 <= r <= L.
inline int child_delta_x2(const TreeParams& p, int r) {
    if (r < 1 || r > p.rounds)
        throw std::out_of_range("child_delta_x2: round outside 1..L");
    return p.f_pow >> r;
}

inline Label slave_label(Label k, int r, const TreeParams& p) {
    return Label{k.numerator_x2 - child_delta_x2(p, r)};
}

inline Label master_label(Label k, int r, const TreeParams& p) {
    return Label{k.numerator_x2 + child_delta_x2(p, r)};
}

/// Classification test: is the set's height strictly above the label.
inline bool exceeds_threshold(std::size_t height, Label k) {
    return 2 * static_cast<int64_t>(height) > k.numerator_x2;
}

}  // namespace bla
