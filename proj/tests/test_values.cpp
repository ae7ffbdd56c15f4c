#include <catch2/catch_amalgamated.hpp>

#include "bla/values.hpp"

using namespace bla;

TEST_CASE("interning is stable per (origin, element)") {
    ValueInterner<SetUnionLattice> in;
    auto e1 = SetUnionLattice::make({"a"});
    auto e2 = SetUnionLattice::make({"b"});
    Vid a = in.intern(1, e1);
    Vid b = in.intern(2, e1);  // same element, different origin: distinct id
    Vid c = in.intern(1, e2);
    CHECK(a != b);
    CHECK(a != c);
    CHECK(in.intern(1, e1) == a);
    CHECK(in.at(a).origin == 1);
    CHECK(in.at(a).element == e1);
    CHECK(in.size() == 3);
}

TEST_CASE("singleton sets and joins") {
    ValueInterner<SetUnionLattice> in;
    ValueSet s = in.singleton(3, SetUnionLattice::make({"x"}));
    CHECK(s.count() == 1);
    ValueSet t = s | in.singleton(4, SetUnionLattice::make({"y", "z"}));
    auto joined = in.join_all(t);
    CHECK(joined == SetUnionLattice::make({"x", "y", "z"}));
    CHECK_THROWS_AS(in.join_all(ValueSet{}), std::logic_error);
}

TEST_CASE("set digest ignores insertion order") {
    ValueInterner<SetUnionLattice> in;
    ValueSet a = in.singleton(1, SetUnionLattice::make({"p"}));
    ValueSet b = in.singleton(2, SetUnionLattice::make({"q"}));
    ValueSet ab = a | b;
    ValueSet ba = b | a;
    CHECK(in.digest(ab) == in.digest(ba));
    CHECK(in.digest(a) != in.digest(b));
    CHECK(in.digest(a) != in.digest(ab));
}

TEST_CASE("origin uniqueness detects duplicated origins") {
    ValueInterner<SetUnionLattice> in;
    ValueSet ok = in.singleton(1, SetUnionLattice::make({"u"})) |
                  in.singleton(2, SetUnionLattice::make({"v"}));
    CHECK(in.origins_unique(ok));
    ValueSet dup = ok | in.singleton(1, SetUnionLattice::make({"w"}));
    CHECK_FALSE(in.origins_unique(dup));
}

TEST_CASE("subset on packed sets") {
    ValueInterner<MaxIntLattice> in;
    ValueSet a = in.singleton(1, 10);
    ValueSet b = a | in.singleton(2, 20);
    CHECK(subset(a, b));
    CHECK_FALSE(subset(b, a));
    CHECK(subset(ValueSet{}, a));
}

TEST_CASE("bitset set operations") {
    Bitset256 s;
    CHECK(s.none());
    s.set(0);
    s.set(200);
    CHECK(s.count() == 2);
    CHECK(s.test(200));
    Bitset256 t;
    t.set(200);
    CHECK(t.subset_of(s));
    CHECK_FALSE(s.subset_of(t));
    std::vector<std::size_t> seen;
    s.for_each([&](std::size_t i) { seen.push_back(i); });
    CHECK(seen == std::vector<std::size_t>{0, 200});
    s.reset(0);
    CHECK(s == t);
}
