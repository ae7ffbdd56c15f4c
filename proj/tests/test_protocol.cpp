#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "bla/bla.hpp"

using namespace bla;

namespace {

// End-to-end honest-network runs on small configurations, checking the
// agreement guarantees straight off the process outputs.

template <class L>
struct Outcome {
    std::vector<typename L::Element> y;  // by correct pid, index 0 unused
    std::vector<int> label_x2;
    std::vector<int> rounds;
    typename L::Element everything;  // join of all correct inputs
    bool drained = false;
    bool decided = false;
};

template <class L>
Outcome<L> run(int n, int f, int t, Variant variant, uint64_t seed,
               std::function<typename L::Element(Pid)> input_of,
               Strategy strategy = Strategy::Silent) {
    ValueInterner<L> in;
    SignatureRegistry reg;
    Simulation<L> sim(TreeParams::make(n, f), variant, Mutations{}, NetConfig{}, strategy, t, seed,
                      input_of, &in, &reg, nullptr);
    SimStats st = sim.run();
    Outcome<L> out;
    out.drained = st.drained && !st.budget_exceeded;
    out.decided = sim.all_decided();
    out.y.resize(static_cast<size_t>(n - t) + 1);
    out.label_x2.resize(static_cast<size_t>(n - t) + 1);
    out.rounds.resize(static_cast<size_t>(n - t) + 1);
    out.everything = L::bottom();
    for (Pid p = 1; p <= n - t; ++p) {
        out.y[static_cast<size_t>(p)] = sim.process(p).output().y;
        out.label_x2[static_cast<size_t>(p)] = sim.process(p).output().final_label_x2;
        out.rounds[static_cast<size_t>(p)] = sim.process(p).rounds_executed();
        out.everything = L::join(out.everything, input_of(p));
    }
    return out;
}

std::function<SetUnionLattice::Element(Pid)> set_inputs() {
    return [](Pid p) { return SetUnionLattice::make({"in:" + std::to_string(p)}); };
}

}  // namespace

TEST_CASE("honest set-union runs satisfy all three agreement clauses") {
    // f = 1 and f = 3 configurations; 2 and 4 have a known same-group
    // weakness at the base round and are exercised by the acceptance battery.
    struct Cfg { int n, f; Variant v; };
    auto cfg = GENERATE(Cfg{6, 1, Variant::Unauth}, Cfg{16, 3, Variant::Unauth},
                        Cfg{4, 1, Variant::Auth}, Cfg{10, 3, Variant::Auth});
    auto seed = GENERATE(as<uint64_t>{}, 1, 2, 3);

    auto out = run<SetUnionLattice>(cfg.n, cfg.f, 0, cfg.v, seed, set_inputs());
    REQUIRE(out.drained);
    REQUIRE(out.decided);
    for (Pid p = 1; p <= cfg.n; ++p) {
        // Downward validity: the own input is reflected in the output.
        CHECK(SetUnionLattice::leq(set_inputs()(p), out.y[static_cast<size_t>(p)]));
        // Upward validity: nothing beyond the joined inputs appears.
        CHECK(SetUnionLattice::leq(out.y[static_cast<size_t>(p)], out.everything));
        // Round count is fixed by the tree, not the schedule.
        CHECK(out.rounds[static_cast<size_t>(p)] == TreeParams::make(cfg.n, cfg.f).rounds);
    }
    // Comparability: outputs form a chain.
    for (Pid a = 1; a <= cfg.n; ++a)
        for (Pid b = 1; b <= cfg.n; ++b) {
            const auto& ya = out.y[static_cast<size_t>(a)];
            const auto& yb = out.y[static_cast<size_t>(b)];
            CHECK((SetUnionLattice::leq(ya, yb) || SetUnionLattice::leq(yb, ya)));
        }
}

TEST_CASE("processes ending on the same leaf hold the same value") {
    auto seed = GENERATE(as<uint64_t>{}, 4, 5, 6, 7);
    auto out = run<SetUnionLattice>(6, 1, 0, Variant::Unauth, seed, set_inputs());
    REQUIRE(out.decided);
    for (Pid a = 1; a <= 6; ++a)
        for (Pid b = 1; b <= 6; ++b)
            if (out.label_x2[static_cast<size_t>(a)] == out.label_x2[static_cast<size_t>(b)])
                CHECK(out.y[static_cast<size_t>(a)] == out.y[static_cast<size_t>(b)]);
}

TEST_CASE("a fault-free tree has no classifier rounds and everyone agrees exactly") {
    auto out = run<SetUnionLattice>(8, 0, 0, Variant::Unauth, 9, set_inputs());
    REQUIRE(out.drained);
    REQUIRE(out.decided);
    for (Pid p = 1; p <= 8; ++p) {
        CHECK(out.rounds[static_cast<size_t>(p)] == 0);
        // With f = 0 the input phase waits for every input, so the output is
        // the full join everywhere.
        CHECK(out.y[static_cast<size_t>(p)] == out.everything);
    }
}

TEST_CASE("the max lattice agrees just as well") {
    auto input = [](Pid p) { return static_cast<int64_t>(p * 10 + 1); };
    auto seed = GENERATE(as<uint64_t>{}, 10, 11);
    auto out = run<MaxIntLattice>(6, 1, 0, Variant::Unauth, seed, input);
    REQUIRE(out.decided);
    for (Pid p = 1; p <= 6; ++p) {
        CHECK(out.y[static_cast<size_t>(p)] >= input(p));
        CHECK(out.y[static_cast<size_t>(p)] <= 61);
    }
    for (Pid a = 1; a <= 6; ++a)
        for (Pid b = 1; b <= 6; ++b)
            CHECK((out.y[static_cast<size_t>(a)] <= out.y[static_cast<size_t>(b)] ||
                   out.y[static_cast<size_t>(b)] <= out.y[static_cast<size_t>(a)]));
}

TEST_CASE("silent faults slow nobody down") {
    struct Cfg { int n, f; Variant v; };
    auto cfg = GENERATE(Cfg{6, 1, Variant::Unauth}, Cfg{16, 3, Variant::Unauth},
                        Cfg{10, 3, Variant::Auth});
    auto out = run<SetUnionLattice>(cfg.n, cfg.f, cfg.f, cfg.v, 13, set_inputs());
    REQUIRE(out.drained);
    REQUIRE(out.decided);
    int nc = cfg.n - cfg.f;
    for (Pid p = 1; p <= nc; ++p)
        CHECK(SetUnionLattice::leq(set_inputs()(p), out.y[static_cast<size_t>(p)]));
    for (Pid a = 1; a <= nc; ++a)
        for (Pid b = 1; b <= nc; ++b) {
            const auto& ya = out.y[static_cast<size_t>(a)];
            const auto& yb = out.y[static_cast<size_t>(b)];
            CHECK((SetUnionLattice::leq(ya, yb) || SetUnionLattice::leq(yb, ya)));
        }
}

TEST_CASE("outputs only ever grow along the rounds") {
    // The decided value sits above the round-1 value set: monotonicity of V
    // across classifier rounds, observed at the ends.
    ValueInterner<SetUnionLattice> in;
    SignatureRegistry reg;
    Trace tr;
    Simulation<SetUnionLattice> sim(TreeParams::make(16, 3), Variant::Unauth, Mutations{},
                                    NetConfig{}, Strategy::Silent, 0, 21, set_inputs(), &in, &reg,
                                    &tr);
    sim.run();
    REQUIRE(sim.all_decided());
    // Reconstruct each process's round-1 starting set from the trace and
    // check containment in its final set.
    std::vector<ValueSet> v1(17);
    for (const auto& e : tr.events)
        if (e.kind == Ev::V1Fixed) v1[static_cast<size_t>(e.from)] = e.vs;
    for (Pid p = 1; p <= 16; ++p) {
        REQUIRE(v1[static_cast<size_t>(p)].count() >= 13);
        CHECK(subset(v1[static_cast<size_t>(p)], sim.process(p).output().value_set));
    }
}
