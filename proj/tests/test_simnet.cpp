#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "bla/bla.hpp"

using namespace bla;

namespace {

using L = SetUnionLattice;

Message tagged(int id, Wire w = Wire::Wack) {
    Message m;
    m.wire = w;
    m.from = 2;
    m.to = static_cast<Pid>(1 + (id % 5));
    m.ack.r = static_cast<int16_t>(id);  // test-only marker, never handled
    return m;
}

std::vector<int> drain_order(Scheduler& s) {
    std::vector<int> order;
    Message m;
    while (s.pop(m)) order.push_back(m.ack.r);
    return order;
}

// A self-contained honest simulation, everything seeded from `seed`.
struct Run {
    ValueInterner<L> in;
    SignatureRegistry reg;
    Trace tr;
    Simulation<L> sim;
    SimStats stats;

    Run(int n, int f, int t, Variant variant, NetConfig net, uint64_t seed,
        Strategy strategy = Strategy::Silent)
        : sim(TreeParams::make(n, f), variant, Mutations{}, net, strategy, t, seed,
              [](Pid p) { return L::make({"in:" + std::to_string(p)}); }, &in, &reg, &tr) {
        stats = sim.run();
    }
};

}  // namespace

TEST_CASE("the scheduler delivers every queued message exactly once") {
    Scheduler s(NetConfig{DelayModel::Uniform, 10, 10}, 42);
    for (int i = 0; i < 40; ++i) s.push(tagged(i), 0);
    CHECK(s.pending() == 40);
    auto order = drain_order(s);
    CHECK(s.pending() == 0);
    REQUIRE(order.size() == 40);
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 40; ++i) CHECK(sorted[static_cast<size_t>(i)] == i);
}

TEST_CASE("scheduling is a pure function of config and seed") {
    auto play = [](uint64_t seed) {
        Scheduler s(NetConfig{DelayModel::Uniform, 10, 10}, seed);
        for (int i = 0; i < 60; ++i) s.push(tagged(i), static_cast<uint64_t>(i / 4));
        return drain_order(s);
    };
    CHECK(play(7) == play(7));
    CHECK(play(7) != play(8));  // pinned pair, checked to diverge
}

TEST_CASE("uniform delays stay inside the spread window") {
    // A message sent at time 1000 can never overtake one sent at time 0
    // when the spread is 10: their delivery windows do not overlap.
    Scheduler s(NetConfig{DelayModel::Uniform, 10, 10}, 3);
    s.push(tagged(1), 1000);
    s.push(tagged(2), 0);
    Message m;
    REQUIRE(s.pop(m));
    CHECK(m.ack.r == 2);
    REQUIRE(s.pop(m));
    CHECK(m.ack.r == 1);
}

TEST_CASE("the adversarial scheduler cannot defer past the fairness bound") {
    const int D = 5;
    Scheduler s(NetConfig{DelayModel::Adversarial, 10, D}, 11);
    for (int i = 0; i < 30; ++i) s.push(tagged(i), 0);
    auto order = drain_order(s);
    REQUIRE(order.size() == 30);
    CHECK(s.max_deferral() <= D);
    // The adversarial model does reorder: the pinned seed produces a
    // non-FIFO prefix, so the bound above is doing real work.
    bool fifo = true;
    for (size_t i = 0; i < order.size(); ++i)
        if (order[i] != static_cast<int>(i)) fifo = false;
    CHECK_FALSE(fifo);
}

TEST_CASE("the delivery budget is pinned to the configuration") {
    Run a(6, 1, 0, Variant::Unauth, NetConfig{}, 1);
    CHECK(a.sim.step_budget() == 27648);  // 64 * 6^3 * (1+1)
    Run b(10, 3, 0, Variant::Auth, NetConfig{}, 1);
    CHECK(b.sim.step_budget() == 192000);  // 64 * 10^3 * (2+1)
}

TEST_CASE("an honest run drains, decides, and stays inside the budget") {
    Run r(6, 1, 0, Variant::Unauth, NetConfig{DelayModel::Uniform, 10, 10}, 5);
    CHECK(r.stats.drained);
    CHECK_FALSE(r.stats.budget_exceeded);
    CHECK(r.sim.all_decided());
    CHECK(r.stats.steps < r.sim.step_budget());
    CHECK(r.stats.sent_byz == 0);
    CHECK(r.stats.dropped == 0);
    uint64_t by_wire = 0;
    for (uint64_t c : r.stats.sent_by_wire) by_wire += c;
    CHECK(by_wire == r.stats.sent_total);
    for (Pid p = 1; p <= 6; ++p) {
        CHECK(r.sim.process(p).decided());
        CHECK(r.sim.process(p).rounds_executed() == 1);
    }
}

TEST_CASE("identical seeds replay the identical trace") {
    NetConfig net{DelayModel::Adversarial, 10, 10};
    Run a(7, 2, 2, Variant::Auth, net, 123, Strategy::Equivocator);
    Run b(7, 2, 2, Variant::Auth, net, 123, Strategy::Equivocator);
    CHECK(a.tr.digest() == b.tr.digest());
    CHECK(a.stats.sent_total == b.stats.sent_total);
    CHECK(a.stats.steps == b.stats.steps);

    Run c(7, 2, 2, Variant::Auth, net, 124, Strategy::Equivocator);
    CHECK(a.tr.digest() != c.tr.digest());  // pinned pair, checked to diverge
}

TEST_CASE("faulty destinations are routed to the adversary, not the network") {
    Run r(6, 1, 1, Variant::Unauth, NetConfig{DelayModel::Uniform, 10, 10}, 9);
    CHECK(r.sim.correct_count() == 5);
    CHECK_FALSE(r.sim.is_byz(1));
    CHECK(r.sim.is_byz(6));
    // The silent adversary swallowed its traffic and sent nothing.
    CHECK(r.stats.sent_byz == 0);
    CHECK(r.stats.drained);
    // The correct majority still terminates without the sixth process.
    CHECK(r.sim.all_decided());
    for (Pid p = 1; p <= 5; ++p) CHECK(r.sim.process(p).decided());
}

TEST_CASE("adversarial delivery under the default bound still terminates") {
    Run r(6, 1, 1, Variant::Unauth, NetConfig{DelayModel::Adversarial, 10, 10}, 17);
    CHECK(r.stats.drained);
    CHECK(r.sim.all_decided());
    CHECK(r.stats.max_deferral <= 10);
}
