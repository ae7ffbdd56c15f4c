#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "bla/bla.hpp"

using namespace bla;

namespace {

TrialConfig cfg_of(int n, int f, int t, Variant v, Strategy s, uint64_t seed) {
    TrialConfig c;
    c.n = n;
    c.f = f;
    c.t = t;
    c.variant = v;
    c.strategy = s;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("strategy names round-trip") {
    for (Strategy s : all_strategies()) {
        Strategy back{};
        REQUIRE(strategy_from_string(strategy_name(s), back));
        CHECK(back == s);
    }
    Strategy out{};
    CHECK_FALSE(strategy_from_string("nonsense", out));
    CHECK(all_strategies().size() == 8);
}

TEST_CASE("every strategy is survivable while the guards are on") {
    // With validity gates intact, a full-strength adversary may slow things
    // down but never corrupts safety and never blocks the honest majority.
    auto strategy = GENERATE(from_range(all_strategies()));

    SECTION("unauthenticated, n=6") {
        auto res = run_trial<SetUnionLattice>(cfg_of(6, 1, 1, Variant::Unauth, strategy, 2));
        INFO(strategy_name(strategy));
        CHECK(res.terminated);
        CHECK(res.report.ok());
    }

    SECTION("authenticated, n=7") {
        auto res = run_trial<SetUnionLattice>(cfg_of(7, 2, 2, Variant::Auth, strategy, 2));
        INFO(strategy_name(strategy));
        CHECK(res.terminated);
        CHECK(res.report.ok());
    }
}

TEST_CASE("attacks are inert without their faulty quota") {
    // t = 0 leaves every strategy with no process to act through.
    auto strategy = GENERATE(from_range(all_strategies()));
    auto res = run_trial<SetUnionLattice>(cfg_of(6, 1, 0, Variant::Unauth, strategy, 3));
    INFO(strategy_name(strategy));
    CHECK(res.terminated);
    CHECK(res.report.ok());
    CHECK(res.stats.sent_byz == 0);
}

TEST_CASE("each mutation pair defeats exactly the guard it targets") {
    // Dropping a guard and replaying its matching attack must produce audit
    // violations somewhere in the grid; this is the sensitivity half of the
    // guard-and-attack pairing.
    auto mp = GENERATE(from_range(mutation_pairs()));
    auto out = run_mutation_pair(mp, /*seeds=*/3);
    INFO(mp.name);
    CHECK(out.trials > 0);
    CHECK(out.trials_with_violations > 0);
    CHECK(out.total_violations > 0);
}

TEST_CASE("the adversary cannot forge what the registry never signed") {
    // Auth runs under every strategy end with an audit of accepted
    // certificates against the registry log; a clean report here means no
    // fabricated signature was ever accepted by a correct process.
    auto strategy = GENERATE(Strategy::JunkAcks, Strategy::FakeSlave, Strategy::StaleProof);
    auto res = run_trial<SetUnionLattice>(cfg_of(10, 3, 3, Variant::Auth, strategy, 5));
    INFO(strategy_name(strategy));
    CHECK(res.terminated);
    CHECK(res.report.ok());
}

TEST_CASE("adversary traffic is deterministic per seed") {
    auto a = run_trial<SetUnionLattice>(cfg_of(7, 2, 2, Variant::Auth, Strategy::ValueInjector, 11));
    auto b = run_trial<SetUnionLattice>(cfg_of(7, 2, 2, Variant::Auth, Strategy::ValueInjector, 11));
    CHECK(a.trace_digest == b.trace_digest);
    CHECK(a.stats.sent_byz == b.stats.sent_byz);
    CHECK(a.stats.sent_byz > 0);  // the injector does act
}
