// Acceptance gate: runs the full safety batteries and the supporting oracles,
// then prints exactly one PASS/FAIL line per criterion.  Exit status is zero
// only if every criterion passes.
//
// Criteria 1, 2 and 6 currently fail by construction: when f equals its
// power-of-two padding (f in {2, 4} on these grids), two correct slaves of
// the same group can fix incomparable value sets at the base round, and the
// comparability and same-label audits report it.  The failing lines stay; see
// README "Acceptance status".

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bla/bla.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

struct Line {
    bool pass = false;
    int num = 0;
    std::string label;
    std::string detail;
};

std::uint64_t count_checks(const bla::BatteryResult& br,
                           std::initializer_list<const char*> names) {
    std::uint64_t total = 0;
    for (const char* name : names) {
        auto it = br.violations_by_check.find(name);
        if (it != br.violations_by_check.end()) total += it->second;
    }
    return total;
}

std::string check_counts(const bla::BatteryResult& a, const bla::BatteryResult& b,
                         std::initializer_list<const char*> names) {
    std::ostringstream os;
    bool first = true;
    for (const char* name : names) {
        std::uint64_t c = count_checks(a, {name}) + count_checks(b, {name});
        if (!first) os << " ";
        os << name << "=" << c;
        first = false;
    }
    return os.str();
}

bla::BatteryResult run_full_battery(bla::Variant variant, int seeds) {
    bla::BatteryConfig bc;
    bc.variant = variant;
    bc.seeds = seeds;
    const char* vn = variant == bla::Variant::Unauth ? "unauth" : "auth";
    auto progress = [vn](std::size_t done, std::size_t total) {
        if (done % 800 == 0 || done == total)
            std::fprintf(stderr, "acceptance: %s battery %zu/%zu\n", vn, done, total);
    };
    return bla::run_battery(bc, progress);
}

// The committed fault-free reference counts; every row must reproduce
// exactly.  Regenerate with `blasim baselines` after an intentional change.
bool baselines_match(const std::string& path, std::size_t& rows, std::string& err) {
    std::ifstream in(path);
    if (!in) {
        err = "baselines file missing: " + path;
        return false;
    }
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || doc.value("schema", 0) != 1 ||
        !doc.contains("rows")) {
        err = "baselines file malformed";
        return false;
    }
    rows = doc["rows"].size();
    if (rows == 0) {
        err = "baselines file empty";
        return false;
    }
    for (const auto& row : doc["rows"]) {
        bla::TrialConfig cfg;
        cfg.n = row["n"].get<int>();
        cfg.f = row["f"].get<int>();
        cfg.t = 0;
        cfg.variant = row["variant"].get<std::string>() == "auth" ? bla::Variant::Auth
                                                                  : bla::Variant::Unauth;
        cfg.strategy = bla::Strategy::Silent;
        cfg.seed = row["seed"].get<std::uint64_t>();
        auto res = bla::run_trial<bla::SetUnionLattice>(cfg);
        if (res.stats.sent_correct != row["sent_correct"].get<std::uint64_t>() ||
            res.stats.sent_total != row["sent_total"].get<std::uint64_t>()) {
            err = "row diverged: " + row.dump() +
                  " now sent_correct=" + std::to_string(res.stats.sent_correct) +
                  " sent_total=" + std::to_string(res.stats.sent_total);
            return false;
        }
    }
    return true;
}

struct ReplayProbe {
    int n, f, t;
    bla::Variant variant;
    bla::Strategy strategy;
    std::uint64_t seed;
};

}  // namespace

int main(int argc, char** argv) {
    std::string baselines_path = "tests/baselines.json";
    int seeds = 50;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--baselines" && i + 1 < argc) baselines_path = argv[++i];
        else if (a == "--seeds" && i + 1 < argc) seeds = std::atoi(argv[++i]);
        else {
            std::cerr << "usage: bla_acceptance [--baselines file] [--seeds n]\n";
            return 2;
        }
    }
    if (seeds < 1) {
        std::cerr << "acceptance: need at least one seed\n";
        return 2;
    }

    auto t0 = std::chrono::steady_clock::now();
    auto unauth = run_full_battery(bla::Variant::Unauth, seeds);
    auto auth = run_full_battery(bla::Variant::Auth, seeds);
    std::uint64_t trials = unauth.total + auth.total;

    std::vector<Line> lines;
    auto add = [&lines](int num, const char* label, bool pass, std::string detail) {
        lines.push_back({pass, num, label, std::move(detail)});
    };

    {
        std::ostringstream d;
        std::uint64_t bad =
            count_checks(unauth, {"comparability", "downward-validity", "upward-validity"});
        d << "comparability=" << count_checks(unauth, {"comparability"})
          << " downward-validity=" << count_checks(unauth, {"downward-validity"})
          << " upward-validity=" << count_checks(unauth, {"upward-validity"}) << " in "
          << unauth.total << " trials (" << static_cast<int>(unauth.wall_seconds) << "s)";
        add(1, "unauth safety battery", bad == 0, d.str());
    }
    {
        std::ostringstream d;
        std::uint64_t bad =
            count_checks(auth, {"comparability", "downward-validity", "upward-validity"});
        d << "comparability=" << count_checks(auth, {"comparability"})
          << " downward-validity=" << count_checks(auth, {"downward-validity"})
          << " upward-validity=" << count_checks(auth, {"upward-validity"}) << " in "
          << auth.total << " trials (" << static_cast<int>(auth.wall_seconds) << "s)";
        add(2, "auth safety battery", bad == 0, d.str());
    }
    {
        std::uint64_t term = unauth.terminated + auth.terminated;
        std::uint64_t check = count_checks(unauth, {"termination"}) +
                              count_checks(auth, {"termination"});
        std::ostringstream d;
        d << term << "/" << trials << " trials decided, drained and in budget; termination-check="
          << check;
        add(3, "termination", term == trials && check == 0, d.str());
    }
    {
        std::uint64_t bad = count_checks(unauth, {"round-structure"}) +
                            count_checks(auth, {"round-structure"});
        bool oracle = bla::TreeParams::make(6, 1).rounds == 1 &&
                      bla::TreeParams::make(16, 3).rounds == 2 &&
                      bla::TreeParams::make(21, 4).rounds == 2;
        std::ostringstream d;
        d << "round-structure=" << bad << " across " << trials
          << " trials; depth oracle " << (oracle ? "ok" : "BROKEN");
        add(4, "round count", bad == 0 && oracle, d.str());
    }
    {
        auto names = {"window",             "classify-master",    "classify-slave",
                      "group-height",       "slave-union-height", "slave-union-in-master",
                      "write-before-read"};
        std::uint64_t bad = count_checks(unauth, names) + count_checks(auth, names);
        std::ostringstream d;
        d << check_counts(unauth, auth, names) << " in " << trials << " trials";
        add(5, "trace invariants", bad == 0, d.str());
    }
    {
        std::uint64_t bad =
            count_checks(unauth, {"label-agreement"}) + count_checks(auth, {"label-agreement"});
        std::ostringstream d;
        d << "label-agreement=" << bad << " in " << trials << " trials";
        add(6, "same-label equality", bad == 0, d.str());
    }
    {
        bla::EnumConfig ec;
        auto er = bla::enumerate_brb_schedules(ec);
        std::ostringstream d;
        d << er.schedules << " schedules, agreement failures " << er.agreement_failures
          << ", duplicate deliveries " << er.deliver_twice << ", totality failures "
          << er.totality_failures << ", " << er.delivered_a << " all-A / " << er.delivered_b
          << " all-B endings";
        add(7, "broadcast enumeration", er.ok() && er.schedules >= 10000, d.str());
    }
    {
        std::uint64_t bound_checks =
            count_checks(unauth, {"message-bound"}) + count_checks(auth, {"message-bound"});
        double ratio = std::max(unauth.max_bound_ratio, auth.max_bound_ratio);
        std::size_t rows = 0;
        std::string err;
        bool base_ok = baselines_match(baselines_path, rows, err);
        std::ostringstream d;
        d << "max ratio " << ratio << " of 16n^3(L+1), message-bound=" << bound_checks << ", ";
        if (base_ok)
            d << rows << "/" << rows << " baseline rows reproduced";
        else
            d << "baselines: " << err;
        add(8, "message bound and baselines", ratio <= 1.0 && bound_checks == 0 && base_ok,
            d.str());
    }
    {
        bool all = true;
        std::ostringstream d;
        bool first = true;
        for (const auto& mp : bla::mutation_pairs()) {
            auto out = bla::run_mutation_pair(mp, seeds);
            all = all && out.total_violations >= 1;
            if (!first) d << " ";
            d << mp.name << "=" << out.total_violations;
            first = false;
            std::fprintf(stderr, "acceptance: mutation %s done\n", mp.name);
        }
        add(9, "mutation sensitivity", all, d.str() + " violations caught");
    }
    {
        const ReplayProbe probes[] = {
            {6, 1, 1, bla::Variant::Unauth, bla::Strategy::Equivocator, 0},
            {11, 2, 2, bla::Variant::Unauth, bla::Strategy::JunkAcks, 1},
            {16, 3, 3, bla::Variant::Unauth, bla::Strategy::FakeSlave, 2},
            {21, 4, 4, bla::Variant::Unauth, bla::Strategy::StaleProof, 3},
            {4, 1, 1, bla::Variant::Auth, bla::Strategy::ValueInjector, 4},
            {7, 2, 2, bla::Variant::Auth, bla::Strategy::ReadBeforeWrite, 5},
            {10, 3, 3, bla::Variant::Auth, bla::Strategy::RushingMaster, 6},
            {13, 4, 4, bla::Variant::Auth, bla::Strategy::Equivocator, 7},
        };
        int matched = 0, total = 0;
        for (const auto& p : probes) {
            bla::TrialConfig cfg;
            cfg.n = p.n;
            cfg.f = p.f;
            cfg.t = p.t;
            cfg.variant = p.variant;
            cfg.strategy = p.strategy;
            cfg.seed = p.seed;
            auto a = bla::run_trial<bla::SetUnionLattice>(cfg);
            auto b = bla::run_trial<bla::SetUnionLattice>(cfg);
            ++total;
            if (a.trace_digest == b.trace_digest && a.trace_digest != 0) ++matched;
        }
        std::ostringstream d;
        d << matched << "/" << total << " replayed trials gave identical trace digests";
        add(10, "determinism", matched == total, d.str());
    }

    int passed = 0;
    for (const auto& l : lines) {
        std::printf("%s  [%2d] %s: %s\n", l.pass ? "PASS" : "FAIL", l.num, l.label.c_str(),
                    l.detail.c_str());
        if (l.pass) ++passed;
    }
    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("acceptance: %d/10 criteria passed in %.1fs\n", passed,
                static_cast<double>(wall));
    if (passed < 10)
        std::fprintf(stderr,
                     "acceptance: failing lines are expected for f in {2, 4}; see README "
                     "\"Acceptance status\"\n");
    return passed == 10 ? 0 : 1;
}
