// blasim: command-line driver for the agreement simulator.
//
// Default mode runs a batch of trials for one configuration and writes a
// results JSON document.  The `battery` subcommand sweeps the full grid the
// test suite uses, and `baselines` regenerates the committed message-count
// regression file.
//
// Exit codes: 0 all clean, 1 audit violations, 2 configuration error,
// 3 non-termination (a trial missed the step budget or left messages queued).

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bla/bla.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

struct RunOptions {
    int n = 6;
    int f = 1;
    int t = 0;
    std::string variant = "unauth";
    std::string adversary = "silent";
    std::uint64_t seed = 0;
    int trials = 1;
    std::string delay;  // empty: rotate by seed; else "uniform" or "adversarial"
    int spread = 10;
    int fairness_D = 10;
    std::string lattice = "set";
    std::string trace_path;
    std::string out_path;
    bool check = true;
    std::string mutation = "none";
};

int fail_config(const std::string& msg) {
    std::cerr << "blasim: " << msg << "\n";
    return 2;
}

bool parse_variant(const std::string& s, bla::Variant& out) {
    if (s == "unauth") {
        out = bla::Variant::Unauth;
        return true;
    }
    if (s == "auth") {
        out = bla::Variant::Auth;
        return true;
    }
    return false;
}

bool parse_mutation(const std::string& s, bla::Mutations& out) {
    if (s == "none") {
        out = {};
        return true;
    }
    for (const auto& mp : bla::mutation_pairs()) {
        if (s == mp.name) {
            out = mp.mut;
            return true;
        }
    }
    return false;
}

// Flat JSON config file; command-line flags override individual keys.
bool load_config_file(const std::string& path, RunOptions& o, std::string& err) {
    std::ifstream in(path);
    if (!in) {
        err = "cannot open config file: " + path;
        return false;
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        err = "config file is not a JSON object: " + path;
        return false;
    }
    try {
        if (j.contains("n")) o.n = j["n"].get<int>();
        if (j.contains("f")) o.f = j["f"].get<int>();
        if (j.contains("t")) o.t = j["t"].get<int>();
        if (j.contains("variant")) o.variant = j["variant"].get<std::string>();
        if (j.contains("adversary")) o.adversary = j["adversary"].get<std::string>();
        if (j.contains("seed")) o.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("trials")) o.trials = j["trials"].get<int>();
        if (j.contains("delay")) o.delay = j["delay"].get<std::string>();
        if (j.contains("spread")) o.spread = j["spread"].get<int>();
        if (j.contains("fairness_D")) o.fairness_D = j["fairness_D"].get<int>();
        if (j.contains("lattice")) o.lattice = j["lattice"].get<std::string>();
        if (j.contains("trace")) o.trace_path = j["trace"].get<std::string>();
        if (j.contains("out")) o.out_path = j["out"].get<std::string>();
        if (j.contains("check")) o.check = j["check"].get<bool>();
        if (j.contains("mutation")) o.mutation = j["mutation"].get<std::string>();
    } catch (const json::exception& e) {
        err = std::string("bad config value: ") + e.what();
        return false;
    }
    return true;
}

std::string trace_file_for(const std::string& base, int trial_index) {
    if (trial_index == 0) return base;
    auto dot = base.find_last_of('.');
    std::string stem = dot == std::string::npos ? base : base.substr(0, dot);
    std::string ext = dot == std::string::npos ? "" : base.substr(dot);
    return stem + "." + std::to_string(trial_index) + ext;
}

struct TrialRow {
    std::uint64_t seed = 0;
    bool terminated = false;
    int rounds = 0;
    std::uint64_t messages = 0;
    std::uint64_t sent_correct = 0;
    std::uint64_t sent_byz = 0;
    std::uint64_t dropped = 0;
    std::uint64_t max_deferral = 0;
    std::size_t violations = 0;
    std::string first_violation;
    std::uint64_t trace_digest = 0;
    double wall_ms = 0.0;
};

template <bla::JoinLattice L>
TrialRow run_one(const RunOptions& o, std::uint64_t seed, const bla::NetConfig* net,
                 bla::Variant variant, bla::Strategy strategy, const bla::Mutations& mut,
                 int trial_index) {
    bla::TrialConfig cfg;
    cfg.n = o.n;
    cfg.f = o.f;
    cfg.t = o.t;
    cfg.variant = variant;
    cfg.strategy = strategy;
    cfg.mut = mut;
    cfg.seed = seed;
    if (net) {
        cfg.net_explicit = true;
        cfg.net = *net;
    }

    bla::Trace trace;
    bla::Trace* keep = o.trace_path.empty() ? nullptr : &trace;
    auto t0 = std::chrono::steady_clock::now();
    auto res = bla::run_trial<L>(cfg, keep);
    auto t1 = std::chrono::steady_clock::now();

    if (keep) {
        std::ofstream tf(trace_file_for(o.trace_path, trial_index));
        trace.write_jsonl(tf);
    }

    TrialRow row;
    row.seed = seed;
    row.terminated = res.terminated;
    for (int r : res.rounds_exec)
        if (r > row.rounds) row.rounds = r;
    row.messages = res.stats.sent_total;
    row.sent_correct = res.stats.sent_correct;
    row.sent_byz = res.stats.sent_byz;
    row.dropped = res.stats.dropped;
    row.max_deferral = res.stats.max_deferral;
    row.violations = res.report.violations.size();
    if (!res.report.violations.empty())
        row.first_violation = std::string(res.report.violations[0].check) + ": " +
                              res.report.violations[0].detail;
    row.trace_digest = res.trace_digest;
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return row;
}

int cmd_run(const RunOptions& o) {
    bla::Variant variant;
    if (!parse_variant(o.variant, variant)) return fail_config("unknown variant: " + o.variant);
    bla::Strategy strategy;
    if (!bla::strategy_from_string(o.adversary, strategy))
        return fail_config("unknown adversary strategy: " + o.adversary);
    bla::Mutations mut;
    if (!parse_mutation(o.mutation, mut)) return fail_config("unknown mutation: " + o.mutation);
    if (o.lattice != "set" && o.lattice != "max")
        return fail_config("unknown lattice: " + o.lattice + " (expected set or max)");
    if (o.f < 0 || o.t < 0 || o.t > o.f) return fail_config("need 0 <= t <= f");
    int need = variant == bla::Variant::Unauth ? 5 * o.f + 1 : 3 * o.f + 1;
    if (o.n < need || o.n < 2)
        return fail_config("n=" + std::to_string(o.n) + " too small for f=" + std::to_string(o.f) +
                           " (need at least " + std::to_string(need) + ")");
    if (o.trials < 1) return fail_config("need at least one trial");
    if (o.spread < 1 || o.fairness_D < 1) return fail_config("spread and fairness-D must be >= 1");

    std::optional<bla::NetConfig> net;
    if (!o.delay.empty()) {
        bla::NetConfig nc;
        if (o.delay == "uniform") {
            nc.model = bla::DelayModel::Uniform;
            nc.spread = o.spread;
        } else if (o.delay == "adversarial") {
            nc.model = bla::DelayModel::Adversarial;
            nc.fairness_D = o.fairness_D;
        } else {
            return fail_config("unknown delay model: " + o.delay);
        }
        net = nc;
    }

    std::vector<TrialRow> rows;
    rows.reserve(static_cast<std::size_t>(o.trials));
    for (int i = 0; i < o.trials; ++i) {
        std::uint64_t seed = o.seed + static_cast<std::uint64_t>(i);
        const bla::NetConfig* np = net ? &*net : nullptr;
        if (o.lattice == "set")
            rows.push_back(run_one<bla::SetUnionLattice>(o, seed, np, variant, strategy, mut, i));
        else
            rows.push_back(run_one<bla::MaxIntLattice>(o, seed, np, variant, strategy, mut, i));
    }

    std::size_t total_violations = 0;
    int max_rounds = 0;
    std::uint64_t max_messages = 0;
    double wall_ms = 0.0;
    bool all_terminated = true;
    for (const auto& r : rows) {
        total_violations += r.violations;
        if (r.rounds > max_rounds) max_rounds = r.rounds;
        if (r.messages > max_messages) max_messages = r.messages;
        wall_ms += r.wall_ms;
        all_terminated = all_terminated && r.terminated;
    }

    json doc;
    doc["config"] = {{"n", o.n},
                     {"f", o.f},
                     {"t", o.t},
                     {"variant", o.variant},
                     {"adversary", o.adversary},
                     {"seed", o.seed},
                     {"trials", o.trials},
                     {"delay", o.delay.empty() ? "seed-rotated" : o.delay},
                     {"spread", o.spread},
                     {"fairness_D", o.fairness_D},
                     {"lattice", o.lattice},
                     {"mutation", o.mutation},
                     {"check", o.check}};
    doc["per_trial"] = json::array();
    for (const auto& r : rows) {
        json row = {{"seed", r.seed},
                    {"terminated", r.terminated},
                    {"rounds", r.rounds},
                    {"messages", r.messages},
                    {"sent_correct", r.sent_correct},
                    {"sent_byz", r.sent_byz},
                    {"dropped", r.dropped},
                    {"max_deferral", r.max_deferral},
                    {"violations", r.violations},
                    {"trace_digest", r.trace_digest},
                    {"wall_ms", r.wall_ms}};
        if (!r.first_violation.empty()) row["first_violation"] = r.first_violation;
        doc["per_trial"].push_back(std::move(row));
    }
    doc["summary"] = {{"violations", total_violations},
                      {"max_rounds", max_rounds},
                      {"max_messages", max_messages},
                      {"wall_ms", wall_ms}};

    if (o.out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::ofstream out(o.out_path);
        if (!out) return fail_config("cannot write results file: " + o.out_path);
        out << doc.dump(2) << "\n";
        std::cerr << "blasim: wrote " << o.out_path << "\n";
    }
    std::cerr << "blasim: " << o.trials << " trial(s), " << total_violations << " violation(s), "
              << (all_terminated ? "all terminated" : "NON-TERMINATION") << "\n";

    if (!all_terminated) return 3;
    if (o.check && total_violations > 0) return 1;
    return 0;
}

int cmd_battery(const std::string& variant_sel, int seeds, std::uint64_t seed_base,
                const std::string& adversary, const std::string& out_path) {
    std::vector<bla::Variant> variants;
    if (variant_sel == "both") {
        variants = {bla::Variant::Unauth, bla::Variant::Auth};
    } else {
        bla::Variant v;
        if (!parse_variant(variant_sel, v))
            return fail_config("unknown variant: " + variant_sel);
        variants = {v};
    }
    std::vector<bla::Strategy> strategies = bla::all_strategies();
    if (!adversary.empty()) {
        bla::Strategy s;
        if (!bla::strategy_from_string(adversary, s))
            return fail_config("unknown adversary strategy: " + adversary);
        strategies = {s};
    }
    if (seeds < 1) return fail_config("need at least one seed");

    json doc;
    doc["batteries"] = json::array();
    bool any_violation = false;
    bool any_nonterm = false;
    for (bla::Variant v : variants) {
        bla::BatteryConfig bc;
        bc.variant = v;
        bc.seeds = seeds;
        bc.seed_base = seed_base;
        bc.strategies = strategies;
        auto br = bla::run_battery(bc);
        const char* vn = v == bla::Variant::Unauth ? "unauth" : "auth";
        std::cout << vn << ": " << br.total << " trials, " << br.terminated << " terminated, "
                  << br.checks_clean << " clean, max bound ratio " << br.max_bound_ratio << ", "
                  << br.wall_seconds << "s\n";
        for (const auto& [check, count] : br.violations_by_check)
            std::cout << "  " << check << ": " << count << "\n";
        any_nonterm = any_nonterm || br.terminated != br.total;
        any_violation = any_violation || br.checks_clean != br.total;
        json entry = {{"variant", vn},
                      {"total", br.total},
                      {"terminated", br.terminated},
                      {"checks_clean", br.checks_clean},
                      {"max_bound_ratio", br.max_bound_ratio},
                      {"wall_s", br.wall_seconds}};
        entry["violations_by_check"] = json::object();
        for (const auto& [check, count] : br.violations_by_check)
            entry["violations_by_check"][check] = count;
        doc["batteries"].push_back(std::move(entry));
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) return fail_config("cannot write results file: " + out_path);
        out << doc.dump(2) << "\n";
        std::cerr << "blasim: wrote " << out_path << "\n";
    }
    if (any_nonterm) return 3;
    if (any_violation) return 1;
    return 0;
}

// Honest fault-free reference runs, one per grid row.  The committed file
// pins the exact correct-process message count so refactors that change
// traffic show up in review.
int cmd_baselines(const std::string& out_path) {
    json rows = json::array();
    bool ok = true;
    for (bla::Variant v : {bla::Variant::Unauth, bla::Variant::Auth}) {
        for (int n : bla::grid_ns(v)) {
            bla::TrialConfig cfg;
            cfg.n = n;
            cfg.f = bla::grid_f(v, n);
            cfg.t = 0;
            cfg.variant = v;
            cfg.strategy = bla::Strategy::Silent;
            cfg.seed = 0;
            auto res = bla::run_trial<bla::SetUnionLattice>(cfg);
            ok = ok && res.terminated && res.report.ok();
            json row = {{"variant", v == bla::Variant::Unauth ? "unauth" : "auth"},
                        {"n", n},
                        {"f", cfg.f},
                        {"seed", 0},
                        {"sent_correct", res.stats.sent_correct},
                        {"sent_total", res.stats.sent_total}};
            std::cerr << row.dump() << "\n";
            rows.push_back(std::move(row));
        }
    }
    json doc = {{"schema", 1}, {"rows", std::move(rows)}};
    std::ofstream out(out_path);
    if (!out) return fail_config("cannot write baselines file: " + out_path);
    out << doc.dump(2) << "\n";
    std::cerr << "blasim: wrote " << out_path << "\n";
    return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    RunOptions o;

    // The config file provides defaults, so it has to be read before CLI11
    // assigns flag values over them.
    std::string config_path;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    }
    if (!config_path.empty()) {
        std::string err;
        if (!load_config_file(config_path, o, err)) return fail_config(err);
    }

    CLI::App app{"byzantine lattice agreement simulator"};
    app.add_option("--config", config_path, "flat JSON config file; flags override its keys");
    app.add_option("--n", o.n, "process count");
    app.add_option("--f", o.f, "fault tolerance bound");
    app.add_option("--t", o.t, "actual faulty count (t <= f)");
    app.add_option("--variant", o.variant, "unauth or auth");
    app.add_option("--adversary", o.adversary, "faulty-process strategy name");
    app.add_option("--seed", o.seed, "base seed; trial i uses seed+i");
    app.add_option("--trials", o.trials, "number of trials");
    app.add_option("--delay", o.delay, "uniform or adversarial (default: rotate by seed)");
    app.add_option("--spread", o.spread, "uniform delay window");
    app.add_option("--fairness-D", o.fairness_D, "adversarial scheduler deferral bound");
    app.add_option("--lattice", o.lattice, "set or max");
    app.add_option("--trace", o.trace_path, "write per-trial JSONL traces here");
    app.add_option("--out", o.out_path, "write results JSON here (default: stdout)");
    app.add_flag("--check,!--no-check", o.check, "audit traces and outputs (default on)");
    app.add_option("--mutation", o.mutation, "guard to disable: none or a catalog name");

    auto* battery = app.add_subcommand("battery", "run the full grid battery");
    std::string b_variant = "both";
    int b_seeds = 50;
    std::uint64_t b_seed_base = 0;
    std::string b_adversary;
    std::string b_out;
    battery->add_option("--variant", b_variant, "unauth, auth, or both");
    battery->add_option("--seeds", b_seeds, "seeds per grid cell");
    battery->add_option("--seed-base", b_seed_base, "first seed");
    battery->add_option("--adversary", b_adversary, "restrict to one strategy");
    battery->add_option("--out", b_out, "write battery summary JSON here");

    auto* baselines = app.add_subcommand("baselines", "regenerate the message-count baselines");
    std::string base_out = "tests/baselines.json";
    baselines->add_option("--out", base_out, "output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (battery->parsed()) return cmd_battery(b_variant, b_seeds, b_seed_base, b_adversary, b_out);
    if (baselines->parsed()) return cmd_baselines(base_out);
    return cmd_run(o);
}
