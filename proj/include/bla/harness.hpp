#pragma once
// Trial and battery orchestration.
//
// A trial is one complete run: fixed (n, f, t), variant, strategy, delivery
// discipline, and seed. Batteries sweep the supported grids and aggregate
// termination, audit, and complexity results. Everything is deterministic
// given the configuration, including the delivery discipline, which is
// derived from the seed unless pinned explicitly.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bla/checks.hpp"
#include "bla/simnet.hpp"

namespace bla {

struct TrialConfig {
    int n = 6;
    int f = 1;
    int t = 1;
    Variant variant = Variant::Unauth;
    Strategy strategy = Strategy::Silent;
    Mutations mut;
    uint64_t seed = 1;
    bool net_explicit = false;  // when false, the net config derives from seed
    NetConfig net;
};

/// seed % 3 rotates trials through the delivery disciplines so every battery
/// exercises uniform delays and both fairness bounds.
inline NetConfig derive_net(uint64_t seed) {
    NetConfig nc;
    switch (seed % 3) {
        case 0:
            nc.model = DelayModel::Uniform;
            nc.spread = 10;
            break;
        case 1:
            nc.model = DelayModel::Adversarial;
            nc.fairness_D = 10;
            break;
        default:
            nc.model = DelayModel::Adversarial;
            nc.fairness_D = 100;
            break;
    }
    return nc;
}

inline NetConfig trial_net(const TrialConfig& cfg) {
    return cfg.net_explicit ? cfg.net : derive_net(cfg.seed);
}

/// Per-trial RNG root: every stochastic stream in the run forks off this.
inline uint64_t trial_rng_seed(const TrialConfig& cfg) {
    uint64_t h = 0x9e3779b97f4a7c15ull;
    for (uint64_t x : {cfg.seed, static_cast<uint64_t>(cfg.n), static_cast<uint64_t>(cfg.f),
                       static_cast<uint64_t>(cfg.t), static_cast<uint64_t>(cfg.variant),
                       static_cast<uint64_t>(cfg.strategy)})
        h = mix64(h ^ x);
    return h;
}

template <JoinLattice L>
typename L::Element input_element(Pid pid, uint64_t seed) {
    if constexpr (std::is_same_v<L, SetUnionLattice>) {
        return SetUnionLattice::make(
            {"in:" + std::to_string(pid) + ":" + std::to_string(seed & 3)});
    } else {
        return static_cast<typename L::Element>(pid * 10 + static_cast<int64_t>(seed & 7));
    }
}

template <JoinLattice L>
struct TrialResult {
    TrialConfig cfg;
    NetConfig net;
    SimStats stats;
    CheckReport report;
    bool terminated = false;  // decided everywhere, queue drained, budget kept
    uint64_t trace_digest = 0;
    std::vector<ProcessOutput<L>> outputs;  // [n+1]
    std::vector<int> rounds_exec;           // [n+1]
};

template <JoinLattice L>
TrialResult<L> run_trial(const TrialConfig& cfg, Trace* keep_trace = nullptr) {
    TrialResult<L> res;
    res.cfg = cfg;
    res.net = trial_net(cfg);
    TreeParams params = TreeParams::make(cfg.n, cfg.f);
    uint64_t rseed = trial_rng_seed(cfg);

    ValueInterner<L> interner;
    SignatureRegistry registry;
    Trace local_trace;
    Trace* trace = keep_trace ? keep_trace : &local_trace;
    auto input_of = [rseed](Pid p) { return input_element<L>(p, rseed); };

    Simulation<L> sim(params, cfg.variant, cfg.mut, res.net, cfg.strategy, cfg.t, rseed, input_of,
                      &interner, &registry, trace);
    res.stats = sim.run();

    res.outputs.resize(static_cast<size_t>(cfg.n) + 1);
    res.rounds_exec.assign(static_cast<size_t>(cfg.n) + 1, 0);
    std::vector<char> decided(static_cast<size_t>(cfg.n) + 1, 0);
    for (Pid p = 1; p <= sim.correct_count(); ++p) {
        const auto& proc = sim.process(p);
        res.outputs[static_cast<size_t>(p)] = proc.output();
        res.rounds_exec[static_cast<size_t>(p)] = proc.rounds_executed();
        decided[static_cast<size_t>(p)] = proc.decided() ? 1 : 0;
    }
    res.terminated = sim.all_decided() && res.stats.drained && !res.stats.budget_exceeded;

    TrialView<L> view;
    view.params = params;
    view.variant = cfg.variant;
    view.t = cfg.t;
    view.net = res.net;
    view.trace = trace;
    view.interner = &interner;
    view.input_of = input_of;
    view.outputs = res.outputs;
    view.rounds_exec = res.rounds_exec;
    view.decided = decided;
    view.stats = res.stats;
    res.report = check_trial(view);
    res.trace_digest = trace->digest();
    return res;
}

// ---------------------------------------------------------------------------
// Batteries

inline int grid_f(Variant v, int n) {
    return v == Variant::Unauth ? (n - 1) / 5 : (n - 1) / 3;
}

inline std::vector<int> grid_ns(Variant v) {
    return v == Variant::Unauth ? std::vector<int>{6, 11, 16, 21} : std::vector<int>{4, 7, 10, 13};
}

inline std::vector<int> grid_ts(int f) {
    std::vector<int> ts{0};
    int half = (f + 1) / 2;
    if (half != 0) ts.push_back(half);
    if (f != 0 && f != half) ts.push_back(f);
    return ts;
}

struct BatteryConfig {
    Variant variant = Variant::Unauth;
    int seeds = 50;
    uint64_t seed_base = 0;
    Mutations mut;
    std::vector<Strategy> strategies = all_strategies();
    bool t_only_f = false;  // fault-injection runs: only the max faulty count
};

struct TrialSummary {
    TrialConfig cfg;
    bool terminated = false;
    bool checks_ok = false;
    std::size_t violations = 0;
    std::string first_violation;
    uint64_t sent_correct = 0;
    uint64_t trace_digest = 0;
    int rounds = 0;
};

struct BatteryResult {
    std::vector<TrialSummary> trials;
    uint64_t total = 0;
    uint64_t terminated = 0;
    uint64_t checks_clean = 0;
    std::map<std::string, uint64_t> violations_by_check;
    double max_bound_ratio = 0.0;  // correct sends / 16 n^3 (L+1)
    double wall_seconds = 0.0;
};

inline std::vector<TrialConfig> battery_trials(const BatteryConfig& bc) {
    std::vector<TrialConfig> out;
    for (int n : grid_ns(bc.variant)) {
        int f = grid_f(bc.variant, n);
        std::vector<int> ts = bc.t_only_f ? std::vector<int>{f} : grid_ts(f);
        for (int t : ts)
            for (Strategy s : bc.strategies)
                for (int sd = 0; sd < bc.seeds; ++sd) {
                    TrialConfig cfg;
                    cfg.n = n;
                    cfg.f = f;
                    cfg.t = t;
                    cfg.variant = bc.variant;
                    cfg.strategy = s;
                    cfg.mut = bc.mut;
                    cfg.seed = bc.seed_base + static_cast<uint64_t>(sd);
                    out.push_back(cfg);
                }
    }
    return out;
}

inline BatteryResult run_battery(const BatteryConfig& bc,
                                 const std::function<void(std::size_t, std::size_t)>& progress = {}) {
    BatteryResult br;
    auto trials = battery_trials(bc);
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < trials.size(); ++i) {
        auto res = run_trial<SetUnionLattice>(trials[i]);
        TrialSummary s;
        s.cfg = trials[i];
        s.terminated = res.terminated;
        s.checks_ok = res.report.ok();
        s.violations = res.report.violations.size();
        if (!res.report.violations.empty())
            s.first_violation = std::string(res.report.violations[0].check) + ": " +
                                res.report.violations[0].detail;
        s.sent_correct = res.stats.sent_correct;
        s.trace_digest = res.trace_digest;
        s.rounds = TreeParams::make(trials[i].n, trials[i].f).rounds;
        ++br.total;
        if (s.terminated) ++br.terminated;
        if (s.checks_ok) ++br.checks_clean;
        for (const auto& v : res.report.violations) ++br.violations_by_check[v.check];
        uint64_t nn = static_cast<uint64_t>(trials[i].n);
        double bound = 16.0 * static_cast<double>(nn * nn * nn) * (s.rounds + 1);
        double ratio = static_cast<double>(s.sent_correct) / bound;
        if (ratio > br.max_bound_ratio) br.max_bound_ratio = ratio;
        br.trials.push_back(std::move(s));
        if (progress) progress(i + 1, trials.size());
    }
    br.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return br;
}

// ---------------------------------------------------------------------------
// Fault-injection pairs: each disabled guard with the strategy built to
// exploit exactly that gap.

struct MutationPair {
    const char* name;
    Mutations mut;
    Strategy strategy;
};

inline std::vector<MutationPair> mutation_pairs() {
    std::vector<MutationPair> v;
    {
        Mutations m;
        m.slave_proof_off = true;
        v.push_back({"slave-proof-off", m, Strategy::ValueInjector});
    }
    {
        Mutations m;
        m.read_gate_off = true;
        v.push_back({"read-gate-off", m, Strategy::ReadBeforeWrite});
    }
    {
        Mutations m;
        m.master_wait_off = true;
        v.push_back({"master-wait-off", m, Strategy::RushingMaster});
    }
    {
        Mutations m;
        m.brb_weak = true;
        v.push_back({"brb-weak", m, Strategy::Equivocator});
    }
    return v;
}

struct MutationOutcome {
    std::string pair;
    uint64_t trials = 0;
    uint64_t trials_with_violations = 0;
    uint64_t total_violations = 0;
    std::map<std::string, uint64_t> by_check;
};

/// Runs one mutation pair across both variant grids with the maximum faulty
/// count; honest-side liveness is not required here, only that the audits
/// catch the weakened guard.
inline MutationOutcome run_mutation_pair(const MutationPair& mp, int seeds = 10,
                                         uint64_t seed_base = 0) {
    MutationOutcome out;
    out.pair = mp.name;
    for (Variant variant : {Variant::Unauth, Variant::Auth}) {
        BatteryConfig bc;
        bc.variant = variant;
        bc.seeds = seeds;
        bc.seed_base = seed_base;
        bc.mut = mp.mut;
        bc.strategies = {mp.strategy};
        bc.t_only_f = true;
        auto br = run_battery(bc);
        out.trials += br.total;
        for (const auto& t : br.trials)
            if (t.violations > 0) ++out.trials_with_violations;
        for (const auto& [check, count] : br.violations_by_check) {
            out.by_check[check] += count;
            out.total_violations += count;
        }
    }
    return out;
}

}  // namespace bla
