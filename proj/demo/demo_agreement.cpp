// Runs two small agreement instances end to end and prints what each correct
// process decided.  Build and run:
//
//   cmake --build build --target demo_agreement && ./build/demo_agreement

#include <cstdio>
#include <string>

#include "bla/bla.hpp"

namespace {

// Every correct process proposes one tagged element; one faulty process
// equivocates.  All correct outputs must lie on a single chain.
void set_union_demo() {
    const int n = 6, f = 1, t = 1;
    auto params = bla::TreeParams::make(n, f);

    bla::ValueInterner<bla::SetUnionLattice> interner;
    bla::SignatureRegistry registry;
    auto input_of = [](bla::Pid p) {
        return bla::SetUnionLattice::make({"item-" + std::to_string(p)});
    };

    bla::NetConfig net;
    net.model = bla::DelayModel::Adversarial;
    net.fairness_D = 10;

    bla::Simulation<bla::SetUnionLattice> sim(params, bla::Variant::Unauth, {}, net,
                                              bla::Strategy::Equivocator, t, /*seed=*/42,
                                              input_of, &interner, &registry, nullptr);
    auto stats = sim.run();

    std::printf("set union, n=%d f=%d, one equivocating member\n", n, f);
    for (bla::Pid p = 1; p <= sim.correct_count(); ++p) {
        auto out = sim.process(p).output();
        std::string joined;
        for (const auto& s : out.y) {
            if (!joined.empty()) joined += ", ";
            joined += s;
        }
        std::printf("  p%d  label %d/2  y = {%s}\n", p, out.final_label_x2, joined.c_str());
    }

    bool chain = true;
    for (bla::Pid a = 1; a <= sim.correct_count(); ++a)
        for (bla::Pid b = a + 1; b <= sim.correct_count(); ++b) {
            const auto& ya = sim.process(a).output().y;
            const auto& yb = sim.process(b).output().y;
            chain = chain && (bla::SetUnionLattice::leq(ya, yb) ||
                              bla::SetUnionLattice::leq(yb, ya));
        }
    std::printf("  outputs form a chain: %s; %llu messages, %llu from the faulty member\n\n",
                chain ? "yes" : "NO", static_cast<unsigned long long>(stats.sent_total),
                static_cast<unsigned long long>(stats.sent_byz));
}

// Same protocol, integer max lattice, signed acknowledgements.
void max_int_demo() {
    const int n = 7, f = 2, t = 2;
    auto params = bla::TreeParams::make(n, f);

    bla::ValueInterner<bla::MaxIntLattice> interner;
    bla::SignatureRegistry registry;
    auto input_of = [](bla::Pid p) { return static_cast<int64_t>(100 + 7 * p); };

    bla::NetConfig net;  // uniform delays

    bla::Simulation<bla::MaxIntLattice> sim(params, bla::Variant::Auth, {}, net,
                                            bla::Strategy::ValueInjector, t, /*seed=*/7,
                                            input_of, &interner, &registry, nullptr);
    auto stats = sim.run();

    std::printf("integer max, n=%d f=%d, signed acks, two injecting members\n", n, f);
    for (bla::Pid p = 1; p <= sim.correct_count(); ++p) {
        auto out = sim.process(p).output();
        std::printf("  p%d  label %d/2  y = %lld\n", p, out.final_label_x2,
                    static_cast<long long>(out.y));
    }
    std::printf("  all decided: %s; %llu messages\n", sim.all_decided() ? "yes" : "NO",
                static_cast<unsigned long long>(stats.sent_total));
}

}  // namespace

int main() {
    set_union_demo();
    max_int_demo();
    return 0;
}
