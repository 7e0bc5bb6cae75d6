// Serial vs OpenMP timings for the two parallel kernels: MoE imbalance
// sampling and sweep evaluation. Also checks that both paths agree.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "llmlimit/explorer.hpp"
#include "llmlimit/moe_stats.hpp"

using namespace llmlimit;
using Clock = std::chrono::steady_clock;

namespace {

template <typename Fn>
double best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    }
    return best;
}

bool same_rows(const SweepResult& a, const SweepResult& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto& x = a.rows[i];
        const auto& y = b.rows[i];
        if (x.feasible != y.feasible || x.latency.t_batch != y.latency.t_batch ||
            x.stps_per_watt != y.stps_per_watt || x.batch != y.batch || x.pp != y.pp)
            return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const std::int64_t trials = argc > 1 ? std::atoll(argv[1]) : 100000;
    const int reps = 3;
    std::printf("threads: %d\n", omp_get_max_threads());

    ImbalanceQuery q;
    q.tokens = 64;
    q.trials = trials;
    MoeImbalance serial, parallel;
    const double ts = best_of(reps, [&] { serial = estimate_imbalance_serial(q); });
    const double tp = best_of(reps, [&] { parallel = estimate_imbalance(q); });
    std::printf("imbalance  256x8, 64 tokens, %lld trials: serial %.3f s, parallel %.3f s, "
                "speedup %.2fx, mi %.6f, identical %s\n",
                static_cast<long long>(trials), ts, tp, ts / tp, parallel.mi,
                serial.mi == parallel.mi ? "yes" : "NO");

    const SweepSpec spec = builtin_sweep("fig5");
    SweepResult a, b;
    // Fresh explorers so the imbalance cache is rebuilt on every run.
    const double ss = best_of(reps, [&] { a = Explorer(Catalog::builtin()).run_sweep_serial(spec); });
    const double sp = best_of(reps, [&] { b = Explorer(Catalog::builtin()).run_sweep(spec); });
    std::printf("sweep      fig5, %zu points: serial %.3f s, parallel %.3f s, speedup %.2fx, "
                "identical %s\n",
                a.rows.size(), ss, sp, ss / sp, same_rows(a, b) ? "yes" : "NO");
    return serial.mi == parallel.mi && same_rows(a, b) ? 0 : 1;
}
