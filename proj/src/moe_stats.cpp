#include "llmlimit/moe_stats.hpp"

#include <algorithm>
#include <vector>

#include "llmlimit/errors.hpp"

namespace llmlimit {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void check(const ImbalanceQuery& q) {
    if (q.routed_experts < 1 || q.active_experts < 1)
        throw DomainError("MR and MA must be >= 1");
    if (q.active_experts > q.routed_experts)
        throw DomainError("MA must not exceed MR");
    if (q.tokens < 1) throw DomainError("tokens must be >= 1");
    if (q.trials < 1) throw DomainError("trials must be >= 1");
}

// Per-thread scratch: expert loads plus a stamp array used to keep one
// token's picks distinct (Floyd's sampling).
struct TrialScratch {
    std::vector<std::uint32_t> load;
    std::vector<std::uint64_t> stamp;
    std::uint64_t generation = 0;

    explicit TrialScratch(std::int64_t experts)
        : load(static_cast<std::size_t>(experts)), stamp(static_cast<std::size_t>(experts), 0) {}
};

// Returns the trial's numerator contribution: max_load for the clamped
// mean, max_load * occupied for the occupied mean.
std::uint64_t run_trial(const ImbalanceQuery& q, std::int64_t trial, TrialScratch& s) {
    SplitMix64 rng(q.seed, static_cast<std::uint64_t>(trial));
    const auto mr = static_cast<std::uint64_t>(q.routed_experts);
    const auto ma = static_cast<std::uint64_t>(q.active_experts);
    std::fill(s.load.begin(), s.load.end(), 0U);
    for (std::int64_t tok = 0; tok < q.tokens; ++tok) {
        const std::uint64_t gen = ++s.generation;
        for (std::uint64_t j = mr - ma; j < mr; ++j) {
            std::uint64_t pick = rng.below(j + 1);
            if (s.stamp[pick] == gen) pick = j;
            s.stamp[pick] = gen;
            ++s.load[pick];
        }
    }
    std::uint32_t max_load = 0;
    std::uint64_t occupied = 0;
    for (std::uint32_t l : s.load) {
        max_load = std::max(max_load, l);
        occupied += (l > 0);
    }
    if (q.denominator == ImbalanceDenominator::clamped_mean) return max_load;
    return static_cast<std::uint64_t>(max_load) * occupied;
}

MoeImbalance finish(const ImbalanceQuery& q, std::uint64_t sum) {
    const double picks = static_cast<double>(q.tokens) * static_cast<double>(q.active_experts);
    double mean_load;
    if (q.denominator == ImbalanceDenominator::clamped_mean) {
        mean_load = std::max(picks / static_cast<double>(q.routed_experts), 1.0);
    } else {
        // sum holds max*occupied; occupied mean = picks / occupied.
        mean_load = picks;
    }
    MoeImbalance r;
    r.mi = static_cast<double>(sum) / (static_cast<double>(q.trials) * mean_load);
    r.trials = q.trials;
    r.seed = q.seed;
    r.tokens = q.tokens;
    return r;
}

MoeImbalance trivial(const ImbalanceQuery& q) {
    MoeImbalance r;
    r.mi = 1.0;
    r.trials = q.trials;
    r.seed = q.seed;
    r.tokens = q.tokens;
    return r;
}

}  // namespace

SplitMix64::SplitMix64(std::uint64_t seed, std::uint64_t index)
    : state_(mix64(seed + kGolden) ^ mix64((index + 1) * kGolden)) {}

std::uint64_t SplitMix64::next() {
    state_ += kGolden;
    return mix64(state_);
}

__extension__ typedef unsigned __int128 u128;

std::uint64_t SplitMix64::below(std::uint64_t bound) {
    u128 m = static_cast<u128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<u128>(next()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

MoeImbalance estimate_imbalance_serial(const ImbalanceQuery& q) {
    check(q);
    // One token lands on MA distinct experts: every occupied expert has load 1.
    if (q.tokens == 1) return trivial(q);
    TrialScratch scratch(q.routed_experts);
    std::uint64_t sum = 0;
    for (std::int64_t t = 0; t < q.trials; ++t) sum += run_trial(q, t, scratch);
    return finish(q, sum);
}

MoeImbalance estimate_imbalance(const ImbalanceQuery& q) {
    check(q);
    if (q.tokens == 1) return trivial(q);
    std::uint64_t sum = 0;
#pragma omp parallel reduction(+ : sum)
    {
        TrialScratch scratch(q.routed_experts);
#pragma omp for schedule(static)
        for (std::int64_t t = 0; t < q.trials; ++t) sum += run_trial(q, t, scratch);
    }
    return finish(q, sum);
}

}  // namespace llmlimit
