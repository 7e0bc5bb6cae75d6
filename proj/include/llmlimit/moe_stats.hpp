#pragma once

#include <cstdint>

namespace llmlimit {

// How the per-trial "mean expert load" is taken.
enum class ImbalanceDenominator {
    // Mean over experts that received at least one token. Default; this is
    // the form that yields ~3x for 64 tokens over 256 experts, top-8.
    occupied_mean,
    // max(tokens*MA/MR, 1), the same clamped mean the routed-expert FLOP
    // count uses.
    clamped_mean,
};

struct ImbalanceQuery {
    std::int64_t routed_experts = 256;  // MR
    std::int64_t active_experts = 8;    // MA
    std::int64_t tokens = 1;            // B*S
    std::int64_t trials = 1'000'000;
    std::uint64_t seed = 0;
    ImbalanceDenominator denominator = ImbalanceDenominator::occupied_mean;
};

struct MoeImbalance {
    double mi = 1.0;  // mean over trials of max load / mean load
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    std::int64_t tokens = 0;
};

// Each trial routes `tokens` tokens, each to MA distinct experts drawn
// uniformly from MR. Trial t draws from its own SplitMix64 stream keyed by
// (seed, t), and per-trial results are accumulated as exact integers, so the
// result is bit-identical for any thread count. Throws DomainError if
// MA > MR or any count is < 1.
MoeImbalance estimate_imbalance(const ImbalanceQuery& q);

// Single-threaded reference with the same streams; must equal
// estimate_imbalance bit for bit.
MoeImbalance estimate_imbalance_serial(const ImbalanceQuery& q);

// Counter-based generator: stream `index` under `seed`.
class SplitMix64 {
public:
    SplitMix64(std::uint64_t seed, std::uint64_t index);
    std::uint64_t next();
    // Uniform integer in [0, bound), unbiased (Lemire multiply-shift with
    // rejection).
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t state_;
};

}  // namespace llmlimit
