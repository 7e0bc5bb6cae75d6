#pragma once

// Independent re-derivations used as test oracles. Nothing here includes the
// library: hyperparameters are restated, FLOPs are counted as a list of GEMM
// shapes rather than the closed-form sums the library uses, and the MoE
// sampler uses a different generator and shuffle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace oracle {

struct Arch {
    double L, D, H, K, E, V;
    double F = 0, G = 0, R = 0;                      // MLA
    double MD = 0, MS = 0, MR = 0, MA = 0;           // MoE
    double dense_layers = 0, moe_layers = 0;
    double weights;                                  // bytes (FP8)
    bool mla = false;
};

inline Arch llama70b() { return {80, 8192, 64, 8, 128, 28672, 0, 0, 0, 0, 0, 0, 0, 80, 0, 70e9, false}; }
inline Arch llama405b() { return {126, 16384, 128, 8, 128, 53248, 0, 0, 0, 0, 0, 0, 0, 126, 0, 405e9, false}; }
inline Arch deepseek() {
    return {61, 7168, 128, 128, 128, 18432, 1536, 512, 64, 2048, 1, 256, 8, 3, 58, 671026419200.0, true};
}
inline Arch by_name(const std::string& n) {
    if (n == "llama3-70b") return llama70b();
    if (n == "llama3-405b") return llama405b();
    return deepseek();
}

struct Gemm {
    double m, k, n;
    double count = 1;  // identical GEMMs (heads, experts)
    double flops() const { return 2.0 * m * k * n * count; }
};

inline double sum(const std::vector<Gemm>& gs) {
    double s = 0;
    for (const auto& g : gs) s += g.flops();
    return s;
}

struct Counts {
    double tensor = 0, scalar = 0, bytes = 0;
    double moe_routed_avg = 0;  // all MoE layers
    double ami() const { return (tensor + scalar) / bytes; }
};

inline double kv_bytes_per_token(const Arch& a) { return a.mla ? a.G + a.R : 2 * a.K * a.E; }

// One decode step, B users at context T, one output token each.
inline Counts count(const Arch& a, double B, double T) {
    Counts c;
    std::vector<Gemm> attn;
    if (!a.mla) {
        attn = {{B, a.D, a.H * a.E},          // Wq
                {B, a.D, a.K * a.E},          // Wk
                {B, a.D, a.K * a.E},          // Wv
                {1, a.E, T, B * a.H},         // q.K^T per head
                {1, T, a.E, B * a.H},         // p.V per head
                {B, a.H * a.E, a.D}};         // Wo
    } else {
        attn = {{B, a.D, a.F},                // q down
                {B, a.D, a.G},                // kv down
                {B, a.D, a.R},                // rope key
                {B, a.F, a.H * a.G},          // q up, key up-projection absorbed
                {B, a.F, a.H * a.R},          // rope query
                {1, a.G + a.R, T, B * a.H},   // scores over the latent
                {1, T, a.G + a.R, B * a.H},   // values over the latent
                {B, a.H * a.G, a.D},          // out, value up-projection absorbed
                {B, a.H * a.G, a.D}};         // out again: the published accounting adds it twice
    }
    const std::vector<Gemm> mlp = {{B, a.D, a.V}, {B, a.D, a.V}, {B, a.V, a.D}};
    const double attn_f = sum(attn);
    const double mlp_f = sum(mlp);

    double moe_f = 0;
    if (a.moe_layers > 0) {
        const double tok = std::max(B * a.MA / a.MR, 1.0);
        const std::vector<Gemm> router = {{B, a.D, a.MR}};
        const std::vector<Gemm> shared = {{B, a.D, a.MD, a.MS}, {B, a.MD, a.D, a.MS}};
        const std::vector<Gemm> routed = {{tok, a.D, a.MD, a.MR}, {tok, a.MD, a.D, a.MR}};
        moe_f = sum(router) + sum(shared) + sum(routed);
        c.moe_routed_avg = a.moe_layers * sum(routed);
    }
    c.tensor = a.dense_layers * (attn_f + mlp_f) + a.moe_layers * (attn_f + moe_f);
    // softmax over every score, two norms per token
    c.scalar = a.L * (B * a.H * T * 5.0 + 2.0 * B * a.D * 4.0);
    c.bytes = a.weights + a.L * B * (T + 1) * kv_bytes_per_token(a);
    return c;
}

inline double capacity_gib(const Arch& a, double B, double T) {
    return (a.weights + a.L * B * T * kv_bytes_per_token(a)) / std::pow(2.0, 30);
}

// xPU-HBM3 as a plain struct.
struct Chip {
    double bw = 4.0 * std::pow(2.0, 40);
    double tensor = 2.25e15;
    double scalar = 0.2e15;
    double capacity = 96.0 * std::pow(2.0, 30);
};

inline double sync_s(double tp) { return tp >= 16 ? 1.5e-6 : 200e-9; }

// Seconds per decode step.
inline double t_batch(const Arch& a, const Chip& chip, double tp, double pp, double B, double T,
                      double mi = 1.0) {
    const Counts c = count(a, B, T);
    const double comp = c.tensor / (tp * chip.tensor) + c.scalar / (tp * chip.scalar);
    const double mem = c.bytes / (tp * chip.bw);
    double exposed = sync_s(tp) * 3 * a.L + 100e-9 * pp;
    if (a.moe_layers > 0) {
        exposed += c.moe_routed_avg * (mi - 1.0) / (tp * chip.tensor);
        exposed += 800e-9 * a.moe_layers;
    }
    return std::max(comp, mem) + exposed;
}

// Linear scan for the largest batch that fits; 0 if B=1 does not fit.
inline std::int64_t max_batch(const Arch& a, const Chip& chip, double tp, double pp, double T) {
    const double cap_gib = tp * pp * chip.capacity / std::pow(2.0, 30);
    std::int64_t b = 0;
    while (capacity_gib(a, static_cast<double>(b + 1), T) <= cap_gib) ++b;
    return b;
}

inline std::int64_t min_pp(const Arch& a, const Chip& chip, double tp, double B, double T) {
    for (std::int64_t pp = 1; pp <= 1024; ++pp)
        if (capacity_gib(a, B, T) * std::pow(2.0, 30) <= tp * static_cast<double>(pp) * chip.capacity)
            return pp;
    return -1;
}

// Routing sampler on std::mt19937_64 with a partial Fisher-Yates shuffle.
struct Imbalance {
    double clamped = 0;   // max / max(tokens*MA/MR, 1)
    double occupied = 0;  // max / mean over experts that got a token
};

inline Imbalance sample_imbalance(int MR, int MA, int tokens, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> experts(MR), load(MR);
    std::iota(experts.begin(), experts.end(), 0);
    const double clamp = std::max(static_cast<double>(tokens) * MA / MR, 1.0);
    Imbalance sum;
    for (int t = 0; t < trials; ++t) {
        std::fill(load.begin(), load.end(), 0);
        for (int tok = 0; tok < tokens; ++tok) {
            for (int i = 0; i < MA; ++i) {
                std::uniform_int_distribution<int> pick(i, MR - 1);
                std::swap(experts[i], experts[pick(rng)]);
                ++load[experts[i]];
            }
        }
        const int mx = *std::max_element(load.begin(), load.end());
        const auto occ = std::count_if(load.begin(), load.end(), [](int l) { return l > 0; });
        sum.clamped += mx / clamp;
        sum.occupied += mx / (static_cast<double>(tokens) * MA / static_cast<double>(occ));
    }
    sum.clamped /= trials;
    sum.occupied /= trials;
    return sum;
}

}  // namespace oracle
