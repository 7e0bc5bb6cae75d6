#pragma once

// Published reference numbers the model is checked against. Keep these as
// printed; tolerances live with the checks that use them.

#include <array>
#include <cstdint>

namespace ref {

inline constexpr std::array<std::int64_t, 8> kCapacityContexts{
    1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072};
inline constexpr std::array<std::int64_t, 2> kCapacityBatches{1, 32};

// Per model: [batch index][context index].
struct CapacityGrid {
    const char* model;
    std::array<std::array<int, 8>, 2> gib;
    std::array<std::array<double, 8>, 2> ami;
};

inline const std::array<CapacityGrid, 3> kCapacityGrid{{
    {"llama3-70b",
     {{{65, 66, 66, 66, 68, 70, 75, 85}, {70, 75, 85, 105, 145, 225, 385, 705}}},
     {{{1.99, 2.02, 2.09, 2.22, 2.47, 2.96, 3.82, 5.25},
       {59.26, 56.38, 51.64, 44.87, 36.92, 29.49, 23.88, 20.31}}}},
    {"llama3-405b",
     {{{377, 378, 378, 379, 381, 385, 393, 409}, {385, 393, 409, 440, 503, 629, 881, 1385}}},
     {{{2.00, 2.02, 2.06, 2.14, 2.29, 2.60, 3.19, 4.30},
       {62.83, 62.21, 61.04, 58.97, 55.59, 50.87, 45.47, 40.57}}}},
    {"deepseekv3",
     {{{625, 625, 625, 625, 625, 626, 627, 629}, {626, 627, 629, 634, 642, 659, 694, 762}}},
     {{{1.37, 1.39, 1.44, 1.54, 1.73, 2.12, 2.90, 4.46},
       {7.74, 8.51, 10.05, 13.09, 19.06, 30.59, 52.10, 89.83}}}},
}};

inline constexpr std::array<std::int64_t, 6> kThroughputContexts{
    4096, 8192, 16384, 32768, 65536, 131072};

// Max user TPS at B=1, as printed (already rounded by the "K" notation).
struct UserTpsRow {
    const char* model;
    std::int64_t tp;
    std::array<double, 6> utps;
};

inline const std::array<UserTpsRow, 9> kUserTps{{
    {"llama3-70b", 8, {486, 482, 473, 457, 427, 378}},
    {"llama3-70b", 32, {1200, 1200, 1100, 1100, 1100, 990}},
    {"llama3-70b", 128, {2100, 2100, 2000, 2000, 2000, 1900}},
    {"llama3-405b", 8, {86, 86, 85, 85, 83, 80}},
    {"llama3-405b", 32, {290, 289, 288, 285, 281, 271}},
    {"llama3-405b", 128, {776, 775, 773, 768, 760, 743}},
    {"deepseekv3", 8, {52, 52, 52, 52, 52, 52}},
    {"deepseekv3", 32, {196, 196, 196, 196, 196, 195}},
    {"deepseekv3", 128, {661, 661, 661, 660, 659, 657}},
}};

// Capacity-limited system TPS with the paired user TPS, at 4K and 128K.
struct SystemTpsCell {
    const char* model;
    std::int64_t tp;
    std::int64_t context;
    double stps;
    double utps;
};

inline const std::array<SystemTpsCell, 18> kSystemTps{{
    {"llama3-70b", 8, 4096, 48e3, 43},     {"llama3-70b", 8, 131072, 1.5e3, 43},
    {"llama3-70b", 32, 4096, 202e3, 42},   {"llama3-70b", 32, 131072, 6.3e3, 42},
    {"llama3-70b", 128, 4096, 822e3, 42},  {"llama3-70b", 128, 131072, 26e3, 42},
    {"llama3-405b", 8, 4096, 17e3, 43},    {"llama3-405b", 8, 131072, 519, 43},
    {"llama3-405b", 32, 4096, 84e3, 31},   {"llama3-405b", 32, 131072, 3.6e3, 42},
    {"llama3-405b", 128, 4096, 337e3, 28}, {"llama3-405b", 128, 131072, 16e3, 42},
    {"deepseekv3", 8, 4096, 44e3, 41},     {"deepseekv3", 8, 131072, 1.4e3, 42},
    {"deepseekv3", 32, 4096, 363e3, 20},   {"deepseekv3", 32, 131072, 24e3, 42},
    {"deepseekv3", 128, 4096, 1.5e6, 17},  {"deepseekv3", 128, 131072, 112e3, 41},
}};

inline constexpr double kKvHeadlineGiB = 15.75;       // 405B, one user, 64K
inline constexpr double kImbalanceAt64Tokens = 3.0;   // 256 experts, top-8
inline constexpr double kAsymptote405B = 32.0;
inline constexpr double kAsymptoteDeepseek = 512.0;
inline constexpr double kEfficiencyGain70B = 30.0;    // max batch vs B=1, 4K
inline constexpr double kUtpsB1_70B = 2059.0;
inline constexpr double kUtpsMax_70B = 1913.0;

}  // namespace ref
