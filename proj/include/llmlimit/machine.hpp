#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "llmlimit/model.hpp"
#include "llmlimit/units.hpp"
#include "llmlimit/workload.hpp"

namespace llmlimit {

enum class MemoryTechnology { hbm3, hbm4, dram3d, sram, other };

std::string to_string(MemoryTechnology t);
MemoryTechnology memory_technology_from_string(const std::string& s);

struct ChipConfig {
    std::string name;
    double mem_bw_tbs = 0.0;        // TB/s, base given by `memory_units`
    double tensor_pflops = 0.0;     // decimal PFLOPS
    double scalar_pflops = 0.0;     // decimal PFLOPS
    double mem_capacity_bytes = 0.0;
    double die_area_mm2 = 800.0;
    std::optional<double> tp_sync_override_s;
    std::optional<std::int64_t> max_tp_span;
    MemoryTechnology memory = MemoryTechnology::other;
    UnitBase memory_units = UnitBase::binary;

    double mem_bw_bytes_per_s() const { return mem_bw_tbs * tera(memory_units); }
    double tensor_flops_per_s() const { return tensor_pflops * kPeta; }
    double scalar_flops_per_s() const { return scalar_pflops * kPeta; }
};

void validate(const ChipConfig& c);

// xpu-hbm3, xpu-hbm4, xpu-3d-dram, xpu-sram, xpu-cows.
ChipConfig builtin_chip(const std::string& name);
const std::vector<std::string>& builtin_chip_names();

// Synchronization constants shared by every system.
struct SyncParams {
    double low_radix_s = 200 * kNanosecond;
    double high_radix_s = 1.5 * kMicrosecond;
    std::int64_t high_radix_threshold = 16;  // tp >= threshold uses high_radix_s
    double pp_sync_s = 100 * kNanosecond;
    std::int64_t sync_ops_per_layer = 3;
    double moe_routing_s = 800 * kNanosecond;  // per MoE layer
    double exposed_other_s = 0.0;              // additive software slack
};

inline constexpr std::int64_t kMaxTensorParallel = 128;
inline constexpr std::int64_t kDefaultPipelineCap = 1024;

// Latency of one collective across `tp` chips.
double tp_sync_latency(std::int64_t tp, std::optional<double> override_s = std::nullopt,
                       const SyncParams& sync = {});

struct SystemConfig {
    ChipConfig chip;
    std::int64_t tp = 1;
    std::int64_t pp = 1;
    double agg_bw = 0.0;            // bytes/s across one TP group
    double agg_tensor = 0.0;        // FLOP/s across one TP group
    double agg_scalar = 0.0;        // FLOP/s across one TP group
    double agg_capacity = 0.0;      // bytes across all tp*pp chips
    double t_tp_sync = 0.0;
    double t_pp_sync = 0.0;
    std::int64_t sync_ops_per_layer = 3;
    double moe_routing_s = 0.0;
    double exposed_other_s = 0.0;

    std::int64_t num_chips() const { return tp * pp; }
};

// Throws InfeasibleError when tp exceeds 128 or the chip's max_tp_span, and
// DomainError for tp < 1 or pp < 1. `tp_sync_override` wins over the chip's
// own override.
SystemConfig compose_system(const ChipConfig& chip, std::int64_t tp, std::int64_t pp,
                            const SyncParams& sync = {},
                            std::optional<double> tp_sync_override = std::nullopt);

// Smallest pp whose tp*pp chips hold weights plus the KV cache of `p`.
std::int64_t min_pp(const ChipConfig& chip, std::int64_t tp, const ModelArch& m,
                    const DeploymentPoint& p, std::int64_t pp_cap = kDefaultPipelineCap);

// Largest batch whose weights plus KV cache fit in tp*pp chips, optionally
// clamped to `batch_cap`. Throws InfeasibleError if B = 1 does not fit.
std::int64_t max_batch(const ChipConfig& chip, std::int64_t tp, std::int64_t pp,
                       const ModelArch& m, std::int64_t context,
                       std::optional<std::int64_t> batch_cap = std::nullopt);

}  // namespace llmlimit
