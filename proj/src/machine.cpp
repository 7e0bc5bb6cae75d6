#include "llmlimit/machine.hpp"

#include <cmath>
#include <sstream>

#include "llmlimit/errors.hpp"

namespace llmlimit {

std::string to_string(MemoryTechnology t) {
    switch (t) {
        case MemoryTechnology::hbm3: return "hbm3";
        case MemoryTechnology::hbm4: return "hbm4";
        case MemoryTechnology::dram3d: return "3d-dram";
        case MemoryTechnology::sram: return "sram";
        case MemoryTechnology::other: return "other";
    }
    return "other";
}

MemoryTechnology memory_technology_from_string(const std::string& s) {
    if (s == "hbm3") return MemoryTechnology::hbm3;
    if (s == "hbm4") return MemoryTechnology::hbm4;
    if (s == "3d-dram") return MemoryTechnology::dram3d;
    if (s == "sram") return MemoryTechnology::sram;
    if (s == "other") return MemoryTechnology::other;
    throw ConfigError("unknown memory technology '" + s +
                      "'; valid: hbm3 hbm4 3d-dram sram other");
}

void validate(const ChipConfig& c) {
    auto fail = [&](const std::string& what) {
        throw DomainError("chip '" + c.name + "': " + what);
    };
    if (!(c.mem_bw_tbs > 0.0)) fail("mem_bw must be > 0");
    if (!(c.tensor_pflops > 0.0)) fail("tensor_compute must be > 0");
    if (!(c.scalar_pflops > 0.0)) fail("scalar_compute must be > 0");
    if (!(c.mem_capacity_bytes > 0.0)) fail("mem_capacity must be > 0");
    if (c.die_area_mm2 < 0.0) fail("die_area must be >= 0");
    if (c.tp_sync_override_s && *c.tp_sync_override_s < 0.0) fail("tp_sync_override must be >= 0");
    if (c.max_tp_span && *c.max_tp_span < 1) fail("max_tp_span must be >= 1");
}

const std::vector<std::string>& builtin_chip_names() {
    static const std::vector<std::string> names{"xpu-hbm3", "xpu-hbm4", "xpu-3d-dram", "xpu-sram",
                                                "xpu-cows"};
    return names;
}

ChipConfig builtin_chip(const std::string& name) {
    ChipConfig c;
    c.name = name;
    if (name == "xpu-hbm3") {
        c.mem_bw_tbs = 4;
        c.tensor_pflops = 2.25;
        c.scalar_pflops = 0.2;
        c.mem_capacity_bytes = 96 * kGiB;
        c.memory = MemoryTechnology::hbm3;
    } else if (name == "xpu-hbm4") {
        c.mem_bw_tbs = 18;
        c.tensor_pflops = 2.25;
        c.scalar_pflops = 0.2;
        c.mem_capacity_bytes = 192 * kGiB;
        c.memory = MemoryTechnology::hbm4;
    } else if (name == "xpu-3d-dram") {
        c.mem_bw_tbs = 30;
        c.tensor_pflops = 2.25;
        c.scalar_pflops = 0.2;
        c.mem_capacity_bytes = 36 * kGiB;
        c.memory = MemoryTechnology::dram3d;
    } else if (name == "xpu-sram") {
        c.mem_bw_tbs = 117;
        c.tensor_pflops = 1.13;
        c.scalar_pflops = 0.1;
        c.mem_capacity_bytes = 512 * kMiB;
        c.memory = MemoryTechnology::sram;
    } else if (name == "xpu-cows") {
        // One wafer of 25 die-lets, treated as a single composite chip.
        c.mem_bw_tbs = 2250;
        c.tensor_pflops = 28.13;
        c.scalar_pflops = 2.5;
        c.mem_capacity_bytes = 11 * kGiB;
        c.die_area_mm2 = 25 * 800.0;
        c.tp_sync_override_s = 800 * kNanosecond;
        c.max_tp_span = 1;
        c.memory = MemoryTechnology::sram;
    } else {
        std::ostringstream msg;
        msg << "unknown chip '" << name << "'; valid names:";
        for (const auto& n : builtin_chip_names()) msg << ' ' << n;
        throw ConfigError(msg.str());
    }
    return c;
}

double tp_sync_latency(std::int64_t tp, std::optional<double> override_s, const SyncParams& sync) {
    if (tp < 1) throw DomainError("tp must be >= 1");
    if (override_s) return *override_s;
    return tp < sync.high_radix_threshold ? sync.low_radix_s : sync.high_radix_s;
}

SystemConfig compose_system(const ChipConfig& chip, std::int64_t tp, std::int64_t pp,
                            const SyncParams& sync, std::optional<double> tp_sync_override) {
    validate(chip);
    if (tp < 1) throw DomainError("tp must be >= 1");
    if (pp < 1) throw DomainError("pp must be >= 1");
    if (tp > kMaxTensorParallel) {
        throw InfeasibleError("tp=" + std::to_string(tp) + " exceeds the 128-chip tensor-parallel limit");
    }
    if (chip.max_tp_span && tp > *chip.max_tp_span) {
        throw InfeasibleError("tp=" + std::to_string(tp) + " exceeds chip '" + chip.name +
                              "' max_tp_span=" + std::to_string(*chip.max_tp_span));
    }
    SystemConfig s;
    s.chip = chip;
    s.tp = tp;
    s.pp = pp;
    const auto n = static_cast<double>(tp);
    s.agg_bw = n * chip.mem_bw_bytes_per_s();
    s.agg_tensor = n * chip.tensor_flops_per_s();
    s.agg_scalar = n * chip.scalar_flops_per_s();
    s.agg_capacity = n * static_cast<double>(pp) * chip.mem_capacity_bytes;
    s.t_tp_sync = tp_sync_latency(tp, tp_sync_override ? tp_sync_override : chip.tp_sync_override_s, sync);
    s.t_pp_sync = sync.pp_sync_s;
    s.sync_ops_per_layer = sync.sync_ops_per_layer;
    s.moe_routing_s = sync.moe_routing_s;
    s.exposed_other_s = sync.exposed_other_s;
    return s;
}

std::int64_t min_pp(const ChipConfig& chip, std::int64_t tp, const ModelArch& m,
                    const DeploymentPoint& p, std::int64_t pp_cap) {
    validate(chip);
    if (tp < 1) throw DomainError("tp must be >= 1");
    const double need = capacity_bytes(m, p);
    const double per_stage = static_cast<double>(tp) * chip.mem_capacity_bytes;
    const auto pp = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(need / per_stage)));
    if (pp > pp_cap) {
        std::ostringstream msg;
        msg << "model '" << m.name << "' (B=" << p.batch << ", T=" << p.context << ") needs "
            << need / kGiB << " GiB; " << pp_cap << " pipeline stages of tp=" << tp << " '"
            << chip.name << "' chips hold " << per_stage * static_cast<double>(pp_cap) / kGiB
            << " GiB";
        throw InfeasibleError(msg.str());
    }
    return pp;
}

std::int64_t max_batch(const ChipConfig& chip, std::int64_t tp, std::int64_t pp,
                       const ModelArch& m, std::int64_t context,
                       std::optional<std::int64_t> batch_cap) {
    validate(chip);
    if (context < 1) throw DomainError("capacity-limited batch needs context >= 1");
    if (batch_cap && *batch_cap < 1) throw DomainError("batch cap must be >= 1");
    const double capacity = static_cast<double>(tp * pp) * chip.mem_capacity_bytes;
    const double per_user = static_cast<double>(context) * kv_bytes_per_token_per_layer(m) *
                            static_cast<double>(m.num_layers);
    const double free = capacity - weights_bytes(m);
    if (free < per_user) {
        std::ostringstream msg;
        msg << "system of " << tp << "x" << pp << " '" << chip.name << "' chips ("
            << capacity / kGiB << " GiB) cannot hold '" << m.name << "' with one user at T="
            << context;
        throw InfeasibleError(msg.str());
    }
    auto b = static_cast<std::int64_t>(std::floor(free / per_user));
    // Guard against rounding at the boundary.
    while (b > 1 && capacity_bytes(m, {b, context, 1}) > capacity) --b;
    while (capacity_bytes(m, {b + 1, context, 1}) <= capacity) ++b;
    if (batch_cap) b = std::min(b, *batch_cap);
    return std::max<std::int64_t>(b, 1);
}

}  // namespace llmlimit
