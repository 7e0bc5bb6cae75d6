#include "llmlimit/power.hpp"

#include <cmath>

#include "llmlimit/errors.hpp"
#include "llmlimit/units.hpp"

namespace llmlimit {

MemoryPower PowerModel::memory_power(MemoryTechnology t) const {
    auto it = memory.find(t);
    return it == memory.end() ? MemoryPower{} : it->second;
}

void validate(const PowerModel& pm) {
    if (pm.chip_w_per_mm2 < 0 || pm.server_overhead_w < 0 || pm.interconnect_w < 0)
        throw DomainError("power constants must be >= 0");
    if (pm.chips_per_server < 1) throw DomainError("chips_per_server must be >= 1");
    for (const auto& [tech, mp] : pm.memory) {
        if (mp.dynamic_pj_per_bit < 0 || mp.static_w_per_gb < 0)
            throw DomainError("memory power constants must be >= 0 (" + to_string(tech) + ")");
    }
}

double chip_power(const ChipConfig& chip, const PowerModel& pm) {
    return chip.die_area_mm2 * pm.chip_w_per_mm2;
}

double system_power(const SystemConfig& sys, const Workload& w, double t_batch,
                    const PowerModel& pm) {
    const std::int64_t n = sys.num_chips();
    if (n <= 0) return 0.0;
    const double chips = static_cast<double>(n) * chip_power(sys.chip, pm);
    const double servers =
        std::ceil(static_cast<double>(n) / static_cast<double>(pm.chips_per_server)) *
        pm.server_overhead_w;
    const MemoryPower mp = pm.memory_power(sys.chip.memory);
    double dynamic = 0.0;
    if (t_batch > 0.0 && mp.dynamic_pj_per_bit > 0.0) {
        const double bytes_per_s = static_cast<double>(sys.pp) * w.total_rd_bytes / t_batch;
        dynamic = bytes_per_s * 8.0 * mp.dynamic_pj_per_bit * 1e-12;
    }
    const double stat = sys.agg_capacity / kGiB * mp.static_w_per_gb;
    return chips + servers + dynamic + stat + pm.interconnect_w;
}

double efficiency(double stps, double watts) {
    if (!(watts > 0.0)) throw DomainError("power must be > 0 to compute tokens/s/W");
    return stps / watts;
}

}  // namespace llmlimit
