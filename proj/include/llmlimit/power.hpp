#pragma once

#include <map>

#include "llmlimit/machine.hpp"
#include "llmlimit/workload.hpp"

namespace llmlimit {

struct MemoryPower {
    double dynamic_pj_per_bit = 0.0;
    double static_w_per_gb = 0.0;  // per GiB of installed capacity
};

// Defaults are placeholders; only normalized efficiency is meaningful.
struct PowerModel {
    double chip_w_per_mm2 = 1.0;
    double server_overhead_w = 300.0;
    std::int64_t chips_per_server = 8;
    std::map<MemoryTechnology, MemoryPower> memory{
        {MemoryTechnology::hbm3, {4.0, 0.05}},
        {MemoryTechnology::hbm4, {3.0, 0.05}},
        {MemoryTechnology::dram3d, {1.5, 0.05}},
        {MemoryTechnology::sram, {0.0, 0.0}},
        {MemoryTechnology::other, {0.0, 0.0}},
    };
    double interconnect_w = 0.0;

    MemoryPower memory_power(MemoryTechnology t) const;
};

void validate(const PowerModel& pm);

double chip_power(const ChipConfig& chip, const PowerModel& pm = {});

// Chips, server overhead, memory dynamic power at the achieved bandwidth
// (pp mini-batches' bytes per t_batch), memory static power, interconnect.
double system_power(const SystemConfig& sys, const Workload& w, double t_batch,
                    const PowerModel& pm = {});

// Tokens/s per watt. Throws DomainError when watts <= 0.
double efficiency(double stps, double watts);

}  // namespace llmlimit
