#pragma once

#include <string>

#include "llmlimit/machine.hpp"
#include "llmlimit/model.hpp"
#include "llmlimit/workload.hpp"

namespace llmlimit {

struct MappingFlags {
    // All KV traffic goes through a single chip's bandwidth (attention is not
    // split across the TP group).
    bool attention_single_device = false;
};

struct LatencyBreakdown {
    double t_compute = 0.0;
    double t_mem = 0.0;
    double t_exposed_sync = 0.0;
    double t_exposed_pp = 0.0;
    double t_exposed_moe_balance = 0.0;
    double t_exposed_moe_routing = 0.0;
    double t_exposed_other = 0.0;
    double t_batch = 0.0;

    double t_exposed() const {
        return t_exposed_sync + t_exposed_pp + t_exposed_moe_balance + t_exposed_moe_routing +
               t_exposed_other;
    }
};

enum class Bottleneck { memory, compute };
std::string to_string(Bottleneck b);

struct ThroughputReport {
    double utps = 0.0;
    double stps = 0.0;
    std::int64_t batch = 1;
    std::int64_t pp = 1;
    Bottleneck bottleneck = Bottleneck::memory;
    double tensor_utilization = 0.0;
    double mem_bw_utilization = 0.0;
};

struct Evaluation {
    Workload workload;
    LatencyBreakdown latency;
    ThroughputReport throughput;
};

// Tensor and scalar work at the TP group's peak rates.
double compute_latency(const Workload& w, const SystemConfig& sys);

double memory_latency(const Workload& w, const SystemConfig& sys, const MappingFlags& flags = {});

// Fills the t_exposed_* fields (t_compute, t_mem and t_batch stay 0).
LatencyBreakdown exposed_latency(const ModelArch& m, const SystemConfig& sys, const Workload& w);

// Full evaluation of one deployment point. Throws InfeasibleError when the
// system cannot hold weights plus KV cache.
Evaluation evaluate(const ModelArch& m, const DeploymentPoint& p, const SystemConfig& sys,
                    const MappingFlags& flags = {}, double imbalance = 1.0);

}  // namespace llmlimit
