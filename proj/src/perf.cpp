#include "llmlimit/perf.hpp"

#include <algorithm>
#include <sstream>

#include "llmlimit/errors.hpp"
#include "llmlimit/units.hpp"

namespace llmlimit {

std::string to_string(Bottleneck b) { return b == Bottleneck::memory ? "memory" : "compute"; }

double compute_latency(const Workload& w, const SystemConfig& sys) {
    return w.tensor_flops / sys.agg_tensor + w.scalar_flops / sys.agg_scalar;
}

double memory_latency(const Workload& w, const SystemConfig& sys, const MappingFlags& flags) {
    if (!flags.attention_single_device) return w.total_rd_bytes / sys.agg_bw;
    const double kv = w.kv_rd_bytes + w.kv_wr_bytes;
    return w.weights_bytes / sys.agg_bw + kv / sys.chip.mem_bw_bytes_per_s();
}

LatencyBreakdown exposed_latency(const ModelArch& m, const SystemConfig& sys, const Workload& w) {
    LatencyBreakdown lat;
    lat.t_exposed_sync = sys.t_tp_sync * static_cast<double>(sys.sync_ops_per_layer) *
                         static_cast<double>(m.num_layers);
    lat.t_exposed_pp = sys.t_pp_sync * static_cast<double>(sys.pp);
    if (m.moe) {
        lat.t_exposed_moe_balance =
            std::max(0.0, w.moe_max_routed_flops - w.moe_avg_routed_flops) / sys.agg_tensor;
        lat.t_exposed_moe_routing = sys.moe_routing_s * static_cast<double>(m.moe->num_moe_layers);
    }
    lat.t_exposed_other = sys.exposed_other_s;
    return lat;
}

Evaluation evaluate(const ModelArch& m, const DeploymentPoint& p, const SystemConfig& sys,
                    const MappingFlags& flags, double imbalance) {
    const double need = capacity_bytes(m, p);
    if (need > sys.agg_capacity) {
        std::ostringstream msg;
        msg << "'" << m.name << "' at B=" << p.batch << ", T=" << p.context << " needs "
            << need / kGiB << " GiB but " << sys.tp << "x" << sys.pp << " '" << sys.chip.name
            << "' chips hold " << sys.agg_capacity / kGiB << " GiB";
        throw InfeasibleError(msg.str());
    }
    Evaluation ev;
    ev.workload = compute_workload(m, p, imbalance);
    const Workload& w = ev.workload;

    LatencyBreakdown lat = exposed_latency(m, sys, w);
    lat.t_compute = compute_latency(w, sys);
    lat.t_mem = memory_latency(w, sys, flags);
    lat.t_batch = std::max(lat.t_compute, lat.t_mem) + lat.t_exposed();
    ev.latency = lat;

    ThroughputReport& r = ev.throughput;
    r.batch = p.batch;
    r.pp = sys.pp;
    r.utps = 1.0 / lat.t_batch;
    r.stps = static_cast<double>(sys.pp) * static_cast<double>(p.batch) * r.utps;
    r.bottleneck = lat.t_mem >= lat.t_compute ? Bottleneck::memory : Bottleneck::compute;
    if (lat.t_batch > 0.0) {
        r.tensor_utilization = (w.tensor_flops / sys.agg_tensor) / lat.t_batch;
        r.mem_bw_utilization = (w.total_rd_bytes / sys.agg_bw) / lat.t_batch;
    }
    return ev;
}

}  // namespace llmlimit
