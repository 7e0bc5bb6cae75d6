#pragma once

#include <cstdint>

#include "llmlimit/model.hpp"

namespace llmlimit {

// One decode step: B users, each with T tokens of context, emitting S tokens.
struct DeploymentPoint {
    std::int64_t batch = 1;    // B
    std::int64_t context = 0;  // T
    std::int64_t out_seq_len = 1;  // S
};

void validate(const DeploymentPoint& p);

// FLOPs and bytes for one decode step of one mini-batch, summed over all
// layers. Multiply-add counts as 2 FLOPs.
struct Workload {
    double tensor_flops = 0.0;
    double scalar_flops = 0.0;
    double kv_rd_bytes = 0.0;
    double kv_wr_bytes = 0.0;
    double weights_bytes = 0.0;
    double total_rd_bytes = 0.0;  // kv_rd + kv_wr + weights
    // Routed-expert FLOPs over all MoE layers at the mean and at the most
    // loaded expert; zero for dense models.
    double moe_avg_routed_flops = 0.0;
    double moe_max_routed_flops = 0.0;

    double total_flops() const { return tensor_flops + scalar_flops; }
};

// Grouped-query attention path (Llama 3). Throws ArchitectureError when the
// model carries MLA or MoE blocks.
Workload llama_workload(const ModelArch& m, const DeploymentPoint& p);

// MLA + MoE path (DeepSeek V3). `imbalance` is the MoE imbalance factor
// (max/mean expert load, >= 1).
Workload deepseek_workload(const ModelArch& m, const DeploymentPoint& p, double imbalance);

// Dispatches on the architecture; `imbalance` is ignored for dense models.
Workload compute_workload(const ModelArch& m, const DeploymentPoint& p, double imbalance = 1.0);

// Tokens routed to an average expert per MoE layer: max(B*S*MA/MR, 1).
double moe_avg_tokens_per_routed_expert(const ModelArch& m, const DeploymentPoint& p);

// Weights plus the KV cache of B users at context T.
double capacity_bytes(const ModelArch& m, const DeploymentPoint& p);
double capacity_gib(const ModelArch& m, const DeploymentPoint& p);

// (tensor + scalar FLOPs) / bytes read, with imbalance 1.
double arithmetic_intensity(const ModelArch& m, const DeploymentPoint& p);

// FLOPs/byte the attention block converges to as context grows:
// 2H/K for GQA, 4H for MLA.
double attention_ami_asymptote(const ModelArch& m);

}  // namespace llmlimit
