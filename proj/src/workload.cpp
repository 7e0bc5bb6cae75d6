#include "llmlimit/workload.hpp"

#include <algorithm>
#include <string>

#include "llmlimit/errors.hpp"
#include "llmlimit/units.hpp"

namespace llmlimit {

void validate(const DeploymentPoint& p) {
    if (p.batch < 1) throw DomainError("batch must be >= 1");
    if (p.context < 0) throw DomainError("context must be >= 0");
    if (p.out_seq_len != 1) throw DomainError("output tokens per step must be 1");
}

namespace {

void fill_bytes(Workload& w, const ModelArch& m, double B, double T, double S) {
    const double kv_tok = kv_bytes_per_token_per_layer(m);
    const double L = static_cast<double>(m.num_layers);
    w.kv_rd_bytes = B * T * kv_tok * L;
    w.kv_wr_bytes = B * S * kv_tok * L;
    w.weights_bytes = weights_bytes(m);
    w.total_rd_bytes = w.kv_rd_bytes + w.kv_wr_bytes + w.weights_bytes;
}

}  // namespace

Workload llama_workload(const ModelArch& m, const DeploymentPoint& p) {
    if (m.mla || m.moe) {
        throw ArchitectureError("model '" + m.name + "' has MLA/MoE blocks; use the MLA path");
    }
    validate(p);
    const double B = static_cast<double>(p.batch);
    const double T = static_cast<double>(p.context);
    const double S = static_cast<double>(p.out_seq_len);
    const double D = static_cast<double>(m.embed_dim);
    const double H = static_cast<double>(m.num_heads);
    const double K = static_cast<double>(m.num_kv_heads);
    const double E = static_cast<double>(m.head_dim);
    const double V = static_cast<double>(m.ffn_dim);
    const double L = static_cast<double>(m.num_layers);

    const double q_flops = B * H * S * D * E * 2;
    const double k_flops = B * K * S * D * E * 2;
    const double v_flops = B * K * S * D * E * 2;
    const double qkv_flops = q_flops + k_flops + v_flops;

    const double qk_flops = B * H * T * E * S * 2;
    const double av_flops = B * H * T * E * S * 2;
    const double out_flops = B * S * (H * E) * D * 2;
    const double attn_flops = qk_flops + av_flops + out_flops;

    const double ffn_flops = 3 * (B * S * D * V * 2);  // gate, up, down

    const double softmax = B * H * T * S * m.scalar.softmax_ops_per_elem;
    const double norms = 2 * (B * S * D * m.scalar.norm_flops_per_elem);

    Workload w;
    w.tensor_flops = (qkv_flops + attn_flops + ffn_flops) * L;
    w.scalar_flops = (softmax + norms) * L;
    fill_bytes(w, m, B, T, S);
    return w;
}

double moe_avg_tokens_per_routed_expert(const ModelArch& m, const DeploymentPoint& p) {
    if (!m.moe) return 0.0;
    const double tokens = static_cast<double>(p.batch * p.out_seq_len);
    return std::max(tokens * static_cast<double>(m.moe->active_experts) /
                        static_cast<double>(m.moe->routed_experts),
                    1.0);
}

Workload deepseek_workload(const ModelArch& m, const DeploymentPoint& p, double imbalance) {
    if (!m.mla || !m.moe) {
        throw ArchitectureError("model '" + m.name + "' has no MLA/MoE blocks; use the GQA path");
    }
    if (!(imbalance >= 1.0)) throw DomainError("MoE imbalance factor must be >= 1");
    validate(p);
    const auto& mla = *m.mla;
    const auto& moe = *m.moe;
    const double B = static_cast<double>(p.batch);
    const double T = static_cast<double>(p.context);
    const double S = static_cast<double>(p.out_seq_len);
    const double D = static_cast<double>(m.embed_dim);
    const double H = static_cast<double>(m.num_heads);
    const double V = static_cast<double>(m.ffn_dim);
    const double F = static_cast<double>(mla.q_latent_dim);
    const double G = static_cast<double>(mla.kv_latent_dim);
    const double R = static_cast<double>(mla.rope_dim);
    const double MD = static_cast<double>(moe.expert_dim);
    const double MS = static_cast<double>(moe.shared_experts);
    const double MR = static_cast<double>(moe.routed_experts);

    // Down-projections into the latent spaces.
    const double dq_flops = B * S * F * D * 2;
    const double dkv_flops = B * S * G * D * 2;
    const double kr_flops = B * S * R * D * 2;
    // K/V up-projections are absorbed into the query and output projections.
    const double uv_flops = 0.0;
    const double uk_flops = 0.0;
    const double uq_flops = B * S * F * H * G * 2;
    const double qr_flops = B * S * F * H * R * 2;
    const double qkv_flops =
        dq_flops + dkv_flops + kr_flops + uv_flops + uk_flops + uq_flops + qr_flops;

    const double qk_flops = B * H * T * (G + R) * S * 2;
    const double av_flops = B * H * T * (G + R) * S * 2;
    const double out_flops = B * S * (H * G) * D * 2;
    const double attn_flops = qk_flops + av_flops + out_flops;

    const double ffn_flops = 3 * (B * S * D * V * 2);

    const double per_token_expert_flops = 2 * D * MD * 2;
    const double shared_flops = MS * B * S * per_token_expert_flops;
    const double router_flops = B * S * D * MR * 2;
    const double avg_tok = moe_avg_tokens_per_routed_expert(m, p);
    const double avg_routed_flops = MR * avg_tok * per_token_expert_flops;
    const double max_routed_flops = MR * (avg_tok * imbalance) * per_token_expert_flops;
    const double moe_flops = router_flops + shared_flops + avg_routed_flops;

    const double softmax = B * H * T * S * m.scalar.softmax_ops_per_elem;
    const double norms = 2 * (B * S * D * m.scalar.norm_flops_per_elem);
    const double layer_scalar = softmax + norms;

    // out_flops is added again on top of attn_flops (which already holds it);
    // the reference intensity grid is only reproduced with this accounting.
    const double dense_layer_flops = qkv_flops + attn_flops + out_flops + ffn_flops;
    const double moe_layer_flops = qkv_flops + attn_flops + out_flops + moe_flops;

    const double n_dense = static_cast<double>(moe.num_dense_layers);
    const double n_moe = static_cast<double>(moe.num_moe_layers);

    Workload w;
    w.tensor_flops = dense_layer_flops * n_dense + moe_layer_flops * n_moe;
    w.scalar_flops = layer_scalar * n_dense + layer_scalar * n_moe;
    w.moe_avg_routed_flops = avg_routed_flops * n_moe;
    w.moe_max_routed_flops = max_routed_flops * n_moe;
    fill_bytes(w, m, B, T, S);
    return w;
}

Workload compute_workload(const ModelArch& m, const DeploymentPoint& p, double imbalance) {
    if (m.uses_mla_path()) return deepseek_workload(m, p, imbalance);
    return llama_workload(m, p);
}

double capacity_bytes(const ModelArch& m, const DeploymentPoint& p) {
    return weights_bytes(m) + static_cast<double>(p.batch) * static_cast<double>(p.context) *
                                  kv_bytes_per_token_per_layer(m) *
                                  static_cast<double>(m.num_layers);
}

double capacity_gib(const ModelArch& m, const DeploymentPoint& p) {
    return capacity_bytes(m, p) / kGiB;
}

double arithmetic_intensity(const ModelArch& m, const DeploymentPoint& p) {
    const Workload w = compute_workload(m, p, 1.0);
    return w.total_flops() / w.total_rd_bytes;
}

double attention_ami_asymptote(const ModelArch& m) {
    const double H = static_cast<double>(m.num_heads);
    if (m.mla) return 4.0 * H / m.elem_bytes;
    return 2.0 * H / (static_cast<double>(m.num_kv_heads) * m.elem_bytes);
}

}  // namespace llmlimit
