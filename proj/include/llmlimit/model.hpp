#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace llmlimit {

// Multi-head latent attention dimensions.
struct MlaDims {
    std::int64_t q_latent_dim = 0;   // F
    std::int64_t kv_latent_dim = 0;  // G
    std::int64_t rope_dim = 0;       // R
};

// Mixture-of-experts block. Dense layers use the regular FFN.
struct MoeDims {
    std::int64_t expert_dim = 0;        // MD
    std::int64_t shared_experts = 0;    // MS
    std::int64_t routed_experts = 0;    // MR
    std::int64_t active_experts = 0;    // MA
    std::int64_t num_dense_layers = 0;
    std::int64_t num_moe_layers = 0;
};

struct ScalarConstants {
    double softmax_ops_per_elem = 5.0;
    double norm_flops_per_elem = 4.0;
};

struct ModelArch {
    std::string name;
    std::int64_t num_layers = 0;    // L
    std::int64_t out_seq_len = 1;   // S
    std::int64_t embed_dim = 0;     // D
    std::int64_t num_heads = 0;     // H
    std::int64_t num_kv_heads = 0;  // K
    std::int64_t head_dim = 0;      // E
    std::int64_t ffn_dim = 0;       // V
    std::optional<MlaDims> mla;
    std::optional<MoeDims> moe;
    double elem_bytes = 1.0;
    double nominal_params = 0.0;
    ScalarConstants scalar;

    bool uses_mla_path() const { return mla.has_value(); }
};

// Throws DomainError describing the first violated invariant.
void validate(const ModelArch& m);

// Built-in architectures: llama3-70b, llama3-405b, deepseekv3. Throws
// ConfigError listing the valid names for anything else.
ModelArch builtin_model(const std::string& name);
const std::vector<std::string>& builtin_model_names();

// Resident weight bytes, taken from the headline parameter count.
double weights_bytes(const ModelArch& m);

// KV-cache bytes one token adds to one layer: K*E*2 elements for GQA,
// G+R latent elements for MLA.
double kv_bytes_per_token_per_layer(const ModelArch& m);

}  // namespace llmlimit
