#include "llmlimit/model.hpp"

#include <sstream>

#include "llmlimit/errors.hpp"

namespace llmlimit {

namespace {

ModelArch make_llama3_70b() {
    ModelArch m;
    m.name = "llama3-70b";
    m.num_layers = 80;
    m.embed_dim = 8192;
    m.num_heads = 64;
    m.num_kv_heads = 8;
    m.head_dim = 128;
    m.ffn_dim = 28672;
    m.nominal_params = 70e9;
    return m;
}

ModelArch make_llama3_405b() {
    ModelArch m;
    m.name = "llama3-405b";
    m.num_layers = 126;
    m.embed_dim = 16384;
    m.num_heads = 128;
    m.num_kv_heads = 8;
    m.head_dim = 128;
    m.ffn_dim = 53248;
    m.nominal_params = 405e9;
    return m;
}

ModelArch make_deepseekv3() {
    ModelArch m;
    m.name = "deepseekv3";
    m.num_layers = 61;
    m.embed_dim = 7168;
    m.num_heads = 128;
    m.num_kv_heads = 128;
    m.head_dim = 128;
    m.ffn_dim = 18432;
    m.mla = MlaDims{1536, 512, 64};
    m.moe = MoeDims{2048, 1, 256, 8, 3, 58};
    // Main-model parameter count (129280-token vocabulary, untied embeddings,
    // no multi-token-prediction head). The rounded 671e9 lands half a GiB
    // boundary off at one capacity point.
    m.nominal_params = 671'026'419'200.0;
    return m;
}

}  // namespace

void validate(const ModelArch& m) {
    auto fail = [&](const std::string& what) {
        throw DomainError("model '" + m.name + "': " + what);
    };
    if (m.num_layers < 1) fail("L must be >= 1");
    if (m.out_seq_len != 1) fail("S must be 1 for decode");
    if (m.embed_dim < 1 || m.num_heads < 1 || m.head_dim < 1 || m.ffn_dim < 1)
        fail("D, H, E and V must be >= 1");
    if (m.num_kv_heads < 1) fail("K must be >= 1");
    if (!m.mla && m.num_heads % m.num_kv_heads != 0)
        fail("H must be a multiple of K for grouped-query attention");
    if (m.mla.has_value() != m.moe.has_value())
        fail("mla and moe blocks must be given together");
    if (m.mla) {
        if (m.mla->q_latent_dim < 1 || m.mla->kv_latent_dim < 1 || m.mla->rope_dim < 0)
            fail("MLA dims must be positive");
    }
    if (m.moe) {
        const auto& e = *m.moe;
        if (e.expert_dim < 1 || e.routed_experts < 1 || e.active_experts < 1 || e.shared_experts < 0)
            fail("MoE dims must be positive");
        if (e.active_experts > e.routed_experts) fail("MA must not exceed MR");
        if (e.num_dense_layers < 0 || e.num_moe_layers < 0 ||
            e.num_dense_layers + e.num_moe_layers != m.num_layers)
            fail("num_dense_layers + num_moe_layers must equal L");
    }
    if (!(m.elem_bytes > 0.0)) fail("elem_bytes must be > 0");
    if (!(m.nominal_params > 0.0)) fail("nominal_params must be > 0");
    if (m.scalar.softmax_ops_per_elem < 0.0 || m.scalar.norm_flops_per_elem < 0.0)
        fail("scalar constants must be >= 0");
}

const std::vector<std::string>& builtin_model_names() {
    static const std::vector<std::string> names{"llama3-70b", "llama3-405b", "deepseekv3"};
    return names;
}

ModelArch builtin_model(const std::string& name) {
    if (name == "llama3-70b") return make_llama3_70b();
    if (name == "llama3-405b") return make_llama3_405b();
    if (name == "deepseekv3") return make_deepseekv3();
    std::ostringstream msg;
    msg << "unknown model '" << name << "'; valid names:";
    for (const auto& n : builtin_model_names()) msg << ' ' << n;
    throw ConfigError(msg.str());
}

double weights_bytes(const ModelArch& m) { return m.nominal_params * m.elem_bytes; }

double kv_bytes_per_token_per_layer(const ModelArch& m) {
    if (m.mla) {
        return static_cast<double>(m.mla->kv_latent_dim + m.mla->rope_dim) * m.elem_bytes;
    }
    return static_cast<double>(m.num_kv_heads * m.head_dim * 2) * m.elem_bytes;
}

}  // namespace llmlimit
