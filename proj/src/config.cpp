#include "llmlimit/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "llmlimit/errors.hpp"
#include "llmlimit/units.hpp"

namespace llmlimit {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

const json* field(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) fail(join(path, it.key()), "unknown field");
    }
}

double as_number(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    }
    fail(path, "expected a number");
}

std::int64_t as_int(const json& j, const std::string& path) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
    }
    fail(path, "expected an integer");
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

// Integers, or strings with K/M suffixes ("4K").
std::int64_t as_count(const json& j, const std::string& path) {
    if (j.is_string()) {
        try {
            return parse_count(j.get<std::string>());
        } catch (const ConfigError& e) {
            fail(path, e.what());
        }
    }
    return as_int(j, path);
}

template <typename T>
void read_number(const json& obj, const std::string& path, const std::string& key, T& out) {
    if (const json* v = field(obj, key)) {
        if constexpr (std::is_integral_v<T>)
            out = as_int(*v, join(path, key));
        else
            out = as_number(*v, join(path, key));
    }
}

template <typename T, typename Fn>
std::vector<T> read_list(const json& j, const std::string& path, Fn each) {
    std::vector<T> out;
    if (!j.is_array()) {
        out.push_back(each(j, path));
        return out;
    }
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(each(j[i], index(path, i)));
    return out;
}

// Either a list of numbers or {start, stop, step} (inclusive of stop).
std::vector<double> read_range(const json& j, const std::string& path, double scale) {
    if (j.is_object()) {
        reject_unknown(j, path, {"start", "stop", "step"});
        const json* a = field(j, "start");
        const json* b = field(j, "stop");
        const json* s = field(j, "step");
        if (!a || !b || !s) fail(path, "range needs start, stop and step");
        const double start = as_number(*a, join(path, "start"));
        const double stop = as_number(*b, join(path, "stop"));
        const double step = as_number(*s, join(path, "step"));
        if (!(step > 0) || !(stop >= start)) fail(path, "range needs step > 0 and stop >= start");
        std::vector<double> out;
        const auto n = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9));
        for (std::int64_t i = 0; i <= n; ++i) out.push_back((start + step * static_cast<double>(i)) * scale);
        return out;
    }
    return read_list<double>(j, path,
                             [&](const json& v, const std::string& p) { return as_number(v, p) * scale; });
}

ModelArch parse_model(const json& j, const std::string& path, const Catalog& catalog) {
    require_object(j, path);
    reject_unknown(j, path, {"name", "base", "L", "S", "D", "H", "K", "E", "V", "mla", "moe",
                             "elem_bytes", "nominal_params", "scalar_const"});
    const json* name = field(j, "name");
    if (!name) fail(join(path, "name"), "required");
    ModelArch m;
    if (const json* base = field(j, "base")) {
        try {
            m = catalog.model(as_string(*base, join(path, "base")));
        } catch (const ConfigError& e) {
            fail(join(path, "base"), e.what());
        }
    }
    m.name = as_string(*name, join(path, "name"));
    read_number(j, path, "L", m.num_layers);
    read_number(j, path, "S", m.out_seq_len);
    read_number(j, path, "D", m.embed_dim);
    read_number(j, path, "H", m.num_heads);
    read_number(j, path, "K", m.num_kv_heads);
    read_number(j, path, "E", m.head_dim);
    read_number(j, path, "V", m.ffn_dim);
    read_number(j, path, "elem_bytes", m.elem_bytes);
    read_number(j, path, "nominal_params", m.nominal_params);
    if (const json* mla = field(j, "mla")) {
        const auto p = join(path, "mla");
        require_object(*mla, p);
        reject_unknown(*mla, p, {"F", "G", "R"});
        MlaDims d = m.mla.value_or(MlaDims{});
        read_number(*mla, p, "F", d.q_latent_dim);
        read_number(*mla, p, "G", d.kv_latent_dim);
        read_number(*mla, p, "R", d.rope_dim);
        m.mla = d;
    }
    if (const json* moe = field(j, "moe")) {
        const auto p = join(path, "moe");
        require_object(*moe, p);
        reject_unknown(*moe, p, {"MD", "MS", "MR", "MA", "num_dense_layers", "num_moe_layers"});
        MoeDims d = m.moe.value_or(MoeDims{});
        read_number(*moe, p, "MD", d.expert_dim);
        read_number(*moe, p, "MS", d.shared_experts);
        read_number(*moe, p, "MR", d.routed_experts);
        read_number(*moe, p, "MA", d.active_experts);
        read_number(*moe, p, "num_dense_layers", d.num_dense_layers);
        read_number(*moe, p, "num_moe_layers", d.num_moe_layers);
        m.moe = d;
    }
    if (const json* sc = field(j, "scalar_const")) {
        const auto p = join(path, "scalar_const");
        require_object(*sc, p);
        reject_unknown(*sc, p, {"softmax_ops_per_elem", "norm_flops_per_elem"});
        read_number(*sc, p, "softmax_ops_per_elem", m.scalar.softmax_ops_per_elem);
        read_number(*sc, p, "norm_flops_per_elem", m.scalar.norm_flops_per_elem);
    }
    try {
        validate(m);
    } catch (const DomainError& e) {
        fail(path, e.what());
    }
    return m;
}

ChipConfig parse_chip(const json& j, const std::string& path, const Catalog& catalog) {
    require_object(j, path);
    reject_unknown(j, path, {"name", "base", "mem_bw", "tensor_compute", "scalar_compute",
                             "mem_capacity", "die_area", "tp_sync_override_ns", "max_tp_span",
                             "memory_technology", "bandwidth_units"});
    const json* name = field(j, "name");
    if (!name) fail(join(path, "name"), "required");
    ChipConfig c;
    if (const json* base = field(j, "base")) {
        try {
            c = catalog.chip(as_string(*base, join(path, "base")));
        } catch (const ConfigError& e) {
            fail(join(path, "base"), e.what());
        }
        c.tp_sync_override_s.reset();
        c.max_tp_span.reset();
    }
    c.name = as_string(*name, join(path, "name"));
    read_number(j, path, "mem_bw", c.mem_bw_tbs);
    read_number(j, path, "tensor_compute", c.tensor_pflops);
    read_number(j, path, "scalar_compute", c.scalar_pflops);
    read_number(j, path, "die_area", c.die_area_mm2);
    if (const json* cap = field(j, "mem_capacity")) {
        const auto p = join(path, "mem_capacity");
        if (cap->is_string()) {
            try {
                c.mem_capacity_bytes = parse_bytes(cap->get<std::string>());
            } catch (const ConfigError& e) {
                fail(p, e.what());
            }
        } else {
            c.mem_capacity_bytes = as_number(*cap, p);
        }
    }
    if (const json* v = field(j, "tp_sync_override_ns"))
        c.tp_sync_override_s = as_number(*v, join(path, "tp_sync_override_ns")) * kNanosecond;
    if (const json* v = field(j, "max_tp_span")) c.max_tp_span = as_int(*v, join(path, "max_tp_span"));
    if (const json* v = field(j, "memory_technology")) {
        try {
            c.memory = memory_technology_from_string(as_string(*v, join(path, "memory_technology")));
        } catch (const Error& e) {
            fail(join(path, "memory_technology"), e.what());
        }
    }
    if (const json* v = field(j, "bandwidth_units")) {
        const auto s = as_string(*v, join(path, "bandwidth_units"));
        if (s == "binary")
            c.memory_units = UnitBase::binary;
        else if (s == "decimal")
            c.memory_units = UnitBase::decimal;
        else
            fail(join(path, "bandwidth_units"), "expected \"binary\" or \"decimal\"");
    }
    try {
        validate(c);
    } catch (const DomainError& e) {
        fail(path, e.what());
    }
    return c;
}

void parse_power(const json& j, const std::string& path, PowerModel& pm) {
    require_object(j, path);
    reject_unknown(j, path, {"chip_w_per_mm2", "server_overhead_w", "chips_per_server",
                             "interconnect_w", "memory"});
    read_number(j, path, "chip_w_per_mm2", pm.chip_w_per_mm2);
    read_number(j, path, "server_overhead_w", pm.server_overhead_w);
    read_number(j, path, "chips_per_server", pm.chips_per_server);
    read_number(j, path, "interconnect_w", pm.interconnect_w);
    if (const json* mem = field(j, "memory")) {
        const auto mp = join(path, "memory");
        require_object(*mem, mp);
        for (auto it = mem->begin(); it != mem->end(); ++it) {
            const auto p = join(mp, it.key());
            MemoryTechnology t;
            try {
                t = memory_technology_from_string(it.key());
            } catch (const Error& e) {
                fail(p, e.what());
            }
            require_object(*it, p);
            reject_unknown(*it, p, {"dynamic_pj_per_bit", "static_w_per_gb"});
            MemoryPower m = pm.memory_power(t);
            read_number(*it, p, "dynamic_pj_per_bit", m.dynamic_pj_per_bit);
            read_number(*it, p, "static_w_per_gb", m.static_w_per_gb);
            pm.memory[t] = m;
        }
    }
    try {
        validate(pm);
    } catch (const DomainError& e) {
        fail(path, e.what());
    }
}

void parse_sync(const json& j, const std::string& path, SyncParams& s) {
    require_object(j, path);
    reject_unknown(j, path, {"low_radix_ns", "high_radix_ns", "high_radix_threshold", "pp_sync_ns",
                             "sync_ops_per_layer", "moe_routing_ns", "exposed_other_ns"});
    auto ns = [&](const char* key, double& out) {
        if (const json* v = field(j, key)) {
            out = as_number(*v, join(path, key)) * kNanosecond;
            if (!(out >= 0) || !std::isfinite(out)) fail(join(path, key), "must be finite and >= 0");
        }
    };
    ns("low_radix_ns", s.low_radix_s);
    ns("high_radix_ns", s.high_radix_s);
    ns("pp_sync_ns", s.pp_sync_s);
    ns("moe_routing_ns", s.moe_routing_s);
    ns("exposed_other_ns", s.exposed_other_s);
    read_number(j, path, "high_radix_threshold", s.high_radix_threshold);
    read_number(j, path, "sync_ops_per_layer", s.sync_ops_per_layer);
    if (s.high_radix_threshold < 1) fail(join(path, "high_radix_threshold"), "must be >= 1");
    if (s.sync_ops_per_layer < 0) fail(join(path, "sync_ops_per_layer"), "must be >= 0");
}

void parse_imbalance(const json& j, const std::string& path, ImbalanceSettings& s) {
    require_object(j, path);
    reject_unknown(j, path, {"enabled", "trials", "seed", "sample_budget", "min_trials", "denominator"});
    if (const json* v = field(j, "enabled")) {
        if (!v->is_boolean()) fail(join(path, "enabled"), "expected a boolean");
        s.enabled = v->get<bool>();
    }
    read_number(j, path, "trials", s.trials);
    if (const json* v = field(j, "seed")) {
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
            fail(join(path, "seed"), "expected a non-negative integer");
        s.seed = v->get<std::uint64_t>();
    }
    read_number(j, path, "sample_budget", s.sample_budget);
    read_number(j, path, "min_trials", s.min_trials);
    if (const json* v = field(j, "denominator")) {
        const auto d = as_string(*v, join(path, "denominator"));
        if (d == "occupied_mean")
            s.denominator = ImbalanceDenominator::occupied_mean;
        else if (d == "clamped_mean")
            s.denominator = ImbalanceDenominator::clamped_mean;
        else
            fail(join(path, "denominator"), "expected \"occupied_mean\" or \"clamped_mean\"");
    }
    if (s.trials < 1) fail(join(path, "trials"), "must be >= 1");
    if (s.min_trials < 1) fail(join(path, "min_trials"), "must be >= 1");
    if (!(s.sample_budget > 0)) fail(join(path, "sample_budget"), "must be > 0");
}

}  // namespace

std::int64_t parse_count(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw ConfigError("empty count");
    double mult = 1.0;
    const char last = static_cast<char>(std::toupper(static_cast<unsigned char>(s.back())));
    if (last == 'K') mult = 1024.0;
    if (last == 'M') mult = 1024.0 * 1024.0;
    if (mult != 1.0) s.pop_back();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
        throw ConfigError("cannot parse count '" + text + "'");
    const double scaled = v * mult;
    if (scaled < 0 || std::floor(scaled) != scaled || scaled > 9e15)
        throw ConfigError("count '" + text + "' is not a non-negative integer");
    return static_cast<std::int64_t>(scaled);
}

double parse_bytes(const std::string& text) {
    static const std::pair<const char*, double> suffixes[] = {
        {"TiB", kTiB}, {"GiB", kGiB}, {"MiB", kMiB}, {"KiB", kKiB},
        {"TB", 1e12},  {"GB", kGB},   {"MB", 1e6},   {"KB", 1e3},  {"B", 1.0},
    };
    std::string s = text;
    double mult = 1.0;
    for (const auto& [suf, m] : suffixes) {
        const std::string sv(suf);
        if (s.size() > sv.size() && s.compare(s.size() - sv.size(), sv.size(), sv) == 0) {
            s.resize(s.size() - sv.size());
            mult = m;
            break;
        }
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !(v > 0) || !std::isfinite(v))
        throw ConfigError("cannot parse byte size '" + text + "'");
    return v * mult;
}

SweepSpec parse_sweep(const json& j, const std::string& path, const Catalog& catalog) {
    require_object(j, path);
    reject_unknown(j, path, {"name", "models", "chips", "tp", "contexts", "batch", "batch_cap", "mem_bw",
                             "t_tp_sync_ns", "sync_scope", "pp", "attention_single_device",
                             "normalize"});
    SweepSpec s;
    auto strings = [&](const char* key) {
        const json* v = field(j, key);
        if (!v) fail(join(path, key), "required");
        return read_list<std::string>(*v, join(path, key), as_string);
    };
    auto counts = [&](const char* key) {
        const json* v = field(j, key);
        if (!v) fail(join(path, key), "required");
        return read_list<std::int64_t>(*v, join(path, key), as_count);
    };
    if (const json* v = field(j, "name")) s.name = as_string(*v, join(path, "name"));
    s.models = strings("models");
    s.chips = strings("chips");
    s.tp = counts("tp");
    s.contexts = counts("contexts");
    if (const json* v = field(j, "batch")) {
        if (v->is_string() && v->get<std::string>() == "max") {
            s.batch_mode = BatchMode::max;
            s.batches.clear();
        } else {
            s.batches = read_list<std::int64_t>(*v, join(path, "batch"), as_count);
        }
    }
    if (const json* v = field(j, "batch_cap")) {
        if (v->is_string() && v->get<std::string>() == "none")
            s.batch_cap.reset();
        else
            s.batch_cap = as_int(*v, join(path, "batch_cap"));
    } else if (j.contains("batch_cap")) {
        s.batch_cap.reset();  // explicit null removes the cap
    }
    if (const json* v = field(j, "mem_bw")) s.mem_bw_tbs = read_range(*v, join(path, "mem_bw"), 1.0);
    if (const json* v = field(j, "t_tp_sync_ns"))
        s.t_tp_sync_s = read_range(*v, join(path, "t_tp_sync_ns"), kNanosecond);
    if (const json* v = field(j, "sync_scope")) {
        const auto sc = as_string(*v, join(path, "sync_scope"));
        if (sc == "all")
            s.sync_scope = SyncAxisScope::all;
        else if (sc == "high_radix")
            s.sync_scope = SyncAxisScope::high_radix;
        else
            fail(join(path, "sync_scope"), "expected \"all\" or \"high_radix\"");
    }
    if (const json* v = field(j, "pp")) s.pp = as_int(*v, join(path, "pp"));
    if (const json* v = field(j, "attention_single_device")) {
        if (!v->is_boolean()) fail(join(path, "attention_single_device"), "expected a boolean");
        s.flags.attention_single_device = v->get<bool>();
    }
    if (const json* n = field(j, "normalize")) {
        const auto p = join(path, "normalize");
        require_object(*n, p);
        reject_unknown(*n, p, {"metric", "chip", "tp", "batch", "context", "mem_bw", "t_tp_sync_ns"});
        NormalizeSpec ns;
        if (const json* v = field(*n, "metric")) {
            try {
                ns.metric = metric_from_string(as_string(*v, join(p, "metric")));
            } catch (const ConfigError& e) {
                fail(join(p, "metric"), e.what());
            }
        }
        if (const json* v = field(*n, "chip")) ns.chip = as_string(*v, join(p, "chip"));
        if (const json* v = field(*n, "tp")) ns.tp = as_int(*v, join(p, "tp"));
        if (const json* v = field(*n, "batch")) ns.batch = as_count(*v, join(p, "batch"));
        if (const json* v = field(*n, "context")) ns.context = as_count(*v, join(p, "context"));
        if (const json* v = field(*n, "mem_bw")) ns.mem_bw_tbs = as_number(*v, join(p, "mem_bw"));
        if (const json* v = field(*n, "t_tp_sync_ns"))
            ns.t_tp_sync_s = as_number(*v, join(p, "t_tp_sync_ns")) * kNanosecond;
        s.normalize = ns;
    }
    if (s.name.empty()) s.name = path;
    try {
        validate(s, catalog);
    } catch (const ConfigError& e) {
        fail(path, e.what());
    }
    return s;
}

ConfigFile parse_config(const json& j, ConfigFile base) {
    require_object(j, "config");
    reject_unknown(j, "", {"models", "chips", "power", "sync", "imbalance", "sweeps"});
    ConfigFile cfg = std::move(base);
    auto each = [&](const char* key, auto&& fn) {
        const json* arr = field(j, key);
        if (!arr) return;
        if (!arr->is_array()) fail(key, "expected an array");
        for (std::size_t i = 0; i < arr->size(); ++i) fn((*arr)[i], index(key, i));
    };
    each("models", [&](const json& v, const std::string& p) {
        ModelArch m = parse_model(v, p, cfg.catalog);
        cfg.catalog.models[m.name] = m;
    });
    each("chips", [&](const json& v, const std::string& p) {
        ChipConfig c = parse_chip(v, p, cfg.catalog);
        cfg.catalog.chips[c.name] = c;
    });
    if (const json* v = field(j, "power")) parse_power(*v, "power", cfg.catalog.power);
    if (const json* v = field(j, "sync")) parse_sync(*v, "sync", cfg.catalog.sync);
    if (const json* v = field(j, "imbalance")) parse_imbalance(*v, "imbalance", cfg.imbalance);
    each("sweeps", [&](const json& v, const std::string& p) {
        cfg.sweeps.push_back(parse_sweep(v, p, cfg.catalog));
    });
    return cfg;
}

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    try {
        return json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace

ConfigFile load_config(const std::string& path, ConfigFile base) {
    const json j = read_json_file(path);
    try {
        return parse_config(j, std::move(base));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

ConfigFile load_default_config(const std::string& explicit_path) {
    ConfigFile cfg;
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) cfg = load_config(env, std::move(cfg));
    if (!explicit_path.empty()) cfg = load_config(explicit_path, std::move(cfg));
    return cfg;
}

std::vector<SweepSpec> load_sweeps(const std::string& path, const Catalog& catalog) {
    const json j = read_json_file(path);
    std::vector<SweepSpec> out;
    try {
        if (j.is_object() && j.contains("sweeps")) {
            const json& arr = j.at("sweeps");
            if (!arr.is_array()) fail("sweeps", "expected an array");
            for (std::size_t i = 0; i < arr.size(); ++i)
                out.push_back(parse_sweep(arr[i], index("sweeps", i), catalog));
        } else {
            out.push_back(parse_sweep(j, "sweep", catalog));
        }
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return out;
}

}  // namespace llmlimit
