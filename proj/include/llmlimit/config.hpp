#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "llmlimit/catalog.hpp"
#include "llmlimit/explorer.hpp"

namespace llmlimit {

// Environment variable naming the default config file.
inline constexpr const char* kConfigEnvVar = "LLMLIMIT_CONFIG";

struct ConfigFile {
    Catalog catalog = Catalog::builtin();
    ImbalanceSettings imbalance;
    std::vector<SweepSpec> sweeps;
};

// Top level: {models:[], chips:[], power:{}, sync:{}, imbalance:{}, sweeps:[]},
// all optional. Entries are layered over the built-ins; a model or chip may
// name a "base" to start from. Errors are ConfigError with a field path,
// e.g. "chips[1].mem_bw: expected a number".
ConfigFile parse_config(const nlohmann::json& j, ConfigFile base = {});
ConfigFile load_config(const std::string& path, ConfigFile base = {});

// Built-ins, then the file named by LLMLIMIT_CONFIG (if set), then
// `explicit_path` (if non-empty).
ConfigFile load_default_config(const std::string& explicit_path = "");

// A sweep spec file holds either one sweep object or {"sweeps": [...]}.
std::vector<SweepSpec> load_sweeps(const std::string& path, const Catalog& catalog);
SweepSpec parse_sweep(const nlohmann::json& j, const std::string& path, const Catalog& catalog);

// "4096", "4K", "128k", "1M" (binary multiples). Throws ConfigError.
std::int64_t parse_count(const std::string& text);

// "96GiB", "512MiB", "96GB", "1.5e9" (bytes). Throws ConfigError.
double parse_bytes(const std::string& text);

}  // namespace llmlimit
