#pragma once

#include <map>
#include <string>
#include <vector>

#include "llmlimit/machine.hpp"
#include "llmlimit/model.hpp"
#include "llmlimit/power.hpp"

namespace llmlimit {

// Named models and chips (built-ins plus anything loaded from config), and
// the power/sync constants every evaluation shares.
struct Catalog {
    std::map<std::string, ModelArch> models;
    std::map<std::string, ChipConfig> chips;
    PowerModel power;
    SyncParams sync;

    static Catalog builtin();

    const ModelArch& model(const std::string& name) const;
    const ChipConfig& chip(const std::string& name) const;
    bool has_chip(const std::string& name) const { return chips.count(name) > 0; }

    std::vector<std::string> model_names() const;
    std::vector<std::string> chip_names() const;
};

}  // namespace llmlimit
