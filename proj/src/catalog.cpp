#include "llmlimit/catalog.hpp"

#include "llmlimit/errors.hpp"

namespace llmlimit {

namespace {

template <typename Map>
std::string known_names(const Map& m) {
    std::string out;
    for (const auto& [name, _] : m) {
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

}  // namespace

Catalog Catalog::builtin() {
    Catalog c;
    for (const auto& name : builtin_model_names()) c.models.emplace(name, builtin_model(name));
    for (const auto& name : builtin_chip_names()) c.chips.emplace(name, builtin_chip(name));
    return c;
}

const ModelArch& Catalog::model(const std::string& name) const {
    auto it = models.find(name);
    if (it == models.end())
        throw ConfigError("unknown model '" + name + "' (known: " + known_names(models) + ")");
    return it->second;
}

const ChipConfig& Catalog::chip(const std::string& name) const {
    auto it = chips.find(name);
    if (it == chips.end())
        throw ConfigError("unknown chip '" + name + "' (known: " + known_names(chips) + ")");
    return it->second;
}

std::vector<std::string> Catalog::model_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : models) out.push_back(name);
    return out;
}

std::vector<std::string> Catalog::chip_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : chips) out.push_back(name);
    return out;
}

}  // namespace llmlimit
