#pragma once

// Checks a document against the subset of JSON Schema the published schemas
// use: type, enum, required, properties, additionalProperties=false, items,
// minimum, maximum, oneOf. Returns an empty string when valid.

#include <string>

#include "json.hpp"

namespace schema {

using nlohmann::json;

inline bool has_type(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    return false;
}

inline std::string check(const json& v, const json& s, const std::string& path = "$") {
    if (s.contains("oneOf")) {
        int hits = 0;
        for (const auto& alt : s["oneOf"])
            if (check(v, alt, path).empty()) ++hits;
        if (hits != 1) return path + ": matches " + std::to_string(hits) + " oneOf branches";
    }
    if (s.contains("type")) {
        bool ok = false;
        if (s["type"].is_array()) {
            for (const auto& t : s["type"]) ok = ok || has_type(v, t.get<std::string>());
        } else {
            ok = has_type(v, s["type"].get<std::string>());
        }
        if (!ok) return path + ": wrong type";
    }
    if (s.contains("enum")) {
        bool ok = false;
        for (const auto& e : s["enum"]) ok = ok || e == v;
        if (!ok) return path + ": not in enum";
    }
    if (v.is_number()) {
        if (s.contains("minimum") && v.get<double>() < s["minimum"].get<double>())
            return path + ": below minimum";
        if (s.contains("maximum") && v.get<double>() > s["maximum"].get<double>())
            return path + ": above maximum";
    }
    if (v.is_object()) {
        if (s.contains("required"))
            for (const auto& k : s["required"])
                if (!v.contains(k.get<std::string>())) return path + ": missing " + k.get<std::string>();
        const json props = s.value("properties", json::object());
        for (const auto& [k, item] : v.items()) {
            if (props.contains(k)) {
                auto e = check(item, props[k], path + "." + k);
                if (!e.empty()) return e;
            } else if (s.contains("additionalProperties") && s["additionalProperties"] == false) {
                return path + ": unexpected " + k;
            }
        }
    }
    if (v.is_array() && s.contains("items")) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto e = check(v[i], s["items"], path + "[" + std::to_string(i) + "]");
            if (!e.empty()) return e;
        }
    }
    return "";
}

}  // namespace schema
