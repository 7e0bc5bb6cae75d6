#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "llmlimit/catalog.hpp"
#include "llmlimit/explorer.hpp"

namespace llmlimit {

enum class Format { markdown, csv, json };
Format format_from_string(const std::string& s);  // case-insensitive
std::string to_string(Format f);

struct RenderTarget {
    Format format = Format::markdown;
    std::string destination;  // empty: standard output
    int precision = 3;        // significant digits
    bool k_notation = true;   // 48000 -> "48K"
};

// Writes `text` to the target's destination. Throws Error on I/O failure.
void emit(const std::string& text, const RenderTarget& target);

// Table-style compact numbers: "990", "1.5K", "26K", "1.5M".
std::string format_k(double v);
std::string format_sig(double v, int precision);
// 4096 -> "4K", 1048576 -> "1M", 1000 -> "1000".
std::string format_context(std::int64_t tokens);

struct CapacityCell {
    std::string model;
    std::int64_t batch = 0;
    std::int64_t context = 0;
    std::int64_t capacity_gib = 0;  // rounded to the nearest GiB
    double ami = 0.0;
};

struct CapacityTable {
    std::vector<std::string> models;
    std::vector<std::int64_t> batches;
    std::vector<std::int64_t> contexts;
    std::vector<CapacityCell> cells;  // model-major, then batch, then context

    const CapacityCell& at(const std::string& model, std::int64_t batch, std::int64_t context) const;
};

CapacityTable capacity_table(const Catalog& catalog, const std::vector<std::string>& models,
                             const std::vector<std::int64_t>& batches,
                             const std::vector<std::int64_t>& contexts);
// Three built-in models, B in {1, 32}, T in {1K..128K}.
CapacityTable default_capacity_table(const Catalog& catalog);

std::string render_capacity(const CapacityTable& t, const RenderTarget& target);
nlohmann::json capacity_to_json(const CapacityTable& t);
CapacityTable capacity_from_json(const nlohmann::json& j);

// Stable CSV column order for sweep and throughput rows.
const std::vector<std::string>& row_columns();
nlohmann::json row_to_json(const SweepRow& r);

// One line per row (long layout).
std::string render_rows(const std::vector<SweepRow>& rows, const RenderTarget& target);

// Latency breakdown of a single point, one field per line in markdown.
std::string render_breakdown(const SweepRow& row, const RenderTarget& target);

enum class SweepLayout { long_rows, wide };

// Wide layout: the first swept axis among mem_bw, t_tp_sync, batch, context,
// tp becomes the x column and each combination of the other swept axes a
// series column. Cells hold the normalized value when the sweep was
// normalized, else `metric`.
std::string render_sweep(const SweepResult& result, const RenderTarget& target,
                         SweepLayout layout = SweepLayout::long_rows, Metric metric = Metric::utps);

std::string render_throughput_table(const ThroughputTable& t, const RenderTarget& target);

}  // namespace llmlimit
