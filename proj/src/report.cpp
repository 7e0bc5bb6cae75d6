#include "llmlimit/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "llmlimit/errors.hpp"
#include "llmlimit/workload.hpp"

namespace llmlimit {

using nlohmann::json;

Format format_from_string(const std::string& s) {
    std::string lower;
    for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "markdown" || lower == "md") return Format::markdown;
    if (lower == "csv") return Format::csv;
    if (lower == "json") return Format::json;
    throw ConfigError("unknown format '" + s + "' (expected markdown, csv, json)");
}

std::string to_string(Format f) {
    switch (f) {
        case Format::markdown: return "markdown";
        case Format::csv: return "csv";
        case Format::json: return "json";
    }
    return "markdown";
}

void emit(const std::string& text, const RenderTarget& target) {
    if (target.destination.empty() || target.destination == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(target.destination);
    if (!out) throw Error("cannot open '" + target.destination + "' for writing");
    out << text;
    if (!out) throw Error("write to '" + target.destination + "' failed");
}

namespace {

std::string printf_str(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string md_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

// Full-precision number for machine-readable outputs.
std::string exact(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return printf_str("%.10g", v);
}

std::string throughput_number(double v, const RenderTarget& t) {
    return t.k_notation ? format_k(v) : printf_str("%.0f", v);
}

std::string md_table(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows,
                     const std::vector<bool>& right_align = {}) {
    std::ostringstream out;
    out << "|";
    for (const auto& h : header) out << " " << h << " |";
    out << "\n|";
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i < right_align.size() && right_align[i] ? "---:|" : "---|");
    out << "\n";
    for (const auto& r : rows) {
        out << "|";
        for (const auto& c : r) out << " " << c << " |";
        out << "\n";
    }
    return out.str();
}

std::string csv_lines(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_escape(header[i]);
    out << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_escape(r[i]);
        out << "\n";
    }
    return out.str();
}

}  // namespace

std::string format_k(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : "-";
    if (v < 0) return "-" + format_k(-v);
    if (std::round(v) < 1000) return printf_str("%.0f", v);
    auto scaled = [](double x, const char* suffix) -> std::string {
        if (std::round(x * 10) / 10 < 10) return printf_str("%.1f", x) + suffix;
        return printf_str("%.0f", x) + suffix;
    };
    const double k = v / 1e3;
    if (std::round(k) < 1000) return scaled(k, "K");
    return scaled(v / 1e6, "M");
}

std::string format_sig(double v, int precision) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (std::isnan(v) ? "nan" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", std::max(1, precision), v);
    return buf;
}

std::string format_context(std::int64_t tokens) {
    constexpr std::int64_t k = 1024;
    if (tokens >= k * k && tokens % (k * k) == 0) return std::to_string(tokens / (k * k)) + "M";
    if (tokens >= k && tokens % k == 0) return std::to_string(tokens / k) + "K";
    return std::to_string(tokens);
}

// ---- capacity / intensity ----

const CapacityCell& CapacityTable::at(const std::string& model, std::int64_t batch,
                                      std::int64_t context) const {
    for (const auto& c : cells)
        if (c.model == model && c.batch == batch && c.context == context) return c;
    throw Error("capacity table has no cell for " + model + " B=" + std::to_string(batch) +
                " T=" + std::to_string(context));
}

CapacityTable capacity_table(const Catalog& catalog, const std::vector<std::string>& models,
                             const std::vector<std::int64_t>& batches,
                             const std::vector<std::int64_t>& contexts) {
    CapacityTable t{models, batches, contexts, {}};
    for (const auto& name : models) {
        const ModelArch& m = catalog.model(name);
        for (auto b : batches) {
            for (auto ctx : contexts) {
                const DeploymentPoint p{b, ctx, 1};
                t.cells.push_back({name, b, ctx, std::llround(capacity_gib(m, p)),
                                   arithmetic_intensity(m, p)});
            }
        }
    }
    return t;
}

CapacityTable default_capacity_table(const Catalog& catalog) {
    std::vector<std::int64_t> contexts;
    for (std::int64_t t = 1024; t <= 128 * 1024; t *= 2) contexts.push_back(t);
    return capacity_table(catalog, {"llama3-70b", "llama3-405b", "deepseekv3"}, {1, 32}, contexts);
}

json capacity_to_json(const CapacityTable& t) {
    json j;
    j["kind"] = "capacity";
    j["models"] = t.models;
    j["batches"] = t.batches;
    j["contexts"] = t.contexts;
    j["cells"] = json::array();
    for (const auto& c : t.cells)
        j["cells"].push_back({{"model", c.model},
                              {"batch", c.batch},
                              {"context", c.context},
                              {"capacity_gib", c.capacity_gib},
                              {"ami", c.ami}});
    return j;
}

CapacityTable capacity_from_json(const json& j) {
    try {
        if (j.at("kind").get<std::string>() != "capacity") throw ConfigError("kind must be \"capacity\"");
        CapacityTable t;
        t.models = j.at("models").get<std::vector<std::string>>();
        t.batches = j.at("batches").get<std::vector<std::int64_t>>();
        t.contexts = j.at("contexts").get<std::vector<std::int64_t>>();
        for (const auto& c : j.at("cells"))
            t.cells.push_back({c.at("model").get<std::string>(), c.at("batch").get<std::int64_t>(),
                               c.at("context").get<std::int64_t>(),
                               c.at("capacity_gib").get<std::int64_t>(), c.at("ami").get<double>()});
        return t;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("capacity table JSON: ") + e.what());
    }
}

std::string render_capacity(const CapacityTable& t, const RenderTarget& target) {
    if (target.format == Format::json) return capacity_to_json(t).dump(2) + "\n";
    if (target.format == Format::csv) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& c : t.cells)
            rows.push_back({c.model, std::to_string(c.batch), std::to_string(c.context),
                            std::to_string(c.capacity_gib), exact(c.ami)});
        return csv_lines({"model", "batch", "context", "capacity_gib", "ami"}, rows);
    }
    std::vector<std::string> header{"T"};
    for (const char* kind : {"Capacity (GiB)", "AMI (FLOP/B)"})
        for (const auto& m : t.models)
            for (auto b : t.batches) header.push_back(std::string(kind) + " " + m + " B=" + std::to_string(b));
    std::vector<std::vector<std::string>> rows;
    for (auto ctx : t.contexts) {
        std::vector<std::string> r{format_context(ctx)};
        for (const auto& m : t.models)
            for (auto b : t.batches) r.push_back(std::to_string(t.at(m, b, ctx).capacity_gib));
        for (const auto& m : t.models)
            for (auto b : t.batches) r.push_back(printf_str("%.2f", t.at(m, b, ctx).ami));
        rows.push_back(std::move(r));
    }
    return md_table(header, rows, std::vector<bool>(header.size(), true));
}

// ---- rows ----

const std::vector<std::string>& row_columns() {
    static const std::vector<std::string> cols{
        "model", "chip", "tp", "pp", "batch", "context", "mem_bw_tbs", "t_tp_sync_s",
        "sync_axis_s", "t_compute_s", "t_mem_s", "t_exposed_sync_s", "t_exposed_pp_s",
        "t_exposed_moe_balance_s", "t_exposed_moe_routing_s", "t_exposed_other_s", "t_batch_s",
        "utps", "stps", "bottleneck", "tensor_utilization", "mem_bw_utilization", "imbalance",
        "capacity_gib", "power_w", "stps_per_watt", "normalized", "status", "reason"};
    return cols;
}

namespace {

std::vector<std::string> row_csv(const SweepRow& r) {
    auto num = [&](double v) { return r.feasible ? exact(v) : std::string(); };
    return {r.model,
            r.chip,
            std::to_string(r.tp),
            r.pp ? std::to_string(r.pp) : "",
            r.batch ? std::to_string(r.batch) : "",
            std::to_string(r.context),
            exact(r.mem_bw_tbs),
            exact(r.t_tp_sync_s),
            r.sync_axis_s ? exact(*r.sync_axis_s) : "",
            num(r.latency.t_compute),
            num(r.latency.t_mem),
            num(r.latency.t_exposed_sync),
            num(r.latency.t_exposed_pp),
            num(r.latency.t_exposed_moe_balance),
            num(r.latency.t_exposed_moe_routing),
            num(r.latency.t_exposed_other),
            num(r.latency.t_batch),
            num(r.throughput.utps),
            num(r.throughput.stps),
            r.feasible ? to_string(r.throughput.bottleneck) : "",
            num(r.throughput.tensor_utilization),
            num(r.throughput.mem_bw_utilization),
            num(r.imbalance),
            num(r.capacity_gib),
            num(r.power_w),
            num(r.stps_per_watt),
            r.normalized ? exact(*r.normalized) : "",
            r.feasible ? "ok" : "infeasible",
            r.reason};
}

}  // namespace

json row_to_json(const SweepRow& r) {
    json j;
    j["model"] = r.model;
    j["chip"] = r.chip;
    j["tp"] = r.tp;
    j["pp"] = r.pp;
    j["batch"] = r.batch;
    j["context"] = r.context;
    j["mem_bw_tbs"] = std::isfinite(r.mem_bw_tbs) ? json(r.mem_bw_tbs) : json("inf");
    j["t_tp_sync_s"] = r.t_tp_sync_s;
    j["sync_axis_s"] = r.sync_axis_s ? json(*r.sync_axis_s) : json(nullptr);
    j["status"] = r.feasible ? "ok" : "infeasible";
    if (!r.feasible) {
        j["reason"] = r.reason;
        return j;
    }
    j["latency"] = {{"t_compute_s", r.latency.t_compute},
                    {"t_mem_s", r.latency.t_mem},
                    {"t_exposed_sync_s", r.latency.t_exposed_sync},
                    {"t_exposed_pp_s", r.latency.t_exposed_pp},
                    {"t_exposed_moe_balance_s", r.latency.t_exposed_moe_balance},
                    {"t_exposed_moe_routing_s", r.latency.t_exposed_moe_routing},
                    {"t_exposed_other_s", r.latency.t_exposed_other},
                    {"t_batch_s", r.latency.t_batch}};
    j["utps"] = r.throughput.utps;
    j["stps"] = r.throughput.stps;
    j["bottleneck"] = to_string(r.throughput.bottleneck);
    j["tensor_utilization"] = r.throughput.tensor_utilization;
    j["mem_bw_utilization"] = r.throughput.mem_bw_utilization;
    j["imbalance"] = r.imbalance;
    j["capacity_gib"] = r.capacity_gib;
    j["power_w"] = r.power_w;
    j["stps_per_watt"] = r.stps_per_watt;
    j["normalized"] = r.normalized ? json(*r.normalized) : json(nullptr);
    return j;
}

std::string render_rows(const std::vector<SweepRow>& rows, const RenderTarget& target) {
    if (target.format == Format::json) {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back(row_to_json(r));
        return arr.dump(2) + "\n";
    }
    if (target.format == Format::csv) {
        std::vector<std::vector<std::string>> body;
        for (const auto& r : rows) body.push_back(row_csv(r));
        return csv_lines(row_columns(), body);
    }
    const int p = target.precision;
    std::vector<std::vector<std::string>> body;
    bool any_norm = false;
    for (const auto& r : rows) any_norm = any_norm || r.normalized.has_value();
    for (const auto& r : rows) {
        std::vector<std::string> line{r.model, r.chip, std::to_string(r.tp),
                                      r.pp ? std::to_string(r.pp) : "-",
                                      r.batch ? std::to_string(r.batch) : "-",
                                      format_context(r.context)};
        if (r.feasible) {
            line.insert(line.end(),
                        {throughput_number(r.throughput.utps, target),
                         throughput_number(r.throughput.stps, target),
                         to_string(r.throughput.bottleneck),
                         format_sig(r.latency.t_batch * 1e6, p),
                         format_sig(r.capacity_gib, p),
                         format_sig(r.stps_per_watt, p)});
            if (any_norm) line.push_back(r.normalized ? format_sig(*r.normalized, p) : "-");
            line.push_back("ok");
        } else {
            for (int i = 0; i < 6; ++i) line.push_back("-");
            if (any_norm) line.push_back("-");
            line.push_back(md_escape("infeasible: " + r.reason));
        }
        body.push_back(std::move(line));
    }
    std::vector<std::string> header{"model", "chip", "TP", "PP", "B", "T", "UTPS", "STPS",
                                    "bound", "t_batch (us)", "capacity (GiB)", "STPS/W"};
    if (any_norm) header.push_back("normalized");
    header.push_back("status");
    return md_table(header, body);
}

std::string render_breakdown(const SweepRow& r, const RenderTarget& target) {
    if (target.format != Format::markdown) {
        if (target.format == Format::json) return row_to_json(r).dump(2) + "\n";
        return render_rows({r}, target);
    }
    std::ostringstream out;
    out << "**" << r.model << "** on **" << r.chip << "**: TP=" << r.tp << " PP=" << r.pp
        << " B=" << r.batch << " T=" << format_context(r.context) << "\n\n";
    if (!r.feasible) {
        out << "infeasible: " << r.reason << "\n";
        return out.str();
    }
    const int p = target.precision;
    auto us = [&](double s) { return format_sig(s * 1e6, p) + " us"; };
    const auto& l = r.latency;
    std::vector<std::vector<std::string>> rows{
        {"T_compute", us(l.t_compute)},
        {"T_mem", us(l.t_mem)},
        {"T_exposed (TP sync)", us(l.t_exposed_sync)},
        {"T_exposed (PP sync)", us(l.t_exposed_pp)},
        {"T_exposed (MoE balance)", us(l.t_exposed_moe_balance)},
        {"T_exposed (MoE routing)", us(l.t_exposed_moe_routing)},
        {"T_exposed (other)", us(l.t_exposed_other)},
        {"T_batch", us(l.t_batch)},
        {"UTPS", format_sig(r.throughput.utps, p)},
        {"STPS", format_sig(r.throughput.stps, p)},
        {"bottleneck", to_string(r.throughput.bottleneck)},
        {"tensor utilization", format_sig(r.throughput.tensor_utilization * 100, p) + " %"},
        {"memory bw utilization", format_sig(r.throughput.mem_bw_utilization * 100, p) + " %"},
        {"MoE imbalance", format_sig(r.imbalance, p)},
        {"capacity", format_sig(r.capacity_gib, p) + " GiB"},
        {"power", format_sig(r.power_w, p) + " W"},
        {"STPS/W", format_sig(r.stps_per_watt, p)},
    };
    out << md_table({"quantity", "value"}, rows, {false, true});
    return out.str();
}

// ---- sweeps ----

namespace {

struct Axis {
    std::string name;   // key in SweepResult::swept_axes
    std::string label;  // column / series label
    std::string (*value)(const SweepRow&);
};

std::string axis_mem_bw(const SweepRow& r) { return exact(r.mem_bw_tbs); }
std::string axis_sync(const SweepRow& r) { return exact(r.sync_axis_s.value_or(r.t_tp_sync_s) * 1e9); }
std::string axis_batch(const SweepRow& r) { return std::to_string(r.batch); }
std::string axis_context(const SweepRow& r) { return std::to_string(r.context); }
std::string axis_tp(const SweepRow& r) { return std::to_string(r.tp); }
std::string axis_model(const SweepRow& r) { return r.model; }
std::string axis_chip(const SweepRow& r) { return r.chip; }

std::string wide(const SweepResult& result, const RenderTarget& target, Metric metric) {
    const std::vector<Axis> x_candidates{{"mem_bw", "mem_bw_tbs", axis_mem_bw},
                                         {"t_tp_sync", "t_tp_sync_ns", axis_sync},
                                         {"batch", "batch", axis_batch},
                                         {"context", "context", axis_context},
                                         {"tp", "tp", axis_tp}};
    const std::vector<Axis> series_axes{{"model", "model", axis_model},
                                        {"chip", "chip", axis_chip},
                                        {"tp", "tp", axis_tp},
                                        {"context", "context", axis_context},
                                        {"batch", "batch", axis_batch},
                                        {"mem_bw", "mem_bw_tbs", axis_mem_bw},
                                        {"t_tp_sync", "t_tp_sync_ns", axis_sync}};
    // Prefer the spec's own axes; fall back to whatever varies in the rows.
    auto varies = [&](const Axis& a) {
        if (!result.swept_axes.empty())
            return std::find(result.swept_axes.begin(), result.swept_axes.end(), a.name) !=
                   result.swept_axes.end();
        std::set<std::string> seen;
        for (const auto& r : result.rows) seen.insert(a.value(r));
        return seen.size() > 1;
    };
    const Axis* x = &x_candidates.back();
    for (const auto& a : x_candidates)
        if (varies(a)) {
            x = &a;
            break;
        }
    std::vector<const Axis*> keys;
    for (const auto& a : series_axes)
        if (a.name != x->name && varies(a)) keys.push_back(&a);

    std::vector<std::string> xs, series;
    std::map<std::pair<std::string, std::string>, const SweepRow*> cell;
    for (const auto& r : result.rows) {
        const std::string xv = x->value(r);
        std::string sv;
        for (const Axis* k : keys) sv += (sv.empty() ? "" : " ") + k->label + "=" + k->value(r);
        if (sv.empty()) sv = to_string(metric);
        if (std::find(xs.begin(), xs.end(), xv) == xs.end()) xs.push_back(xv);
        if (std::find(series.begin(), series.end(), sv) == series.end()) series.push_back(sv);
        cell.emplace(std::make_pair(xv, sv), &r);
    }
    bool normalized = false;
    for (const auto& r : result.rows) normalized = normalized || r.normalized.has_value();
    auto value = [&](const SweepRow* r) -> std::optional<double> {
        if (!r || !r->feasible) return std::nullopt;
        if (normalized) return r->normalized;
        return r->metric(metric);
    };
    auto lookup = [&](const std::string& xv, const std::string& sv) -> const SweepRow* {
        auto it = cell.find({xv, sv});
        return it == cell.end() ? nullptr : it->second;
    };

    if (target.format == Format::json) {
        json j;
        j["name"] = result.name;
        j["x"] = x->label;
        j["metric"] = to_string(metric);
        j["normalized"] = normalized;
        j["series"] = json::array();
        for (const auto& s : series) {
            json pts = json::array();
            for (const auto& xv : xs) {
                auto v = value(lookup(xv, s));
                pts.push_back({std::stod(xv), v ? json(*v) : json(nullptr)});
            }
            j["series"].push_back({{"label", s}, {"points", pts}});
        }
        return j.dump(2) + "\n";
    }
    std::vector<std::string> header{x->label};
    header.insert(header.end(), series.begin(), series.end());
    std::vector<std::vector<std::string>> rows;
    const bool csv = target.format == Format::csv;
    for (const auto& xv : xs) {
        std::vector<std::string> line{xv};
        for (const auto& s : series) {
            auto v = value(lookup(xv, s));
            line.push_back(v ? (csv ? exact(*v) : format_sig(*v, target.precision)) : (csv ? "" : "-"));
        }
        rows.push_back(std::move(line));
    }
    return csv ? csv_lines(header, rows) : md_table(header, rows);
}

}  // namespace

std::string render_sweep(const SweepResult& result, const RenderTarget& target, SweepLayout layout,
                         Metric metric) {
    if (layout == SweepLayout::wide) return wide(result, target, metric);
    if (target.format == Format::json) {
        json j;
        j["name"] = result.name;
        j["rows"] = json::array();
        for (const auto& r : result.rows) j["rows"].push_back(row_to_json(r));
        return j.dump(2) + "\n";
    }
    return render_rows(result.rows, target);
}

// ---- throughput tables ----

std::string render_throughput_table(const ThroughputTable& t, const RenderTarget& target) {
    if (target.format == Format::json || target.format == Format::csv) {
        json j;
        j["table"] = t.which;
        j["contexts"] = t.contexts;
        j["rows"] = json::array();
        std::vector<std::vector<std::string>> csv_rows;
        for (const auto& row : t.rows) {
            json jr{{"model", row.model}, {"config", row.label}};
            auto emit_cells = [&](const std::vector<TableCell>& cells, const char* kind) {
                json arr = json::array();
                for (std::size_t i = 0; i < cells.size(); ++i) {
                    const auto& c = cells[i];
                    json jc{{"context", t.contexts[i]}, {"feasible", c.feasible}};
                    if (c.feasible) {
                        jc["utps"] = c.utps;
                        jc["stps"] = c.stps;
                        jc["batch"] = c.batch;
                        jc["pp"] = c.pp;
                    } else {
                        jc["reason"] = c.reason;
                    }
                    arr.push_back(jc);
                    csv_rows.push_back({row.model, row.label, kind, std::to_string(t.contexts[i]),
                                        c.feasible ? "ok" : "infeasible",
                                        c.feasible ? exact(c.utps) : "",
                                        c.feasible ? exact(c.stps) : "",
                                        c.feasible ? std::to_string(c.batch) : "",
                                        c.feasible ? std::to_string(c.pp) : "", c.reason});
                }
                jr[kind] = arr;
            };
            if (t.has_user) emit_cells(row.user, "user");
            if (t.has_system) emit_cells(row.system, "system");
            j["rows"].push_back(jr);
        }
        if (target.format == Format::json) return j.dump(2) + "\n";
        return csv_lines({"model", "config", "kind", "context", "status", "utps", "stps", "batch", "pp",
                          "reason"},
                         csv_rows);
    }

    auto user_cell = [&](const TableCell& c) {
        return c.feasible ? throughput_number(c.utps, target) : std::string("-");
    };
    auto system_cell = [&](const TableCell& c) {
        if (!c.feasible) return std::string("- (-)");
        return throughput_number(c.stps, target) + " (" + throughput_number(c.utps, target) + ")";
    };

    std::vector<std::string> header{"Context Length"};
    if (t.has_user)
        for (auto ctx : t.contexts)
            header.push_back((t.has_system ? "Max UTPS " : "") + format_context(ctx));
    if (t.has_system)
        for (auto ctx : t.contexts)
            header.push_back((t.has_user ? "Max STPS (UTPS) " : "") + format_context(ctx));

    std::vector<std::vector<std::string>> rows;
    std::string current;
    for (const auto& row : t.rows) {
        if (row.model != current) {
            current = row.model;
            std::vector<std::string> banner{"**" + current + "**"};
            banner.resize(header.size());
            rows.push_back(std::move(banner));
        }
        std::vector<std::string> line{row.label};
        for (const auto& c : row.user) line.push_back(user_cell(c));
        for (const auto& c : row.system) line.push_back(system_cell(c));
        rows.push_back(std::move(line));
    }
    std::vector<bool> align(header.size(), true);
    align[0] = false;
    return md_table(header, rows, align);
}

}  // namespace llmlimit
