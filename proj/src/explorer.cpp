#include "llmlimit/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "llmlimit/errors.hpp"
#include "llmlimit/power.hpp"
#include "llmlimit/units.hpp"

namespace llmlimit {

std::string to_string(Metric m) {
    switch (m) {
        case Metric::utps: return "utps";
        case Metric::stps: return "stps";
        case Metric::stps_per_watt: return "stps_per_watt";
    }
    return "utps";
}

Metric metric_from_string(const std::string& s) {
    if (s == "utps") return Metric::utps;
    if (s == "stps") return Metric::stps;
    if (s == "stps_per_watt") return Metric::stps_per_watt;
    throw ConfigError("unknown metric '" + s + "' (expected utps, stps, stps_per_watt)");
}

double SweepRow::metric(Metric m) const {
    switch (m) {
        case Metric::utps: return throughput.utps;
        case Metric::stps: return throughput.stps;
        case Metric::stps_per_watt: return stps_per_watt;
    }
    return 0.0;
}

bool SweepResult::any_feasible() const {
    return std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.feasible; });
}

namespace {

[[noreturn]] void bad_field(const SweepSpec& spec, const std::string& field, const std::string& what) {
    throw ConfigError("sweep '" + spec.name + "': " + field + " " + what);
}

template <typename T, typename Pred>
void check_axis(const SweepSpec& spec, const std::string& field, const std::vector<T>& values,
                Pred ok, const std::string& what) {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!ok(values[i])) bad_field(spec, field + "[" + std::to_string(i) + "]", what);
}

bool close(double a, double b) {
    if (a == b) return true;  // also covers matching infinities
    return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

// Collapses tp values the chip cannot span onto its maximum, keeping order.
std::vector<std::int64_t> tp_axis(const ChipConfig& chip, const std::vector<std::int64_t>& tps) {
    if (!chip.max_tp_span) return tps;
    std::vector<std::int64_t> out;
    for (auto t : tps) {
        auto c = std::min(t, *chip.max_tp_span);
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
}

std::vector<std::int64_t> powers_of_two_up_to(std::int64_t limit) {
    std::vector<std::int64_t> out;
    for (std::int64_t t = 1; t <= limit; t *= 2) out.push_back(t);
    return out;
}

}  // namespace

void validate(const SweepSpec& spec, const Catalog& catalog) {
    // An empty axis is legal and yields an empty result.
    check_axis(spec, "models", spec.models, [](const std::string&) { return true; }, "");
    check_axis(spec, "chips", spec.chips, [](const std::string&) { return true; }, "");
    for (const auto& m : spec.models) catalog.model(m);
    for (const auto& c : spec.chips) catalog.chip(c);
    check_axis(spec, "tp", spec.tp, [](std::int64_t t) { return t >= 1; }, "must be >= 1");
    const bool max_mode = spec.batch_mode == BatchMode::max;
    check_axis(spec, "contexts", spec.contexts,
               [&](std::int64_t t) { return max_mode ? t >= 1 : t >= 0; },
               max_mode ? "must be >= 1 for batch=max" : "must be >= 0");
    check_axis(spec, "batches", spec.batches, [](std::int64_t b) { return b >= 1; },
               "must be >= 1");
    check_axis(spec, "mem_bw", spec.mem_bw_tbs, [](double v) { return v > 0; },
               "must be > 0");
    check_axis(spec, "t_tp_sync", spec.t_tp_sync_s,
               [](double v) { return v >= 0 && std::isfinite(v); }, "must be finite and >= 0");
    if (spec.batch_cap && *spec.batch_cap < 1) bad_field(spec, "batch_cap", "must be >= 1");
    if (spec.pp && *spec.pp < 1) bad_field(spec, "pp", "must be >= 1");
    if (spec.normalize && spec.normalize->chip) catalog.chip(*spec.normalize->chip);
}

std::int64_t ImbalanceSettings::trials_for(std::int64_t tokens, std::int64_t active_experts) const {
    if (tokens <= 1) return 1;
    const double picks = static_cast<double>(tokens) * static_cast<double>(active_experts);
    const auto budget = static_cast<std::int64_t>(std::ceil(sample_budget / picks));
    return std::min(trials, std::max(min_trials, budget));
}

double ImbalanceCache::get(const ModelArch& m, std::int64_t tokens) {
    if (!m.moe || !settings_.enabled || tokens <= 1) return 1.0;
    const Key key{m.moe->routed_experts, m.moe->active_experts, tokens};
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = values_.find(key); it != values_.end()) return it->second;
    ImbalanceQuery q;
    q.routed_experts = m.moe->routed_experts;
    q.active_experts = m.moe->active_experts;
    q.tokens = tokens;
    q.trials = settings_.trials_for(tokens, q.active_experts);
    q.seed = settings_.seed;
    q.denominator = settings_.denominator;
    const double mi = estimate_imbalance(q).mi;
    values_.emplace(key, mi);
    return mi;
}

Explorer::Explorer(Catalog catalog, ExplorerOptions options)
    : catalog_(std::move(catalog)), options_(options), imbalance_(options.imbalance) {}

std::vector<Explorer::Point> Explorer::enumerate(const SweepSpec& spec) const {
    std::vector<Point> points;
    const bool max_mode = spec.batch_mode == BatchMode::max;
    const std::vector<std::int64_t> placeholder{0};
    for (const auto& model_name : spec.models) {
        const ModelArch& m = catalog_.model(model_name);
        for (const auto& chip_name : spec.chips) {
            const ChipConfig& base = catalog_.chip(chip_name);
            const std::vector<double> bws =
                spec.mem_bw_tbs.empty() ? std::vector<double>{base.mem_bw_tbs} : spec.mem_bw_tbs;
            for (auto tp : tp_axis(base, spec.tp)) {
                for (auto context : spec.contexts) {
                    for (auto batch : max_mode ? placeholder : spec.batches) {
                        for (double bw : bws) {
                            const std::size_t n_sync =
                                spec.t_tp_sync_s.empty() ? 1 : spec.t_tp_sync_s.size();
                            for (std::size_t si = 0; si < n_sync; ++si) {
                                Point pt;
                                pt.model = &m;
                                pt.chip = base;
                                pt.chip.mem_bw_tbs = bw;
                                pt.tp = tp;
                                pt.context = context;
                                pt.batch = batch;
                                pt.flags = spec.flags;
                                if (!spec.t_tp_sync_s.empty()) {
                                    pt.sync_axis = spec.t_tp_sync_s[si];
                                    if (spec.sync_scope == SyncAxisScope::all ||
                                        tp >= catalog_.sync.high_radix_threshold)
                                        pt.tp_sync_override = pt.sync_axis;
                                }
                                try {
                                    if (max_mode) {
                                        pt.pp = spec.pp ? *spec.pp
                                                        : min_pp(pt.chip, tp, m, {1, context, 1});
                                        pt.batch = max_batch(pt.chip, tp, pt.pp, m, context,
                                                             spec.batch_cap);
                                    } else {
                                        pt.pp = spec.pp ? *spec.pp
                                                        : min_pp(pt.chip, tp, m, {batch, context, 1});
                                    }
                                } catch (const InfeasibleError& e) {
                                    pt.reason = e.what();
                                } catch (const DomainError& e) {
                                    pt.reason = e.what();
                                }
                                points.push_back(std::move(pt));
                            }
                        }
                    }
                }
            }
        }
    }
    return points;
}

void Explorer::prefetch_imbalance(const std::vector<Point>& points) {
    for (const auto& pt : points)
        if (pt.reason.empty() && pt.model->moe) imbalance_.get(*pt.model, pt.batch);
}

SweepRow Explorer::evaluate(const Point& pt) {
    SweepRow row;
    row.model = pt.model->name;
    row.chip = pt.chip.name;
    row.tp = pt.tp;
    row.pp = pt.pp;
    row.batch = pt.batch;
    row.context = pt.context;
    row.mem_bw_tbs = pt.chip.mem_bw_tbs;
    row.sync_axis_s = pt.sync_axis;
    row.t_tp_sync_s = tp_sync_latency(pt.tp, pt.tp_sync_override ? pt.tp_sync_override
                                                                 : pt.chip.tp_sync_override_s,
                                      catalog_.sync);
    if (!pt.reason.empty()) {
        row.reason = pt.reason;
        return row;
    }
    try {
        const DeploymentPoint p{pt.batch, pt.context, 1};
        const SystemConfig sys =
            compose_system(pt.chip, pt.tp, pt.pp, catalog_.sync, pt.tp_sync_override);
        row.t_tp_sync_s = sys.t_tp_sync;
        row.capacity_gib = capacity_gib(*pt.model, p);
        row.imbalance = imbalance_.get(*pt.model, pt.batch * p.out_seq_len);
        const Evaluation ev = llmlimit::evaluate(*pt.model, p, sys, pt.flags, row.imbalance);
        row.latency = ev.latency;
        row.throughput = ev.throughput;
        row.power_w = system_power(sys, ev.workload, ev.latency.t_batch, catalog_.power);
        row.stps_per_watt = row.power_w > 0 ? ev.throughput.stps / row.power_w : 0.0;
        row.feasible = true;
    } catch (const InfeasibleError& e) {
        row.reason = e.what();
    } catch (const DomainError& e) {
        row.reason = e.what();
    }
    return row;
}

SweepResult Explorer::run(const SweepSpec& spec, bool parallel) {
    validate(spec, catalog_);
    const std::vector<Point> points = enumerate(spec);
    prefetch_imbalance(points);

    SweepResult result;
    result.name = spec.name;
    auto swept = [&](const char* axis, std::size_t n) {
        if (n > 1) result.swept_axes.emplace_back(axis);
    };
    swept("model", spec.models.size());
    swept("chip", spec.chips.size());
    swept("tp", spec.tp.size());
    swept("context", spec.contexts.size());
    swept("batch", spec.batch_mode == BatchMode::max ? 1 : spec.batches.size());
    swept("mem_bw", spec.mem_bw_tbs.size());
    swept("t_tp_sync", spec.t_tp_sync_s.size());
    result.rows.resize(points.size());
    const auto n = static_cast<std::int64_t>(points.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < n; ++i)
            result.rows[static_cast<std::size_t>(i)] = evaluate(points[static_cast<std::size_t>(i)]);
    } else {
        for (std::int64_t i = 0; i < n; ++i)
            result.rows[static_cast<std::size_t>(i)] = evaluate(points[static_cast<std::size_t>(i)]);
    }
    if (spec.normalize) apply_normalization(result, *spec.normalize);
    return result;
}

SweepResult Explorer::run_sweep(const SweepSpec& spec) { return run(spec, options_.parallel); }

SweepResult Explorer::run_sweep_serial(const SweepSpec& spec) { return run(spec, false); }

SweepRow Explorer::evaluate_point(const std::string& model, const ChipConfig& chip,
                                  std::int64_t tp, std::optional<std::int64_t> pp,
                                  std::int64_t batch, std::int64_t context,
                                  const MappingFlags& flags,
                                  std::optional<double> tp_sync_override) {
    Point pt;
    pt.model = &catalog_.model(model);
    pt.chip = chip;
    pt.tp = tp;
    pt.batch = batch;
    pt.context = context;
    pt.flags = flags;
    pt.tp_sync_override = tp_sync_override;
    try {
        pt.pp = pp ? *pp : min_pp(chip, tp, *pt.model, {batch, context, 1});
    } catch (const InfeasibleError& e) {
        pt.reason = e.what();
    } catch (const DomainError& e) {
        pt.reason = e.what();
    }
    return evaluate(pt);
}

SweepRow Explorer::max_utps(const std::string& model, const std::string& chip_name,
                            std::int64_t context, const MappingFlags& flags, bool exhaustive) {
    const ChipConfig& chip = catalog_.chip(chip_name);
    std::vector<std::int64_t> tps;
    if (exhaustive) {
        for (std::int64_t t = 1; t <= kMaxTensorParallel; ++t) tps.push_back(t);
    } else {
        tps = powers_of_two_up_to(kMaxTensorParallel);
    }
    std::optional<SweepRow> best;
    std::string last_reason = "no tensor-parallel degree evaluated";
    for (auto tp : tp_axis(chip, tps)) {
        SweepRow row = evaluate_point(model, chip, tp, std::nullopt, 1, context, flags);
        if (!row.feasible) {
            last_reason = row.reason;
            continue;
        }
        if (!best || row.throughput.utps > best->throughput.utps) best = std::move(row);
    }
    if (!best)
        throw InfeasibleError(model + " on " + chip_name + " at context " + std::to_string(context) +
                              ": " + last_reason);
    return *best;
}

SweepRow Explorer::max_stps(const std::string& model, const std::string& chip_name,
                            std::int64_t tp, std::int64_t context,
                            std::optional<std::int64_t> batch_cap, const MappingFlags& flags) {
    const ChipConfig& chip = catalog_.chip(chip_name);
    const ModelArch& m = catalog_.model(model);
    const std::int64_t pp = min_pp(chip, tp, m, {1, context, 1});
    const std::int64_t batch = max_batch(chip, tp, pp, m, context, batch_cap);
    SweepRow row = evaluate_point(model, chip, tp, pp, batch, context, flags);
    if (!row.feasible) throw InfeasibleError(row.reason);
    return row;
}

std::vector<Explorer::EfficiencyPoint> Explorer::efficiency_curve(
    const std::string& model, const std::string& chip_name, std::int64_t tp,
    const std::vector<std::int64_t>& contexts, std::optional<std::int64_t> batch_cap,
    std::int64_t reference_context) {
    const ChipConfig& chip = catalog_.chip(chip_name);
    const ModelArch& m = catalog_.model(model);

    auto series = [&](std::int64_t context) {
        const std::int64_t pp = min_pp(chip, tp, m, {1, context, 1});
        const std::int64_t top = max_batch(chip, tp, pp, m, context, batch_cap);
        std::vector<std::int64_t> batches = powers_of_two_up_to(top);
        if (batches.back() != top) batches.push_back(top);
        std::vector<EfficiencyPoint> out;
        for (auto b : batches) {
            SweepRow row = evaluate_point(model, chip, tp, pp, b, context);
            if (!row.feasible) throw InfeasibleError(row.reason);
            out.push_back({context, b, row.throughput.utps, row.throughput.stps,
                           row.stps_per_watt, 0.0});
        }
        return out;
    };

    const double ref = series(reference_context).back().stps_per_watt;
    if (!(ref > 0)) throw DomainError("efficiency reference point has zero efficiency");
    std::vector<EfficiencyPoint> out;
    for (auto context : contexts) {
        for (auto& p : series(context)) {
            p.normalized = p.stps_per_watt / ref;
            out.push_back(p);
        }
    }
    return out;
}

void apply_normalization(SweepResult& result, const NormalizeSpec& norm) {
    auto& rows = result.rows;
    auto swept = [&](const char* axis) {
        return std::find(result.swept_axes.begin(), result.swept_axes.end(), axis) !=
               result.swept_axes.end();
    };
    // A pinned field must equal the pin; an unpinned swept axis must equal the
    // row's own value. Unswept fields (bandwidth or sync implied by the chip)
    // are not compared.
    auto matches = [&](const SweepRow& ref, const SweepRow& row) {
        if (!ref.feasible || ref.model != row.model) return false;
        if (ref.context != norm.context.value_or(row.context)) return false;
        if (ref.batch != norm.batch.value_or(row.batch)) return false;
        if (norm.chip ? ref.chip != *norm.chip : swept("chip") && ref.chip != row.chip) return false;
        if (norm.tp ? ref.tp != *norm.tp : swept("tp") && ref.tp != row.tp) return false;
        if (norm.mem_bw_tbs ? !close(ref.mem_bw_tbs, *norm.mem_bw_tbs)
                            : swept("mem_bw") && !close(ref.mem_bw_tbs, row.mem_bw_tbs))
            return false;
        const double ref_sync = ref.sync_axis_s.value_or(ref.t_tp_sync_s);
        const double row_sync = row.sync_axis_s.value_or(row.t_tp_sync_s);
        if (norm.t_tp_sync_s ? !close(ref_sync, *norm.t_tp_sync_s)
                             : swept("t_tp_sync") && !close(ref_sync, row_sync))
            return false;
        return true;
    };
    for (auto& row : rows) {
        row.normalized.reset();
        if (!row.feasible) continue;
        for (const auto& ref : rows) {
            if (!matches(ref, row)) continue;
            const double denom = ref.metric(norm.metric);
            if (denom > 0) row.normalized = row.metric(norm.metric) / denom;
            break;
        }
    }
}

namespace {

const std::vector<std::string> kModels{"llama3-70b", "llama3-405b", "deepseekv3"};
const std::vector<std::int64_t> kSixContexts{4 * 1024, 8 * 1024, 16 * 1024,
                                             32 * 1024, 64 * 1024, 128 * 1024};

std::string display_model(const std::string& name) {
    if (name == "llama3-70b") return "Llama3-70B";
    if (name == "llama3-405b") return "Llama3-405B";
    if (name == "deepseekv3") return "DeepseekV3";
    return name;
}

}  // namespace

const std::vector<std::string>& builtin_sweep_names() {
    static const std::vector<std::string> names{"fig2", "fig3", "fig4", "fig5"};
    return names;
}

SweepSpec builtin_sweep(const std::string& name) {
    SweepSpec s;
    s.name = name;
    s.models = kModels;
    if (name == "fig2") {
        s.chips = {"xpu-hbm3"};
        s.tp = {128};
        s.contexts = {4 * 1024, 32 * 1024, 128 * 1024};
        for (int bw = 4; bw <= 120; bw += 4) s.mem_bw_tbs.push_back(bw);
        s.t_tp_sync_s = {200 * kNanosecond};
        s.normalize = NormalizeSpec{Metric::utps, std::nullopt, std::nullopt, std::nullopt,
                                    std::nullopt, 4.0, std::nullopt};
    } else if (name == "fig3") {
        s.models = {"llama3-405b"};
        s.chips = {"xpu-hbm3", "xpu-3d-dram", "xpu-sram"};
        s.tp = {8, 128};
        s.contexts = {128 * 1024};
        for (double us : {0.2, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0})
            s.t_tp_sync_s.push_back(us * kMicrosecond);
        s.sync_scope = SyncAxisScope::high_radix;
    } else if (name == "fig4") {
        s.chips = {"xpu-hbm3"};
        s.tp = {128};
        s.contexts = kSixContexts;
        s.batches = {1, 2, 4, 8, 16, 32};
        s.normalize = NormalizeSpec{Metric::stps_per_watt, std::nullopt, std::nullopt, 32,
                                    4 * 1024, std::nullopt, std::nullopt};
    } else if (name == "fig5") {
        s.chips = {"xpu-hbm3", "xpu-hbm4", "xpu-3d-dram", "xpu-sram", "xpu-cows"};
        s.tp = {128};
        s.contexts = {4 * 1024, 128 * 1024};
        s.batches = {1, 2, 4, 8, 16, 32, 64};
        s.normalize = NormalizeSpec{Metric::stps_per_watt, std::string("xpu-hbm3"), std::nullopt,
                                    1, std::nullopt, std::nullopt, std::nullopt};
    } else {
        throw ConfigError("unknown built-in sweep '" + name + "' (known: fig2, fig3, fig4, fig5)");
    }
    return s;
}

ThroughputTable throughput_table(Explorer& explorer, const std::string& which) {
    ThroughputTable table;
    table.which = which;
    if (which == "t2") {
        table.contexts = {4 * 1024, 128 * 1024};
        table.has_user = table.has_system = true;
    } else if (which == "t3") {
        table.contexts = kSixContexts;
        table.has_user = true;
    } else if (which == "t4") {
        table.contexts = kSixContexts;
        table.has_system = true;
    } else {
        throw ConfigError("unknown table '" + which + "' (expected t2, t3, t4)");
    }

    const Catalog& cat = explorer.catalog();
    const bool with_cent = which != "t2";
    const bool have_cent = cat.has_chip("cent");
    const ChipConfig hbm3 = cat.chip("xpu-hbm3");

    auto infeasible = [](const std::string& why) {
        TableCell c;
        c.reason = why;
        return c;
    };
    auto from_row = [&](const SweepRow& r) {
        if (!r.feasible) return infeasible(r.reason);
        TableCell c;
        c.feasible = true;
        c.utps = r.throughput.utps;
        c.stps = r.throughput.stps;
        c.batch = r.batch;
        c.pp = r.pp;
        return c;
    };
    auto guarded = [&](auto&& fn) {
        try {
            return fn();
        } catch (const InfeasibleError& e) {
            return infeasible(e.what());
        } catch (const DomainError& e) {
            return infeasible(e.what());
        }
    };

    for (const auto& model : kModels) {
        for (std::int64_t tp : {8, 32, 128}) {
            TableRow row;
            row.model = display_model(model);
            row.label = "xPU-HBM3-TP" + std::to_string(tp);
            for (auto ctx : table.contexts) {
                if (table.has_user)
                    row.user.push_back(guarded([&] {
                        return from_row(explorer.evaluate_point(model, hbm3, tp, std::nullopt, 1, ctx));
                    }));
                if (table.has_system)
                    row.system.push_back(
                        guarded([&] { return from_row(explorer.max_stps(model, "xpu-hbm3", tp, ctx)); }));
            }
            table.rows.push_back(std::move(row));
        }
        if (!with_cent) continue;
        for (const std::string label : {"CENT-TP", "CENT-PP"}) {
            TableRow row;
            row.model = display_model(model);
            row.label = label;
            const bool tp_mode = label == "CENT-TP";
            for (auto ctx : table.contexts) {
                auto cell = [&](bool system) {
                    if (!have_cent) return infeasible("no chip named 'cent' configured");
                    return guarded([&] {
                        if (tp_mode) {
                            MappingFlags f;
                            f.attention_single_device = true;
                            return from_row(explorer.max_utps(model, "cent", ctx, f));
                        }
                        if (system) return from_row(explorer.max_stps(model, "cent", 1, ctx));
                        return from_row(explorer.evaluate_point(model, cat.chip("cent"), 1,
                                                                std::nullopt, 1, ctx));
                    });
                };
                if (table.has_user) row.user.push_back(cell(false));
                if (table.has_system) row.system.push_back(cell(true));
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

}  // namespace llmlimit
