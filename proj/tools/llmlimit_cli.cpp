// Command-line front end: capacity, throughput, tables, sweep, validate.

#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "llmlimit/config.hpp"
#include "llmlimit/errors.hpp"
#include "llmlimit/explorer.hpp"
#include "llmlimit/report.hpp"
#include "llmlimit/units.hpp"

using namespace llmlimit;

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kInfeasible = 3 };

struct GlobalOptions {
    std::string config;
    std::string format = "markdown";
    std::string out;
    int precision = 3;
    bool no_k = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> trials;
    std::string denominator;
    bool no_imbalance = false;
};

struct PointOptions {
    std::vector<std::string> models;
    std::string chip;
    std::optional<std::int64_t> tp;
    std::optional<std::int64_t> pp;
    std::vector<std::string> batch;
    std::vector<std::string> context;
    std::optional<double> sync_ns;
    std::optional<double> pp_sync_ns;
    std::string bw_tbs;
    std::optional<std::int64_t> batch_cap;
    bool attention_single_device = false;
    bool exhaustive = false;
};

RenderTarget target_of(const GlobalOptions& g) {
    RenderTarget t;
    t.format = format_from_string(g.format);
    t.destination = g.out;
    t.precision = g.precision;
    t.k_notation = !g.no_k;
    return t;
}

ConfigFile load(const GlobalOptions& g) {
    ConfigFile cfg = load_default_config(g.config);
    if (g.seed) cfg.imbalance.seed = *g.seed;
    if (g.trials) {
        if (*g.trials < 1) throw ConfigError("--trials must be >= 1");
        cfg.imbalance.trials = *g.trials;
        cfg.imbalance.min_trials = std::min(cfg.imbalance.min_trials, *g.trials);
    }
    if (g.no_imbalance) cfg.imbalance.enabled = false;
    if (g.denominator == "clamped_mean") cfg.imbalance.denominator = ImbalanceDenominator::clamped_mean;
    if (g.denominator == "occupied_mean") cfg.imbalance.denominator = ImbalanceDenominator::occupied_mean;
    return cfg;
}

std::vector<std::int64_t> counts(const std::vector<std::string>& texts) {
    std::vector<std::int64_t> out;
    for (const auto& t : texts) out.push_back(parse_count(t));
    return out;
}

double parse_bandwidth(const std::string& s) {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size() && v > 0) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("--bw-tbs: expected a positive number or 'inf', got '" + s + "'");
}

int cmd_capacity(const GlobalOptions& g, const PointOptions& o) {
    const ConfigFile cfg = load(g);
    std::vector<std::string> models = o.models;
    if (models.empty()) models = {"llama3-70b", "llama3-405b", "deepseekv3"};
    std::vector<std::int64_t> batches = o.batch.empty() ? std::vector<std::int64_t>{1, 32} : counts(o.batch);
    std::vector<std::int64_t> contexts;
    if (o.context.empty()) {
        for (std::int64_t t = 1024; t <= 128 * 1024; t *= 2) contexts.push_back(t);
    } else {
        contexts = counts(o.context);
    }
    for (auto b : batches)
        if (b < 1) throw ConfigError("--batch values must be >= 1");
    emit(render_capacity(capacity_table(cfg.catalog, models, batches, contexts), target_of(g)), target_of(g));
    return kOk;
}

int cmd_throughput(const GlobalOptions& g, const PointOptions& o) {
    ConfigFile cfg = load(g);
    if (o.pp_sync_ns) cfg.catalog.sync.pp_sync_s = *o.pp_sync_ns * kNanosecond;
    if (o.models.size() != 1) throw ConfigError("throughput needs exactly one --model");
    const std::string model = o.models.front();
    ChipConfig chip = cfg.catalog.chip(o.chip);
    if (!o.bw_tbs.empty()) chip.mem_bw_tbs = parse_bandwidth(o.bw_tbs);
    cfg.catalog.chips[chip.name] = chip;

    const std::vector<std::int64_t> contexts = o.context.empty() ? std::vector<std::int64_t>{4096} : counts(o.context);
    const std::vector<std::string> batches = o.batch.empty() ? std::vector<std::string>{"1"} : o.batch;
    std::optional<double> sync;
    if (o.sync_ns) sync = *o.sync_ns * kNanosecond;
    MappingFlags flags;
    flags.attention_single_device = o.attention_single_device;

    ExplorerOptions eo;
    eo.imbalance = cfg.imbalance;
    Explorer ex(cfg.catalog, eo);
    const ModelArch& m = ex.catalog().model(model);

    std::vector<SweepRow> rows;
    for (auto ctx : contexts) {
        for (const auto& b : batches) {
            const bool max_mode = b == "max";
            std::vector<std::int64_t> tps;
            if (o.tp) {
                tps = {*o.tp};
            } else {
                for (std::int64_t t = 1; t <= kMaxTensorParallel; t = o.exhaustive ? t + 1 : t * 2)
                    tps.push_back(t);
            }
            std::optional<SweepRow> best;
            SweepRow last;
            for (auto tp : tps) {
                if (chip.max_tp_span && tp > *chip.max_tp_span) continue;
                SweepRow row;
                try {
                    std::int64_t batch = 1;
                    std::optional<std::int64_t> pp = o.pp;
                    if (max_mode) {
                        if (!pp) pp = min_pp(chip, tp, m, {1, ctx, 1});
                        batch = max_batch(chip, tp, *pp, m, ctx, o.batch_cap);
                    } else {
                        batch = parse_count(b);
                    }
                    row = ex.evaluate_point(model, chip, tp, pp, batch, ctx, flags, sync);
                } catch (const InfeasibleError& e) {
                    row.model = model;
                    row.chip = chip.name;
                    row.tp = tp;
                    row.context = ctx;
                    row.reason = e.what();
                }
                last = row;
                if (row.feasible && (!best || row.throughput.utps > best->throughput.utps)) best = row;
            }
            rows.push_back(best ? *best : last);
        }
    }

    const RenderTarget t = target_of(g);
    if (rows.size() == 1)
        emit(render_breakdown(rows.front(), t), t);
    else
        emit(render_rows(rows, t), t);
    for (const auto& r : rows)
        if (r.feasible) return kOk;
    return kInfeasible;
}

int cmd_tables(const GlobalOptions& g, const std::string& which) {
    const ConfigFile cfg = load(g);
    const RenderTarget t = target_of(g);
    if (which == "t6") {
        emit(render_capacity(default_capacity_table(cfg.catalog), t), t);
        return kOk;
    }
    ExplorerOptions eo;
    eo.imbalance = cfg.imbalance;
    Explorer ex(cfg.catalog, eo);
    emit(render_throughput_table(throughput_table(ex, which), t), t);
    return kOk;
}

int cmd_sweep(const GlobalOptions& g, const std::string& spec_arg, const std::string& name,
              const std::string& layout, const std::string& metric, bool serial) {
    const ConfigFile cfg = load(g);
    std::vector<SweepSpec> specs;
    const auto& builtins = builtin_sweep_names();
    if (std::find(builtins.begin(), builtins.end(), spec_arg) != builtins.end()) {
        specs.push_back(builtin_sweep(spec_arg));
    } else if (!spec_arg.empty()) {
        specs = load_sweeps(spec_arg, cfg.catalog);
    } else {
        specs = cfg.sweeps;
    }
    if (!name.empty()) {
        std::vector<SweepSpec> picked;
        for (auto& s : specs)
            if (s.name == name) picked.push_back(s);
        if (picked.empty()) throw ConfigError("no sweep named '" + name + "'");
        specs = picked;
    }
    if (specs.empty()) throw ConfigError("no sweep given (name a built-in, a spec file, or use --config)");
    if (specs.size() > 1) throw ConfigError("several sweeps found; pick one with --name");

    SweepLayout lay = SweepLayout::long_rows;
    if (layout == "wide")
        lay = SweepLayout::wide;
    else if (layout != "long")
        throw ConfigError("--layout must be long or wide");

    ExplorerOptions eo;
    eo.imbalance = cfg.imbalance;
    Explorer ex(cfg.catalog, eo);
    const SweepResult result = serial ? ex.run_sweep_serial(specs.front()) : ex.run_sweep(specs.front());
    const RenderTarget t = target_of(g);
    emit(render_sweep(result, t, lay, metric_from_string(metric)), t);
    return result.rows.empty() || result.any_feasible() ? kOk : kInfeasible;
}

int cmd_validate(const GlobalOptions& g, const std::vector<std::string>& files) {
    ConfigFile cfg = load(g);
    for (const auto& f : files) {
        cfg = load_config(f, std::move(cfg));
        std::cout << f << ": ok\n";
    }
    std::cout << cfg.catalog.models.size() << " models, " << cfg.catalog.chips.size() << " chips, "
              << cfg.sweeps.size() << " sweeps\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytical limits of LLM decode throughput"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config, "JSON config layered over the built-ins (default: $LLMLIMIT_CONFIG)");
    app.add_option("--format", g.format, "markdown, csv or json")->capture_default_str();
    app.add_option("--out", g.out, "Write output to this file instead of stdout");
    app.add_option("--precision", g.precision, "Significant digits")->capture_default_str()->check(CLI::Range(1, 17));
    app.add_flag("--no-k", g.no_k, "Print plain numbers instead of 48K-style notation");
    app.add_option("--seed", g.seed, "MoE imbalance sampling seed");
    app.add_option("--trials", g.trials, "MoE imbalance trials per token count");
    app.add_option("--mi-denominator", g.denominator, "occupied_mean or clamped_mean")
        ->check(CLI::IsMember({"occupied_mean", "clamped_mean"}));
    app.add_flag("--no-imbalance", g.no_imbalance, "Assume perfectly balanced experts");

    PointOptions o;
    auto point_flags = [&](CLI::App* sub, bool with_system) {
        sub->add_option("--model", o.models, "Model name (repeatable)");
        sub->add_option("--batch", o.batch, with_system ? "Batch size, or 'max' for the capacity limit" : "Batch sizes");
        sub->add_option("--context", o.context, "Context length; accepts 4K, 128K");
        if (!with_system) return;
        sub->add_option("--chip", o.chip, "Chip name")->required();
        sub->add_option("--tp", o.tp, "Tensor-parallel degree (default: best power of two)")->check(CLI::PositiveNumber);
        sub->add_option("--pp", o.pp, "Pipeline stages (default: fewest that fit)")->check(CLI::PositiveNumber);
        sub->add_option("--sync-ns", o.sync_ns, "Override TP collective latency (ns)")->check(CLI::NonNegativeNumber);
        sub->add_option("--pp-sync-ns", o.pp_sync_ns, "Override PP hop latency (ns)")->check(CLI::NonNegativeNumber);
        sub->add_option("--bw-tbs", o.bw_tbs, "Override per-chip bandwidth (TB/s, or inf)");
        sub->add_option("--batch-cap", o.batch_cap, "Cap for --batch max")->check(CLI::PositiveNumber);
        sub->add_flag("--attention-single-device", o.attention_single_device,
                      "Route all KV traffic through one chip");
        sub->add_flag("--exhaustive", o.exhaustive, "Search every tp in 1..128, not just powers of two");
    };

    auto* capacity = app.add_subcommand("capacity", "Capacity (GiB) and arithmetic intensity grid");
    point_flags(capacity, false);

    auto* throughput = app.add_subcommand("throughput", "Latency breakdown and throughput of one configuration");
    point_flags(throughput, true);

    std::string which;
    auto* tables = app.add_subcommand("tables", "Regenerate a results table");
    tables->add_option("which", which, "t2, t3, t4 or t6")->required()->check(CLI::IsMember({"t2", "t3", "t4", "t6"}));

    std::string spec_arg, sweep_name, layout = "long", metric = "utps";
    bool serial = false;
    auto* sweep = app.add_subcommand("sweep", "Run a design-space sweep");
    sweep->add_option("spec", spec_arg, "Built-in (fig2, fig3, fig4, fig5) or a sweep JSON file");
    sweep->add_option("--name", sweep_name, "Pick one sweep from a file holding several");
    sweep->add_option("--layout", layout, "long or wide")->capture_default_str();
    sweep->add_option("--metric", metric, "Wide-layout value: utps, stps, stps_per_watt")->capture_default_str();
    sweep->add_flag("--serial", serial, "Use the single-threaded evaluator");

    std::vector<std::string> files;
    auto* validate = app.add_subcommand("validate", "Check config files");
    validate->add_option("files", files, "Config files to layer and check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*capacity) return cmd_capacity(g, o);
        if (*throughput) return cmd_throughput(g, o);
        if (*tables) return cmd_tables(g, which);
        if (*sweep) return cmd_sweep(g, spec_arg, sweep_name, layout, metric, serial);
        if (*validate) return cmd_validate(g, files);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}
