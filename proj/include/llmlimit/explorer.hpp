#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "llmlimit/catalog.hpp"
#include "llmlimit/moe_stats.hpp"
#include "llmlimit/perf.hpp"

namespace llmlimit {

enum class BatchMode { explicit_set, max };

// Which systems a t_tp_sync axis value applies to. high_radix leaves systems
// below the 16-chip threshold at their default latency, which gives a flat
// reference line for small TP groups.
enum class SyncAxisScope { all, high_radix };

enum class Metric { utps, stps, stps_per_watt };
std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

// Each row is divided by the reference row with the same model, context and
// batch that equals every field set here and agrees with the row on every
// other swept axis.
struct NormalizeSpec {
    Metric metric = Metric::utps;
    std::optional<std::string> chip;
    std::optional<std::int64_t> tp;
    std::optional<std::int64_t> batch;
    std::optional<std::int64_t> context;
    std::optional<double> mem_bw_tbs;
    std::optional<double> t_tp_sync_s;
};

struct SweepSpec {
    std::string name;
    std::vector<std::string> models;
    std::vector<std::string> chips;
    std::vector<std::int64_t> tp;
    std::vector<std::int64_t> contexts;
    BatchMode batch_mode = BatchMode::explicit_set;
    std::vector<std::int64_t> batches{1};
    std::optional<std::int64_t> batch_cap = 64;  // only used by BatchMode::max
    std::vector<double> mem_bw_tbs;              // empty: chip value
    std::vector<double> t_tp_sync_s;             // empty: default rule
    SyncAxisScope sync_scope = SyncAxisScope::all;
    std::optional<std::int64_t> pp;              // empty: smallest that fits
    MappingFlags flags;
    std::optional<NormalizeSpec> normalize;
};

// Throws ConfigError naming the offending field.
void validate(const SweepSpec& spec, const Catalog& catalog);

struct SweepRow {
    std::string model;
    std::string chip;
    std::int64_t tp = 0;
    std::int64_t pp = 0;
    std::int64_t batch = 0;
    std::int64_t context = 0;
    double mem_bw_tbs = 0.0;
    double t_tp_sync_s = 0.0;             // effective collective latency
    std::optional<double> sync_axis_s;    // the spec's axis value, if any
    bool feasible = false;
    std::string reason;
    double imbalance = 1.0;
    double capacity_gib = 0.0;
    LatencyBreakdown latency;
    ThroughputReport throughput;
    double power_w = 0.0;
    double stps_per_watt = 0.0;
    std::optional<double> normalized;

    double metric(Metric m) const;
};

struct SweepResult {
    std::string name;
    std::vector<SweepRow> rows;
    // Spec axes with more than one value, from: model, chip, tp, context,
    // batch, mem_bw, t_tp_sync.
    std::vector<std::string> swept_axes;

    bool any_feasible() const;
};

struct ImbalanceSettings {
    bool enabled = true;  // false: perfect balance (mi = 1)
    std::int64_t trials = 1'000'000;
    std::uint64_t seed = 0;
    // Large token counts need far fewer trials; trials are cut to
    // max(min_trials, sample_budget / (tokens*MA)).
    double sample_budget = 6.4e7;
    std::int64_t min_trials = 200;
    ImbalanceDenominator denominator = ImbalanceDenominator::occupied_mean;

    std::int64_t trials_for(std::int64_t tokens, std::int64_t active_experts) const;
};

// One estimate per (MR, MA, tokens), shared across a sweep.
class ImbalanceCache {
public:
    explicit ImbalanceCache(ImbalanceSettings settings = {}) : settings_(settings) {}

    double get(const ModelArch& m, std::int64_t tokens);
    const ImbalanceSettings& settings() const { return settings_; }

private:
    using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
    ImbalanceSettings settings_;
    std::map<Key, double> values_;
    std::mutex mutex_;
};

struct ExplorerOptions {
    ImbalanceSettings imbalance;
    bool parallel = true;
};

class Explorer {
public:
    explicit Explorer(Catalog catalog, ExplorerOptions options = {});

    const Catalog& catalog() const { return catalog_; }

    // Cartesian product of the spec's axes in a fixed order (model, chip,
    // tp, context, batch, mem_bw, t_tp_sync). Infeasible points become rows
    // with a reason. The parallel and serial paths return identical rows.
    SweepResult run_sweep(const SweepSpec& spec);
    SweepResult run_sweep_serial(const SweepSpec& spec);

    // Best B=1 utps over tp in {1,2,4,...,128} (or every tp in 1..128 when
    // `exhaustive`). Throws InfeasibleError if no tp holds one user.
    SweepRow max_utps(const std::string& model, const std::string& chip, std::int64_t context,
                      const MappingFlags& flags = {}, bool exhaustive = false);

    // Capacity-limited batch on the smallest system (tp, min pp) that holds
    // one user.
    SweepRow max_stps(const std::string& model, const std::string& chip, std::int64_t tp,
                      std::int64_t context, std::optional<std::int64_t> batch_cap = std::nullopt,
                      const MappingFlags& flags = {});

    // A single evaluated point; infeasibility is reported in the row.
    SweepRow evaluate_point(const std::string& model, const ChipConfig& chip, std::int64_t tp,
                            std::optional<std::int64_t> pp, std::int64_t batch,
                            std::int64_t context, const MappingFlags& flags = {},
                            std::optional<double> tp_sync_override = std::nullopt);

    struct EfficiencyPoint {
        std::int64_t context = 0;
        std::int64_t batch = 0;
        double utps = 0.0;
        double stps = 0.0;
        double stps_per_watt = 0.0;
        double normalized = 0.0;
    };

    // STPS/W for batches {1,2,4,...,max} at each context, normalized to the
    // largest batch at `reference_context`.
    std::vector<EfficiencyPoint> efficiency_curve(const std::string& model, const std::string& chip,
                                                  std::int64_t tp,
                                                  const std::vector<std::int64_t>& contexts,
                                                  std::optional<std::int64_t> batch_cap = 32,
                                                  std::int64_t reference_context = 4096);

private:
    struct Point {
        const ModelArch* model = nullptr;
        ChipConfig chip;
        std::int64_t tp = 0;
        std::int64_t pp = 0;
        std::int64_t batch = 0;
        std::int64_t context = 0;
        std::optional<double> tp_sync_override;
        std::optional<double> sync_axis;
        MappingFlags flags;
        std::string reason;  // non-empty: infeasible before evaluation
    };

    std::vector<Point> enumerate(const SweepSpec& spec) const;
    void prefetch_imbalance(const std::vector<Point>& points);
    SweepRow evaluate(const Point& pt);
    SweepResult run(const SweepSpec& spec, bool parallel);

    Catalog catalog_;
    ExplorerOptions options_;
    ImbalanceCache imbalance_;
};

void apply_normalization(SweepResult& result, const NormalizeSpec& norm);

// Built-in sweeps for the bandwidth, synchronization and efficiency studies:
// fig2, fig3, fig4, fig5.
SweepSpec builtin_sweep(const std::string& name);
const std::vector<std::string>& builtin_sweep_names();

// Throughput grids: t2 (4K/128K, B=1 and capacity-limited), t3 (B=1 over
// six contexts), t4 (capacity-limited over six contexts). Rows for a chip
// named "cent" appear only when such a chip is in the catalog.
struct TableCell {
    bool feasible = false;
    std::string reason;
    double utps = 0.0;
    double stps = 0.0;
    std::int64_t batch = 0;
    std::int64_t pp = 0;
};

struct TableRow {
    std::string model;
    std::string label;
    std::vector<TableCell> user;    // B = 1 per context
    std::vector<TableCell> system;  // capacity-limited per context
};

struct ThroughputTable {
    std::string which;
    std::vector<std::int64_t> contexts;
    bool has_user = false;
    bool has_system = false;
    std::vector<TableRow> rows;
};

ThroughputTable throughput_table(Explorer& explorer, const std::string& which);

}  // namespace llmlimit
