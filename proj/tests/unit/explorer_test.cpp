#include "doctest.h"

#include <cmath>
#include <cstring>
#include <map>

#include "llmlimit/errors.hpp"
#include "llmlimit/explorer.hpp"
#include "reference_values.hpp"

using namespace llmlimit;

namespace {

ExplorerOptions fast() {
    ExplorerOptions o;
    o.imbalance.trials = 2000;
    o.imbalance.sample_budget = 1e6;
    return o;
}

bool same(const SweepRow& a, const SweepRow& b) {
    auto bits = [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; };
    return a.model == b.model && a.chip == b.chip && a.tp == b.tp && a.pp == b.pp && a.batch == b.batch &&
           a.context == b.context && a.feasible == b.feasible && a.reason == b.reason &&
           bits(a.mem_bw_tbs, b.mem_bw_tbs) && bits(a.t_tp_sync_s, b.t_tp_sync_s) &&
           bits(a.imbalance, b.imbalance) && bits(a.latency.t_batch, b.latency.t_batch) &&
           bits(a.throughput.utps, b.throughput.utps) && bits(a.throughput.stps, b.throughput.stps) &&
           bits(a.power_w, b.power_w) && a.normalized.has_value() == b.normalized.has_value() &&
           (!a.normalized || bits(*a.normalized, *b.normalized));
}

SweepSpec small_spec() {
    SweepSpec s;
    s.name = "small";
    s.models = {"llama3-70b", "deepseekv3"};
    s.chips = {"xpu-hbm3", "xpu-sram", "xpu-cows"};
    s.tp = {1, 8, 128};
    s.contexts = {4096, 65536};
    s.batches = {1, 16, 64};
    return s;
}

}  // namespace

TEST_SUITE("explorer") {

TEST_CASE("parallel and serial sweeps are bit-identical and repeatable") {
    Explorer a(Catalog::builtin(), fast());
    Explorer b(Catalog::builtin(), fast());
    const auto spec = small_spec();
    const auto r1 = a.run_sweep(spec);
    const auto r2 = b.run_sweep_serial(spec);
    const auto r3 = a.run_sweep(spec);
    REQUIRE(r1.rows.size() == r2.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
        CHECK(same(r1.rows[i], r2.rows[i]));
        CHECK(same(r1.rows[i], r3.rows[i]));
    }
    for (const char* name : {"fig2", "fig5"}) {
        const auto p = a.run_sweep(builtin_sweep(name));
        const auto s = b.run_sweep_serial(builtin_sweep(name));
        REQUIRE(p.rows.size() == s.rows.size());
        for (std::size_t i = 0; i < p.rows.size(); ++i) CHECK(same(p.rows[i], s.rows[i]));
    }
}

TEST_CASE("row order and tp clamping") {
    Explorer ex(Catalog::builtin(), fast());
    const auto r = ex.run_sweep(small_spec());
    // cows spans one composite chip, so its three tp values collapse to one.
    CHECK(r.rows.size() == 2 * (2 * 3 + 1) * 2 * 3);
    CHECK(r.rows.front().model == "llama3-70b");
    CHECK(r.rows.front().chip == "xpu-hbm3");
    CHECK(r.rows.front().tp == 1);
    CHECK(r.rows[1].batch == 16);
    CHECK(r.rows.back().chip == "xpu-cows");
    for (const auto& row : r.rows) {
        if (!row.feasible) {
            CHECK(!row.reason.empty());
            continue;
        }
        CHECK(row.throughput.stps == doctest::Approx(row.throughput.utps * double(row.pp * row.batch)));
    }
    CHECK(r.swept_axes == std::vector<std::string>{"model", "chip", "tp", "context", "batch"});
}

TEST_CASE("empty axes yield no rows") {
    Explorer ex(Catalog::builtin(), fast());
    auto s = small_spec();
    s.contexts.clear();
    const auto r = ex.run_sweep(s);
    CHECK(r.rows.empty());
    CHECK(!r.any_feasible());
}

TEST_CASE("spec validation names the field") {
    const auto cat = Catalog::builtin();
    auto s = small_spec();
    s.tp = {8, 0};
    CHECK_THROWS_WITH_AS(validate(s, cat), doctest::Contains("tp[1]"), ConfigError);
    s = small_spec();
    s.chips = {"xpu-nope"};
    CHECK_THROWS_AS(validate(s, cat), ConfigError);
    s = small_spec();
    s.mem_bw_tbs = {4, -1};
    CHECK_THROWS_WITH_AS(validate(s, cat), doctest::Contains("mem_bw[1]"), ConfigError);
    s = small_spec();
    s.batch_cap = 0;
    CHECK_THROWS_AS(validate(s, cat), ConfigError);
}

TEST_CASE("best user throughput") {
    Explorer ex(Catalog::builtin(), fast());
    const auto r = ex.max_utps("llama3-70b", "xpu-hbm3", 4096);
    CHECK(r.tp == 128);
    CHECK(r.throughput.utps == doctest::Approx(2100).epsilon(0.15));
    const auto r2 = ex.max_utps("llama3-405b", "xpu-hbm3", 131072);
    CHECK(r2.throughput.utps > 80);
    // every tp from 1 to 128 can only match or beat the powers of two
    const auto ex1 = ex.max_utps("llama3-70b", "xpu-3d-dram", 32768, {}, true);
    const auto p2 = ex.max_utps("llama3-70b", "xpu-3d-dram", 32768);
    CHECK(ex1.throughput.utps >= p2.throughput.utps);
    CHECK(ex.max_utps("llama3-70b", "xpu-cows", 4096).tp == 1);
}

TEST_CASE("best user throughput infeasible everywhere") {
    Catalog cat = Catalog::builtin();
    auto tiny = cat.chip("xpu-sram");
    tiny.name = "tiny";
    tiny.mem_capacity_bytes = 1e3;
    cat.chips["tiny"] = tiny;
    Explorer ex(cat, fast());
    CHECK_THROWS_AS(ex.max_utps("llama3-70b", "tiny", 4096), InfeasibleError);
}

TEST_CASE("lifting the batch cap never lowers system throughput") {
    Explorer ex(Catalog::builtin(), fast());
    for (const char* name : {"llama3-70b", "llama3-405b", "deepseekv3"})
        for (std::int64_t tp : {8, 32, 128}) {
            double prev = 0;
            for (std::optional<std::int64_t> cap : {std::optional<std::int64_t>(1), std::optional<std::int64_t>(8),
                                                   std::optional<std::int64_t>(64), std::optional<std::int64_t>()}) {
                const auto r = ex.max_stps(name, "xpu-hbm3", tp, 131072, cap);
                REQUIRE(r.feasible);
                CHECK(r.throughput.stps >= prev);
                prev = r.throughput.stps;
            }
            const auto one = ex.max_stps(name, "xpu-hbm3", tp, 131072, 1);
            CHECK(one.throughput.stps == doctest::Approx(one.throughput.utps * double(one.pp)));
        }
}

TEST_CASE("more tp choices never lower the best user throughput") {
    Explorer ex(Catalog::builtin(), fast());
    for (const char* chip : {"xpu-hbm3", "xpu-sram"}) {
        double prev = 0;
        for (std::int64_t cap : {1, 4, 16, 64, 128}) {
            SweepSpec s;
            s.name = "tp";
            s.models = {"llama3-70b"};
            s.chips = {chip};
            for (std::int64_t t = 1; t <= cap; t *= 2) s.tp.push_back(t);
            s.contexts = {8192};
            double best = 0;
            for (const auto& r : ex.run_sweep(s).rows)
                if (r.feasible) best = std::max(best, r.throughput.utps);
            CHECK(best >= prev);
            prev = best;
        }
    }
}

TEST_CASE("throughput table dashes carry a reason") {
    Explorer ex(Catalog::builtin(), fast());
    for (const char* which : {"t3", "t4"}) {
        const auto t = throughput_table(ex, which);
        CHECK(t.rows.size() == 15);
        for (const auto& row : t.rows) {
            const auto& cells = t.has_user ? row.user : row.system;
            REQUIRE(cells.size() == 6);
            for (const auto& c : cells) {
                if (row.label.rfind("CENT", 0) == 0) CHECK(!c.feasible);
                if (!c.feasible) CHECK(!c.reason.empty());
            }
        }
    }
    CHECK_THROWS_AS(throughput_table(ex, "t9"), ConfigError);
}

TEST_CASE("user throughput grid within 15%") {
    Explorer ex(Catalog::builtin(), fast());
    const auto t = throughput_table(ex, "t3");
    const std::map<std::string, std::string> display{
        {"llama3-70b", "Llama3-70B"}, {"llama3-405b", "Llama3-405B"}, {"deepseekv3", "DeepseekV3"}};
    int checked = 0;
    for (const auto& r : ref::kUserTps)
        for (const auto& row : t.rows) {
            if (row.model != display.at(r.model) || row.label != "xPU-HBM3-TP" + std::to_string(r.tp)) continue;
            for (std::size_t i = 0; i < 6; ++i) {
                CAPTURE(r.model);
                CAPTURE(r.tp);
                REQUIRE(row.user[i].feasible);
                CHECK(row.user[i].utps == doctest::Approx(r.utps[i]).epsilon(0.15));
                ++checked;
            }
        }
    CHECK(checked == 54);
}

TEST_CASE("bandwidth sweep rises with diminishing gains") {
    Explorer ex(Catalog::builtin(), fast());
    const auto r = ex.run_sweep(builtin_sweep("fig2"));
    std::map<std::pair<std::string, std::int64_t>, std::vector<const SweepRow*>> series;
    for (const auto& row : r.rows) series[{row.model, row.context}].push_back(&row);
    CHECK(series.size() == 9);
    for (const auto& [key, pts] : series) {
        REQUIRE(pts.front()->normalized);
        CHECK(*pts.front()->normalized == 1.0);
        for (std::size_t i = 1; i < pts.size(); ++i) CHECK(*pts[i]->normalized > *pts[i - 1]->normalized);
        for (std::size_t i = 2; i < pts.size(); ++i) {
            const double d1 = *pts[i - 1]->normalized - *pts[i - 2]->normalized;
            const double d2 = *pts[i]->normalized - *pts[i - 1]->normalized;
            CHECK(d2 <= d1 * (1 + 1e-9));
        }
    }
}

TEST_CASE("sync sweep: small groups stay flat, large groups slow down") {
    Explorer ex(Catalog::builtin(), fast());
    const auto r = ex.run_sweep(builtin_sweep("fig3"));
    std::map<std::pair<std::string, std::int64_t>, std::vector<double>> series;
    for (const auto& row : r.rows) series[{row.chip, row.tp}].push_back(row.throughput.utps);
    for (const auto& [key, v] : series) {
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (key.second == 8)
                CHECK(v[i] == v[0]);
            else
                CHECK(v[i] < v[i - 1]);
        }
    }
    const auto& tp8 = series[{"xpu-hbm3", 8}];
    const auto& tp128 = series[{"xpu-hbm3", 128}];
    for (std::size_t i = 0; i < tp128.size(); ++i) CHECK(tp128[i] > tp8[i]);
}

TEST_CASE("efficiency curve") {
    Explorer ex(Catalog::builtin(), fast());
    const std::vector<std::int64_t> ctx{4096, 8192, 16384, 32768, 65536, 131072};
    const auto pts = ex.efficiency_curve("llama3-70b", "xpu-hbm3", 128, ctx, 32);
    std::map<std::int64_t, std::vector<Explorer::EfficiencyPoint>> by;
    for (const auto& p : pts) by[p.context].push_back(p);
    const auto& at4k = by[4096];
    CHECK(at4k.back().batch == 32);
    CHECK(at4k.back().normalized == 1.0);
    CHECK(at4k.front().batch == 1);
    const double gain = at4k.back().stps_per_watt / at4k.front().stps_per_watt;
    CHECK(gain == doctest::Approx(ref::kEfficiencyGain70B).epsilon(0.25));
    CHECK(at4k.front().utps == doctest::Approx(ref::kUtpsB1_70B).epsilon(0.05));
    CHECK(at4k.back().utps == doctest::Approx(ref::kUtpsMax_70B).epsilon(0.05));
    // Longer contexts cost efficiency at every batch size.
    for (std::size_t bi = 0; bi < at4k.size(); ++bi) {
        double prev = 1e30;
        for (auto t : ctx) {
            const auto& v = by[t];
            REQUIRE(v.size() == at4k.size());
            CHECK(v[bi].normalized < prev);
            prev = v[bi].normalized;
        }
    }
}

TEST_CASE("technology comparison normalizes to the HBM3 single-user point") {
    Explorer ex(Catalog::builtin(), fast());
    const auto r = ex.run_sweep(builtin_sweep("fig5"));
    for (const auto& row : r.rows) {
        if (!row.feasible) continue;
        REQUIRE(row.normalized);
        if (row.chip == "xpu-hbm3" && row.batch == 1) CHECK(*row.normalized == 1.0);
    }
}

TEST_CASE("imbalance cache and trial budget") {
    ImbalanceSettings s;
    CHECK(s.trials_for(1, 8) == 1);
    CHECK(s.trials_for(64, 8) == 125000);
    CHECK(s.trials_for(8, 8) == 1'000'000);
    CHECK(s.trials_for(1'000'000, 8) == 200);
    s.trials = 2000;
    ImbalanceCache cache(s);
    const auto ds = builtin_model("deepseekv3");
    CHECK(cache.get(ds, 1) == 1.0);
    CHECK(cache.get(builtin_model("llama3-70b"), 64) == 1.0);
    const double a = cache.get(ds, 64);
    CHECK(a > 2.0);
    CHECK(cache.get(ds, 64) == a);
    s.enabled = false;
    ImbalanceCache off(s);
    CHECK(off.get(ds, 64) == 1.0);
}

TEST_CASE("metric names") {
    for (auto m : {Metric::utps, Metric::stps, Metric::stps_per_watt}) CHECK(metric_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(metric_from_string("tps"), ConfigError);
    CHECK_THROWS_AS(builtin_sweep("fig9"), ConfigError);
}

}
