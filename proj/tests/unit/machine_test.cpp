#include "doctest.h"

#include <cmath>

#include "llmlimit/errors.hpp"
#include "llmlimit/machine.hpp"
#include "llmlimit/units.hpp"
#include "oracle.hpp"

using namespace llmlimit;

TEST_SUITE("machine") {

TEST_CASE("built-in chips") {
    CHECK(builtin_chip("xpu-hbm4").mem_bw_tbs == 18);
    CHECK(builtin_chip("xpu-sram").mem_capacity_bytes == 512 * kMiB);
    CHECK(builtin_chip("xpu-3d-dram").tensor_pflops == 2.25);
    const auto hbm3 = builtin_chip("xpu-hbm3");
    CHECK(hbm3.mem_bw_tbs == 4);
    CHECK(hbm3.tensor_pflops == 2.25);
    CHECK(hbm3.mem_capacity_bytes == 96 * kGiB);
    CHECK(hbm3.die_area_mm2 == 800);
    const auto cows = builtin_chip("xpu-cows");
    CHECK(cows.mem_bw_tbs == 2250);
    CHECK(cows.tensor_pflops == 28.13);
    REQUIRE(cows.tp_sync_override_s);
    CHECK(*cows.tp_sync_override_s == doctest::Approx(800e-9));
    REQUIRE(cows.max_tp_span);
    CHECK(*cows.max_tp_span == 1);
    for (const auto& n : builtin_chip_names()) CHECK_NOTHROW(validate(builtin_chip(n)));
    CHECK_THROWS_AS(builtin_chip("xpu-tpu"), ConfigError);
}

TEST_CASE("collective latency rule") {
    CHECK(tp_sync_latency(1) == doctest::Approx(200e-9));
    CHECK(tp_sync_latency(8) == doctest::Approx(200e-9));
    CHECK(tp_sync_latency(15) == doctest::Approx(200e-9));
    CHECK(tp_sync_latency(16) == doctest::Approx(1.5e-6));
    CHECK(tp_sync_latency(128) == doctest::Approx(1.5e-6));
    CHECK(tp_sync_latency(128, 3e-6) == doctest::Approx(3e-6));
    for (std::int64_t tp = 1; tp <= 128; ++tp) {
        CAPTURE(tp);
        const auto sys = compose_system(builtin_chip("xpu-hbm3"), tp, 1);
        CHECK(sys.t_tp_sync == tp_sync_latency(tp));
        CHECK(sys.t_tp_sync == doctest::Approx(oracle::sync_s(double(tp))));
    }
}

TEST_CASE("composition aggregates") {
    const auto chip = builtin_chip("xpu-hbm3");
    const auto s128 = compose_system(chip, 128, 1);
    CHECK(s128.agg_bw == doctest::Approx(512 * kTiB));
    const auto s8 = compose_system(chip, 8, 1);
    CHECK(s8.agg_capacity == doctest::Approx(768 * kGiB));
    CHECK(s8.t_pp_sync == doctest::Approx(100e-9));
    CHECK(s8.sync_ops_per_layer == 3);
    CHECK(compose_system(builtin_chip("xpu-cows"), 1, 1).t_tp_sync == doctest::Approx(800e-9));
    for (std::int64_t tp : {1, 2, 8, 64}) {
        const auto s = compose_system(chip, tp, 3);
        CHECK(s.agg_bw == doctest::Approx(double(tp) * chip.mem_bw_bytes_per_s()));
        CHECK(s.agg_tensor == doctest::Approx(double(tp) * chip.tensor_flops_per_s()));
        CHECK(s.agg_scalar == doctest::Approx(double(tp) * chip.scalar_flops_per_s()));
        CHECK(s.agg_capacity == doctest::Approx(double(tp) * 3 * chip.mem_capacity_bytes));
        CHECK(s.num_chips() == tp * 3);
    }
}

TEST_CASE("mapping constraints") {
    CHECK_THROWS_AS(compose_system(builtin_chip("xpu-hbm3"), 129, 1), InfeasibleError);
    CHECK_THROWS_AS(compose_system(builtin_chip("xpu-cows"), 2, 1), InfeasibleError);
    CHECK_THROWS_AS(compose_system(builtin_chip("xpu-hbm3"), 0, 1), DomainError);
    CHECK_THROWS_AS(compose_system(builtin_chip("xpu-hbm3"), 1, 0), DomainError);
}

TEST_CASE("decimal units switch") {
    auto c = builtin_chip("xpu-hbm3");
    c.memory_units = UnitBase::decimal;
    CHECK(c.mem_bw_bytes_per_s() == doctest::Approx(4e12));
}

TEST_CASE("smallest pipeline depth") {
    const auto hbm3 = builtin_chip("xpu-hbm3");
    CHECK(min_pp(hbm3, 8, builtin_model("llama3-70b"), {1, 4096, 1}) == 1);
    CHECK(min_pp(hbm3, 8, builtin_model("deepseekv3"), {1, 4096, 1}) == 1);
    CHECK(min_pp(builtin_chip("xpu-sram"), 128, builtin_model("llama3-405b"), {1, 131072, 1}) == 7);
    // Brute force across chips, models and tp.
    const oracle::Chip ochip;
    for (const char* name : {"llama3-70b", "llama3-405b", "deepseekv3"})
        for (std::int64_t tp : {1, 2, 4, 8, 16, 32, 64, 128})
            for (std::int64_t b : {1, 32})
                for (std::int64_t t : {4096, 131072}) {
                    CAPTURE(name);
                    CAPTURE(tp);
                    CHECK(min_pp(hbm3, tp, builtin_model(name), {b, t, 1}) ==
                          oracle::min_pp(oracle::by_name(name), ochip, double(tp), double(b), double(t)));
                }
}

TEST_CASE("min pp does not grow with tp") {
    for (const char* chip : {"xpu-hbm3", "xpu-3d-dram", "xpu-sram"})
        for (const char* name : {"llama3-70b", "llama3-405b", "deepseekv3"}) {
            std::int64_t prev = 1 << 30;
            for (std::int64_t tp = 1; tp <= 128; ++tp) {
                // Infeasible counts as unbounded; once feasible it must stay so.
                std::int64_t pp = 1 << 30;
                try {
                    pp = min_pp(builtin_chip(chip), tp, builtin_model(name), {1, 32768, 1});
                } catch (const InfeasibleError&) {
                }
                CAPTURE(chip);
                CAPTURE(name);
                CAPTURE(tp);
                CHECK(pp <= prev);
                prev = pp;
            }
        }
}

TEST_CASE("pipeline cap makes a workload infeasible") {
    CHECK_THROWS_AS(min_pp(builtin_chip("xpu-sram"), 1, builtin_model("deepseekv3"), {1, 4096, 1}, 8),
                    InfeasibleError);
}

TEST_CASE("largest batch") {
    const auto hbm3 = builtin_chip("xpu-hbm3");
    CHECK(max_batch(hbm3, 8, 1, builtin_model("llama3-405b"), 65536) == 24);
    const auto big = max_batch(hbm3, 128, 1, builtin_model("llama3-70b"), 131072);
    CHECK(capacity_gib(builtin_model("llama3-70b"), {big, 131072, 1}) <= 12288);
    CHECK(capacity_gib(builtin_model("llama3-70b"), {big + 1, 131072, 1}) > 12288);
    CHECK(max_batch(hbm3, 128, 1, builtin_model("llama3-70b"), 4096, 64) == 64);
    CHECK_THROWS_AS(max_batch(hbm3, 4, 1, builtin_model("deepseekv3"), 4096), InfeasibleError);

    const oracle::Chip ochip;
    for (const char* name : {"llama3-70b", "llama3-405b", "deepseekv3"})
        for (std::int64_t tp : {8, 32, 128})
            for (std::int64_t t : {4096, 32768, 131072}) {
                CAPTURE(name);
                CAPTURE(tp);
                CAPTURE(t);
                CHECK(max_batch(hbm3, tp, 1, builtin_model(name), t) ==
                      oracle::max_batch(oracle::by_name(name), ochip, double(tp), 1, double(t)));
            }
}

TEST_CASE("largest batch does not grow with context") {
    for (const char* name : {"llama3-70b", "llama3-405b", "deepseekv3"}) {
        std::int64_t prev = 1LL << 40;
        for (std::int64_t t = 1024; t <= 131072; t += 4096) {
            const auto b = max_batch(builtin_chip("xpu-hbm3"), 32, 1, builtin_model(name), t);
            CHECK(b <= prev);
            prev = b;
        }
    }
}

}
