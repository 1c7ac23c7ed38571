#include <doctest.h>

#include <algorithm>
#include <vector>

#include "xbarscale/error.hpp"
#include "xbarscale/hbml.hpp"

using namespace xbarscale;

namespace {

HierarchyConfig tera() { return validate(parse_label("8C-8T-4SG-4G")); }

TransferScenario scenario(double clock, double pins) {
    TransferScenario s;
    s.clock_mhz = clock;
    s.pin_rate_gbps = pins;
    return s;
}

}  // namespace

TEST_CASE("dma split partitions the descriptor") {
    const AddressMap map(tera(), 0);
    DmaDescriptor d;
    d.source = 1 << 20;
    d.destination = 0;
    d.length = 4u << 20;
    const auto tasks = dma_split(d, map);
    REQUIRE(tasks.size() == 16);
    std::vector<bool> covered(d.length / 4, false);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        CHECK(tasks[i].backend == i);
        CHECK(tasks[i].bursts.size() == 256);
        CHECK(tasks[i].bytes() == (4u << 20) / 16);
        for (const auto& b : tasks[i].bursts) {
            CHECK(b.bytes == 1024);
            CHECK(b.l2_address - d.source == b.l1_address - d.destination);
            CHECK(b.channel == (b.l2_address / 1024) % 16);
            CHECK(map.global_subgroup(map.map(b.l1_address).coord) == tasks[i].backend);
            for (std::uint64_t w = 0; w < b.bytes / 4; ++w) {
                const std::uint64_t idx = (b.l1_address - d.destination) / 4 + w;
                REQUIRE_FALSE(covered[idx]);
                covered[idx] = true;
            }
        }
    }
    CHECK(std::all_of(covered.begin(), covered.end(), [](bool c) { return c; }));

    d.length = 1024;
    auto one = dma_split(d, map);
    REQUIRE(one.size() == 1);
    CHECK(one[0].bursts.size() == 1);
    d.length = 1536;
    auto two = dma_split(d, map);
    std::size_t bursts = 0;
    for (const auto& t : two) bursts += t.bursts.size();
    CHECK(bursts == 2);

    // an L2 offset that straddles channel boundaries splits every stripe
    d.source = 512;
    d.length = 4096;
    bursts = 0;
    for (const auto& t : dma_split(d, map))
        for (const auto& b : t.bursts) {
            ++bursts;
            CHECK(b.bytes == 512);
        }
    CHECK(bursts == 8);

    d.direction = Direction::l1_to_l2;
    d.source = 0;
    d.destination = 1 << 20;
    for (const auto& t : dma_split(d, map))
        for (const auto& b : t.bursts) CHECK(b.l2_address - d.destination == b.l1_address - d.source);

    d.length = 0;
    CHECK_THROWS_AS(dma_split(d, map), InputError);
    d.length = 6;
    CHECK_THROWS_AS(dma_split(d, map), InputError);
}

TEST_CASE("link ceiling and peak") {
    HbmConfig h;
    CHECK(h.peak_gbps() == doctest::Approx(921.6));
    CHECK(link_ceiling(h) == doctest::Approx(921.6));
    h.clock_mhz = 500;
    CHECK(link_ceiling(h) == doctest::Approx(512.0));
    h.masters = 0;
    CHECK(link_ceiling(h) == doctest::Approx(0.0));
    h = {};
    h.outstanding = 0;
    CHECK_THROWS_AS(check(h), InputError);
    h = {};
    h.refresh_fraction = 1.0;
    CHECK_THROWS_AS(check(h), InputError);
}

TEST_CASE("achieved bandwidth respects both ceilings") {
    for (double clock : {300.0, 500.0, 700.0, 900.0, 1100.0})
        for (double pins : {2.8, 3.2, 3.6}) {
            const auto s = run_scenario(scenario(clock, pins), tera());
            HbmConfig h;
            h.clock_mhz = clock;
            h.pin_rate_gbps = pins;
            const double bound = std::min(link_ceiling(h), (1.0 - h.refresh_fraction) * h.peak_gbps());
            CHECK(s.achieved_gbps <= bound * (1.0 + 1e-3));
            CHECK(s.achieved_gbps > 0.5 * bound);
            CHECK(s.bytes == (8ull << 20));
        }
}

TEST_CASE("bandwidth grows with clock and pin rate") {
    // cycle rounding leaves jitter near 1e-4 relative
    const double tol = 1e-3;
    for (double pins : {2.8, 3.2, 3.6}) {
        double prev = 0;
        for (double clock = 400; clock <= 1200; clock += 100) {
            const double g = run_scenario(scenario(clock, pins), tera()).achieved_gbps;
            CHECK(g >= prev * (1.0 - tol));
            prev = g;
        }
    }
    for (double clock : {500.0, 900.0}) {
        double prev = 0;
        for (double pins : {2.4, 2.8, 3.2, 3.6, 4.0}) {
            const double g = run_scenario(scenario(clock, pins), tera()).achieved_gbps;
            CHECK(g >= prev * (1.0 - tol));
            prev = g;
        }
    }
}

TEST_CASE("nominal operating point") {
    const auto s = run_scenario(scenario(900, 3.6), tera());
    CHECK(s.achieved_gbps == doctest::Approx(896.0).epsilon(0.03));
    CHECK(s.hbm_utilization >= 0.95);
}

TEST_CASE("empty and degenerate transfers") {
    HbmConfig h;
    const auto s = run_transfer(std::vector<DmaSubTask>{}, h);
    CHECK(s.bytes == 0);
    CHECK(s.achieved_gbps == 0.0);
    TransferScenario sc = scenario(900, 3.6);
    sc.bytes = 6;
    CHECK_THROWS_AS(run_scenario(sc, tera()), InputError);
    CHECK(parse_scenario_kind("round_trip") == ScenarioKind::round_trip);
    CHECK(parse_scenario_kind(to_string(ScenarioKind::l1_to_l2)) == ScenarioKind::l1_to_l2);
    CHECK_THROWS_AS(parse_scenario_kind("sideways"), InputError);
}

TEST_CASE("bandwidth matrix covers the grid") {
    const auto pts = bandwidth_matrix({500, 900}, {2.8, 3.6}, tera());
    REQUIRE(pts.size() == 4);
    for (const auto& p : pts) {
        CHECK(p.stats.achieved_gbps <= p.link_gbps * (1.0 + 1e-3));
        CHECK(p.peak_gbps == doctest::Approx(p.pin_rate_gbps * 256.0));
    }
}
