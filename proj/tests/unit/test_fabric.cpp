#include <doctest.h>

#include <cmath>
#include <vector>

#include "xbarscale/analytic.hpp"
#include "xbarscale/error.hpp"
#include "xbarscale/fabric.hpp"

using namespace xbarscale;

namespace {

HierarchyConfig desk() { return validate(parse_label("4C-4T-2SG-2G")); }

// Every PE hammers a single bank word.
class HotspotSource : public TrafficSource {
public:
    HotspotSource(std::uint32_t pes, std::uint64_t address) : pes_(pes), address_(address) {}
    std::uint32_t pes() const override { return pes_; }
    std::optional<Op> next(std::uint32_t pe) override {
        Op op;
        op.pe = pe;
        op.address = address_;
        return op;
    }

private:
    std::uint32_t pes_;
    std::uint64_t address_;
};

}  // namespace

TEST_CASE("probe round trips equal the ladder") {
    const std::vector<LatencyLadder> ladders = {{1, 3, 5, 7}, {1, 3, 5, 9}, {1, 3, 5, 11}, {1, 5, 7, 9}};
    for (const auto& ladder : ladders) {
        const auto f = build_fabric(desk(), ladder);
        CHECK(measure_zero_load(f) == ladder);
    }
    const auto tera = validate(parse_label("8C-8T-4SG-4G"));
    const LatencyLadder tl{1, 3, 5, 9};
    CHECK(measure_zero_load(build_fabric(tera, tl)) == tl);
    const auto flat = validate(parse_label("64C"));
    CHECK(measure_zero_load(build_fabric(flat, {1})) == LatencyLadder{1});
}

TEST_CASE("spill registers split the round trip") {
    const auto f = build_fabric(desk(), {1, 3, 5, 9});
    const auto& sp = f.spill_placement();
    REQUIRE(sp.size() == 4);
    const std::uint32_t expect_total[] = {0, 1, 2, 4};
    for (std::size_t k = 0; k < sp.size(); ++k) {
        const std::uint32_t per_dir = (sp[k].round_trip - 1) / 2;
        CHECK(sp[k].round_trip == f.ladder()[k]);
        CHECK(sp[k].master_registers + sp[k].slave_registers == per_dir);
        CHECK(per_dir == expect_total[k]);
        CHECK(sp[k].master_registers == (per_dir + 1) / 2);
        CHECK(sp[k].slave_registers == per_dir / 2);
    }
}

TEST_CASE("bad fabric options") {
    FabricOptions o;
    o.input_queue_depth = 0;
    CHECK_THROWS_AS(build_fabric(desk(), {1, 3, 5, 7}, o), InputError);
    o = {};
    o.spill_depth = 9;
    CHECK_THROWS_AS(build_fabric(desk(), {1, 3, 5, 7}, o), InputError);
    CHECK_THROWS_AS(build_fabric(desk(), {1, 3, 5, 99}), InputError);
}

TEST_CASE("a lone PE sees the zero-load latency of its target") {
    const auto cfg = desk();
    const auto f = build_fabric(cfg, {1, 3, 5, 7});
    const AddressMap map(cfg, 0);
    for (std::uint32_t bank : {0u, 5u, 17u, 100u, 255u}) {
        Trace t;
        for (int i = 0; i < 50; ++i) {
            Op op;
            op.pe = 0;
            op.cycle = std::uint64_t(i) * 20;
            const std::uint32_t gt = bank / 16;
            op.address = map.unmap({gt / 8, (gt / 4) % 2, gt % 4, bank % 16, 3});
            t.push_back(op);
        }
        const auto coord = map.map(t[0].address).coord;
        REQUIRE(map.global_bank(coord) == bank);
        const auto cls = f.distance_class(0, map.global_bank(coord));
        auto src = trace_source(t, cfg.total_pes);
        SimOptions so;
        so.warmup = 0;
        const auto s = run_to_completion(f, map, *src, 5000, so);
        REQUIRE(s.finished);
        CHECK(s.completed == 50);
        CHECK(s.amat == doctest::Approx(f.ladder()[cls]));
    }
}

TEST_CASE("one hot bank serves one request per cycle") {
    const auto cfg = desk();
    const auto f = build_fabric(cfg, {1, 3, 5, 7});
    const AddressMap map(cfg, 0);
    HotspotSource src(cfg.total_pes, 4096);
    SimOptions so;
    so.warmup = 2000;
    so.check_invariants = true;
    const auto s = run(f, map, src, 12000, so);
    CHECK(s.invariant_violations == 0);
    CHECK(s.throughput == doctest::Approx(1.0 / cfg.total_pes).epsilon(0.01));
}

TEST_CASE("invariants hold under uniform load") {
    const auto cfg = desk();
    const auto f = build_fabric(cfg, {1, 3, 5, 7});
    const AddressMap map(cfg);
    auto src = uniform_source(map, 1.0, 7);
    SimOptions so;
    so.warmup = 500;
    so.check_invariants = true;
    const auto s = run(f, map, *src, 5000, so);
    CHECK(s.invariant_checks > 0);
    CHECK(s.invariant_violations == 0);
    CHECK(s.first_violation.empty());
    CHECK(s.issued_total >= s.completed_total);
    CHECK(s.issued_total - s.completed_total == s.in_flight);
    std::uint64_t sum = 0;
    for (const auto& c : s.classes) sum += c.completed;
    CHECK(sum == s.completed);
}

TEST_CASE("simulation is deterministic") {
    const auto cfg = desk();
    const auto f = build_fabric(cfg, {1, 3, 5, 7});
    const AddressMap map(cfg);
    auto a = uniform_source(map, 0.6, 99);
    auto b = uniform_source(map, 0.6, 99);
    SimOptions so;
    so.warmup = 200;
    const auto sa = run(f, map, *a, 3000, so);
    const auto sb = run(f, map, *b, 3000, so);
    CHECK(sa == sb);
    auto c = uniform_source(map, 0.6, 100);
    CHECK_FALSE(run(f, map, *c, 3000, so) == sa);
}

TEST_CASE("local traffic beats uniform traffic") {
    const auto cfg = desk();
    const auto f = build_fabric(cfg, {1, 3, 5, 7});
    const AddressMap map(cfg);
    auto loc = local_tile_source(map, 1.0, 3);
    auto uni = uniform_source(map, 1.0, 3);
    SimOptions so;
    so.warmup = 500;
    const auto sl = run(f, map, *loc, 5000, so);
    const auto su = run(f, map, *uni, 5000, so);
    CHECK(sl.amat < su.amat);
    CHECK(sl.amat < 1.5);
}

TEST_CASE("flat crossbar tracks the analytic model") {
    const auto cfg = validate(parse_label("64C"));
    const auto f = build_fabric(cfg, {1});
    const AddressMap map(cfg);
    auto src = uniform_source(map, 1.0, 11);
    SimOptions so;
    so.warmup = 1000;
    const auto s = run(f, map, *src, 21000, so);
    const auto est = cluster_amat(cfg, {1}, 1.0);
    CHECK(std::abs(s.amat - est.t_cluster) / est.t_cluster < 0.15);
    CHECK(std::abs(s.throughput - est.throughput) / est.throughput < 0.15);
}

TEST_CASE("run arguments") {
    const auto cfg = desk();
    const auto f = build_fabric(cfg, {1, 3, 5, 7});
    const AddressMap map(cfg);
    auto src = uniform_source(map, 1.0, 1);
    SimOptions so;
    so.warmup = 100;
    CHECK_THROWS_AS(run(f, map, *src, 100, so), InputError);
    const AddressMap other(validate(parse_label("64C")));
    CHECK_THROWS_AS(run(f, other, *src, 1000, so), InputError);
    auto wrong = uniform_source(AddressMap(validate(parse_label("16C"))), 1.0, 1);
    CHECK_THROWS_AS(run(f, map, *wrong, 1000, so), InputError);
}
