#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "xbarscale/error.hpp"
#include "xbarscale/sweep.hpp"
#include "xbarscale/topology.hpp"

using namespace xbarscale;

namespace {

// Brute force over (tile, tile) pairs: the class of a pair is the innermost level both tiles share.
double zero_load_oracle(const HierarchyConfig& c, const LatencyLadder& ladder) {
    std::vector<int> classes;  // which levels exist, innermost first
    double sum = 0.0;
    const std::uint32_t tiles = c.total_tiles;
    const std::uint32_t per_sg = c.tiles_per_subgroup;
    const std::uint32_t per_g = c.tiles_per_subgroup * c.subgroups_per_group;
    std::vector<std::size_t> index(4, 0);
    std::size_t k = 0;
    index[0] = k++;
    if (c.tiles_per_subgroup > 1) index[1] = k++;
    if (c.subgroups_per_group > 1) index[2] = k++;
    if (c.groups > 1) index[3] = k++;
    for (std::uint32_t s = 0; s < tiles; ++s) {
        for (std::uint32_t t = 0; t < tiles; ++t) {
            int level = 3;
            if (s == t) level = 0;
            else if (s / per_sg == t / per_sg) level = 1;
            else if (s / per_g == t / per_g) level = 2;
            sum += ladder[index[level]];
        }
    }
    return sum / (double(tiles) * tiles);
}

}  // namespace

TEST_CASE("zero-load latency matches the reference column") {
    for (const auto& ref : reference_rows()) {
        const auto c = parse_label(ref.label);
        const auto z = zero_load_latency(c, default_ladder(c));
        CAPTURE(ref.label);
        CHECK(std::abs(z - ref.zero_load) <= 0.001);
    }
}

TEST_CASE("zero-load latency agrees with a pairwise enumeration") {
    for (const char* label : {"4C-4T-2SG-2G", "8C-8T-4SG-4G", "4C-16T-16G", "16C-64T", "2C-2T-2SG-8G", "64C"}) {
        const auto c = parse_label(label);
        const auto ladder = default_ladder(c);
        CAPTURE(label);
        CHECK(zero_load_latency(c, ladder) == doctest::Approx(zero_load_oracle(c, ladder)).epsilon(1e-12));
    }
    const auto c = parse_label("8C-8T-4SG-4G");
    const LatencyLadder ladder{1, 3, 5, 9};
    CHECK(zero_load_latency(c, ladder) == doctest::Approx(zero_load_oracle(c, ladder)).epsilon(1e-12));
}

TEST_CASE("bank population covers every bank") {
    for (const char* label : {"1024C", "4C-256T", "8C-8T-4SG-4G", "16C-4T-4SG-4G"}) {
        const auto c = parse_label(label);
        const auto pop = bank_population(c);
        std::uint64_t total = 0;
        for (auto v : pop) total += v;
        CHECK(total == c.total_banks);
        CHECK(pop.size() == c.classes());
        CHECK(pop[0] == c.banks_per_tile);
    }
}

TEST_CASE("complexity metrics where the reference table itemizes them") {
    auto flat = complexity_metrics(parse_label("1024C"));
    CHECK(flat.critical_complexity == 4194304);
    CHECK(flat.total_complexity == 4194304);
    CHECK(flat.critical_comb_delay == doctest::Approx(22));
    CHECK(complexity_metrics(parse_label("4C-256T")).critical_complexity == 65536);
    auto tp = complexity_metrics(parse_label("8C-8T-4SG-4G"));
    CHECK(tp.critical_complexity == 1024);
    CHECK(tp.critical_comb_delay == doctest::Approx(10));
    CHECK(complexity_metrics(parse_label("16C-4T-4SG-4G")).critical_complexity == 1536);
}

TEST_CASE("total complexity is the sum of the itemized instances") {
    for (const auto& ref : reference_rows()) {
        const auto r = complexity_metrics(parse_label(ref.label));
        std::uint64_t sum = 0;
        std::uint64_t crit = 0;
        for (const auto& i : r.instances) {
            sum += i.count * i.leaves();
            if (i.name != "tile-demux") crit = std::max(crit, i.leaves());
        }
        CAPTURE(ref.label);
        CHECK(sum == r.total_complexity);
        CHECK(crit == r.critical_complexity);
    }
}

TEST_CASE("tile accounting changes only the tile crossbar") {
    const auto c = parse_label("8C-8T-4SG-4G");
    const auto a = complexity_metrics(c, TileAccounting::with_remote_ports);
    const auto b = complexity_metrics(c, TileAccounting::pe_inputs_only);
    CHECK(b.total_complexity < a.total_complexity);
    CHECK(remote_ports_per_tile(c) == 7);
}

TEST_CASE("labels round-trip") {
    for (const char* label : {"1024C", "4C-256T", "4C-16T-16G", "8C-8T-4SG-4G", "2C-4SG"}) {
        CHECK(parse_label(label).label() == label);
    }
    const auto c = make_config(8, 8, 4, 4);
    CHECK(c.total_pes == 1024);
    CHECK(c.total_banks == 4096);
    CHECK(c.banks_per_tile == 32);
    CHECK(c.classes() == 4);
}

TEST_CASE("invalid hierarchies are rejected") {
    CHECK_THROWS_AS(make_config(3, 4, 1, 1), InputError);
    CHECK_THROWS_AS(make_config(0, 4, 1, 1), InputError);
    CHECK_THROWS_AS(make_config(4, 4, 1, 1, 0), InputError);
    CHECK(make_config(4, 4, 1, 1, 3).total_banks == 48);
    CHECK_THROWS_AS(parse_label("8X-8T"), InputError);
    CHECK_THROWS_AS(parse_label(""), InputError);
    CHECK_THROWS_AS(parse_label("8C-8C"), InputError);
}

TEST_CASE("ladders are checked") {
    const auto c = parse_label("8C-8T-4SG-4G");
    CHECK(default_ladder(c) == LatencyLadder{1, 3, 5, 7});
    CHECK_NOTHROW(check_ladder(c, {1, 3, 5, 9}));
    CHECK_THROWS_AS(check_ladder(c, {1, 3, 5}), InputError);
    CHECK_THROWS_AS(check_ladder(c, {1, 3, 3, 7}), InputError);
    CHECK_THROWS_AS(check_ladder(c, {1, 4, 5, 7}), InputError);
    CHECK_THROWS_AS(check_ladder(c, {3, 5, 7, 9}), InputError);
}

TEST_CASE("enumeration covers the reference design points") {
    const auto all = enumerate_hierarchies(1024, 4);
    std::set<std::string> labels;
    for (const auto& c : all) {
        CHECK(c.total_pes == 1024);
        labels.insert(c.label());
    }
    for (const auto& ref : reference_rows()) CHECK(labels.count(ref.label) == 1);

    LevelBounds two;
    two.min_levels = 2;
    two.max_levels = 2;
    for (const auto& c : enumerate_hierarchies(1024, 4, two)) CHECK(hierarchy_levels(c) == 2);

    LevelBounds none;
    none.pes_per_tile = {3};
    CHECK(enumerate_hierarchies(1024, 4, none).empty());
    CHECK_THROWS_AS(enumerate_hierarchies(1000, 4), InputError);
}
