#include <doctest.h>

#include <set>
#include <tuple>
#include <vector>

#include "xbarscale/addrmap.hpp"
#include "xbarscale/error.hpp"

using namespace xbarscale;

namespace {

HierarchyConfig desk(std::uint32_t bank_words = 256) {
    auto c = parse_label("4C-4T-2SG-2G");
    c.bank_words = bank_words;
    return validate(c);
}

std::uint64_t key(const BankCoord& c) {
    return ((((std::uint64_t(c.group) * 64 + c.subgroup) * 64 + c.tile) * 4096 + c.bank) << 24) + c.row;
}

}  // namespace

TEST_CASE("desk-scale map is a bijection") {
    for (auto layout : {BankLayout::bank_fastest, BankLayout::tile_fastest}) {
        for (std::int64_t seq : {std::int64_t(-1), std::int64_t(0), std::int64_t(256 * 4 * 64)}) {
            const AddressMap map(desk(), seq, layout);
            REQUIRE(map.l1_bytes() == (1u << 16) * 4);
            std::vector<bool> seen(std::size_t(256) * 256, false);
            std::uint64_t hits = 0;
            for (std::uint64_t a = 0; a < map.l1_bytes(); a += 4) {
                const auto m = map.map(a);
                const auto gb = map.global_bank(m.coord);
                REQUIRE(gb < 256);
                REQUIRE(m.coord.row < 256);
                const std::size_t slot = std::size_t(gb) * 256 + m.coord.row;
                if (!seen[slot]) ++hits;
                seen[slot] = true;
                REQUIRE(map.unmap(m.coord) == a);
                REQUIRE((m.region == Region::sequential) == (a < map.seq_region_bytes()));
            }
            CHECK(hits == seen.size());
        }
    }
}

TEST_CASE("interleaved words walk the banks in order") {
    const AddressMap map(desk(), 0);
    for (std::uint32_t i = 0; i < 1024; ++i) {
        const auto c = map.map(std::uint64_t(i) * 4).coord;
        CHECK(map.global_bank(c) == i % 256);
        CHECK(c.row == i / 256);
    }
    const AddressMap tf(desk(), 0, BankLayout::tile_fastest);
    const auto a = tf.map(0).coord;
    const auto b = tf.map(4).coord;
    CHECK(a.tile == 0);
    CHECK(b.tile == 1);
    CHECK(a.bank == b.bank);
}

TEST_CASE("sequential region keeps a tile slice in one tile") {
    const AddressMap map(desk());
    CHECK(map.seq_rows() == 32);
    CHECK(map.slice_bytes() == map.seq_region_bytes() / 16);
    for (std::uint32_t t = 0; t < 16; ++t) {
        for (std::uint64_t w = 0; w < map.slice_bytes() / 4; w += 7) {
            const auto m = map.map(map.slice_address(t, w));
            CHECK(m.region == Region::sequential);
            CHECK(map.global_tile(m.coord) == t);
        }
    }
    const AddressMap tp(parse_label("8C-8T-4SG-4G"));
    CHECK(tp.l1_bytes() == 4u << 20);
    CHECK(tp.seq_region_bytes() == 512u << 10);
    CHECK(tp.stripe_words() == 256);
}

TEST_CASE("stripe ownership matches burst_span") {
    const AddressMap map(desk(), 256 * 4 * 32);
    CHECK(map.stripe_words() == 64);
    const std::uint64_t base = map.interleaved_base();
    const auto chunks = burst_span(map, base, map.interleaved_region_bytes());
    std::uint64_t covered = 0;
    std::uint64_t next = base;
    for (const auto& ch : chunks) {
        CHECK(ch.address == next);
        CHECK(ch.words <= map.stripe_words());
        for (std::uint32_t w = 0; w < ch.words; ++w)
            REQUIRE(map.global_subgroup(map.map(ch.address + 4ull * w).coord) == ch.subgroup);
        next += 4ull * ch.words;
        covered += ch.words;
    }
    CHECK(covered * 4 == map.interleaved_region_bytes());

    const auto odd = burst_span(map, base + 4 * 60, 4 * 10);
    REQUIRE(odd.size() == 2);
    CHECK(odd[0].words == 4);
    CHECK(odd[1].words == 6);
    CHECK(odd[0].subgroup != odd[1].subgroup);
    CHECK(burst_span(map, base, 0).empty());
}

TEST_CASE("bank index does not depend on the bank row count") {
    const AddressMap small(desk(256), 0);
    const AddressMap large(desk(1024), 0);
    for (std::uint64_t a = 0; a < small.l1_bytes(); a += 4) {
        const auto x = small.map(a).coord;
        const auto y = large.map(a).coord;
        REQUIRE(small.global_bank(x) == large.global_bank(y));
    }
    const AddressMap s2(desk(256), 256 * 4 * 32);
    const AddressMap l2(desk(1024), 256 * 4 * 32);
    for (std::uint64_t w = 0; w < (1u << 16) - 256 * 32; ++w) {
        const auto x = s2.map(s2.interleaved_base() + 4 * w).coord;
        const auto y = l2.map(l2.interleaved_base() + 4 * w).coord;
        REQUIRE(s2.global_bank(x) == l2.global_bank(y));
    }
}

TEST_CASE("address map errors") {
    const AddressMap map(desk());
    CHECK_THROWS_AS(map.map(2), InputError);
    CHECK_THROWS_AS(map.map(map.l1_bytes()), InputError);
    CHECK_THROWS_AS(AddressMap(desk(), 100), InputError);
    CHECK_THROWS_AS(AddressMap(desk(), std::int64_t(map.l1_bytes()) * 2), InputError);
    CHECK_THROWS_AS(burst_span(map, 0, 64), InputError);
    CHECK_THROWS_AS(burst_span(map, map.interleaved_base() + 2, 64), InputError);
    CHECK_THROWS_AS(burst_span(map, map.l1_bytes() - 4, 8), InputError);
    BankCoord bad;
    bad.bank = 16;
    CHECK_THROWS_AS(map.unmap(bad), InputError);
}
