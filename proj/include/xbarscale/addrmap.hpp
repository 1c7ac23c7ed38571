#pragma once

#include <cstdint>
#include <vector>

#include "xbarscale/topology.hpp"

namespace xbarscale {

// Order in which interleaved word indices walk the bank coordinates.
enum class BankLayout {
    bank_fastest,  // (bank, tile, subgroup, group), little-endian
    tile_fastest,  // (tile, bank, subgroup, group)
};

struct BankCoord {
    std::uint32_t group = 0;
    std::uint32_t subgroup = 0;
    std::uint32_t tile = 0;
    std::uint32_t bank = 0;
    std::uint32_t row = 0;

    friend bool operator==(const BankCoord&, const BankCoord&) = default;
};

enum class Region { sequential, interleaved };

struct MappedAddress {
    BankCoord coord;
    Region region = Region::interleaved;
};

class AddressMap {
public:
    static constexpr std::uint32_t word_bytes = 4;

    // seq_region_bytes defaults to one eighth of L1 (512 KiB of 4 MiB).
    explicit AddressMap(const HierarchyConfig& config, std::int64_t seq_region_bytes = -1,
                        BankLayout layout = BankLayout::bank_fastest);

    const HierarchyConfig& config() const { return config_; }
    BankLayout layout() const { return layout_; }
    std::uint64_t l1_bytes() const { return l1_bytes_; }
    std::uint64_t seq_region_bytes() const { return seq_bytes_; }
    std::uint64_t interleaved_region_bytes() const { return l1_bytes_ - seq_bytes_; }
    std::uint64_t interleaved_base() const { return seq_bytes_; }
    std::uint64_t slice_bytes() const { return seq_bytes_ / config_.total_tiles; }
    std::uint32_t seq_rows() const { return seq_rows_; }
    // Words per interleaved stripe owned by a single subgroup.
    std::uint32_t stripe_words() const;

    MappedAddress map(std::uint64_t byte_address) const;
    // Inverse of map(); throws InputError for coordinates outside the L1.
    std::uint64_t unmap(const BankCoord& coord) const;

    // Global ids: tile = (group, subgroup, tile); bank = tile * banks_per_tile + bank.
    std::uint32_t global_tile(const BankCoord& c) const;
    std::uint32_t global_bank(const BankCoord& c) const;
    std::uint32_t global_subgroup(const BankCoord& c) const { return c.group * config_.subgroups_per_group + c.subgroup; }

    // Byte address of word `word` in tile `tile`'s sequential slice.
    std::uint64_t slice_address(std::uint32_t tile, std::uint64_t word) const;

private:
    BankCoord decompose(std::uint32_t bank_index) const;

    HierarchyConfig config_;
    BankLayout layout_;
    std::uint64_t l1_bytes_ = 0;
    std::uint64_t seq_bytes_ = 0;
    std::uint32_t seq_rows_ = 0;
};

MappedAddress map_address(const AddressMap& map, std::uint64_t byte_address);

struct BurstChunk {
    std::uint32_t subgroup = 0;  // global subgroup id
    std::uint64_t address = 0;
    std::uint32_t words = 0;
};

// Splits an interleaved range at stripe boundaries.
std::vector<BurstChunk> burst_span(const AddressMap& map, std::uint64_t byte_address, std::uint64_t byte_len);

}  // namespace xbarscale
