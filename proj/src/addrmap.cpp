#include "xbarscale/addrmap.hpp"

#include <algorithm>
#include <string>

#include "xbarscale/error.hpp"

namespace xbarscale {

AddressMap::AddressMap(const HierarchyConfig& config, std::int64_t seq_region_bytes, BankLayout layout)
    : config_(validate(config)), layout_(layout) {
    l1_bytes_ = std::uint64_t(config_.total_banks) * config_.bank_words * word_bytes;
    const std::uint64_t row_bytes = std::uint64_t(config_.total_banks) * word_bytes;
    if (seq_region_bytes < 0) {
        seq_bytes_ = row_bytes * (config_.bank_words / 8);
    } else {
        seq_bytes_ = static_cast<std::uint64_t>(seq_region_bytes);
        if (seq_bytes_ % row_bytes != 0)
            throw InputError("sequential region (" + std::to_string(seq_bytes_) +
                             " B) must be a multiple of banks x word size (" + std::to_string(row_bytes) + " B)");
        if (seq_bytes_ > l1_bytes_) throw InputError("sequential region exceeds L1 capacity");
    }
    seq_rows_ = static_cast<std::uint32_t>(seq_bytes_ / row_bytes);
}

std::uint32_t AddressMap::stripe_words() const { return std::min<std::uint32_t>(256, config_.banks_per_subgroup()); }

BankCoord AddressMap::decompose(std::uint32_t i) const {
    BankCoord c;
    const auto& h = config_;
    if (layout_ == BankLayout::bank_fastest) {
        c.bank = i % h.banks_per_tile;
        i /= h.banks_per_tile;
        c.tile = i % h.tiles_per_subgroup;
        i /= h.tiles_per_subgroup;
    } else {
        c.tile = i % h.tiles_per_subgroup;
        i /= h.tiles_per_subgroup;
        c.bank = i % h.banks_per_tile;
        i /= h.banks_per_tile;
    }
    c.subgroup = i % h.subgroups_per_group;
    c.group = i / h.subgroups_per_group;
    return c;
}

MappedAddress AddressMap::map(std::uint64_t a) const {
    if (a % word_bytes != 0) throw InputError("address " + std::to_string(a) + " is not word aligned");
    if (a >= l1_bytes_) throw InputError("address " + std::to_string(a) + " is outside the L1 range");
    MappedAddress m;
    if (a < seq_bytes_) {
        const std::uint64_t slice = slice_bytes();
        const auto tile = static_cast<std::uint32_t>(a / slice);
        const std::uint64_t w = (a % slice) / word_bytes;
        m.region = Region::sequential;
        m.coord.tile = tile % config_.tiles_per_subgroup;
        m.coord.subgroup = (tile / config_.tiles_per_subgroup) % config_.subgroups_per_group;
        m.coord.group = tile / config_.tiles_per_group();
        m.coord.bank = static_cast<std::uint32_t>(w / seq_rows_);
        m.coord.row = static_cast<std::uint32_t>(w % seq_rows_);
        return m;
    }
    const std::uint64_t w = (a - seq_bytes_) / word_bytes;
    m.region = Region::interleaved;
    m.coord = decompose(static_cast<std::uint32_t>(w % config_.total_banks));
    m.coord.row = seq_rows_ + static_cast<std::uint32_t>(w / config_.total_banks);
    return m;
}

std::uint32_t AddressMap::global_tile(const BankCoord& c) const {
    return (c.group * config_.subgroups_per_group + c.subgroup) * config_.tiles_per_subgroup + c.tile;
}

std::uint32_t AddressMap::global_bank(const BankCoord& c) const {
    return global_tile(c) * config_.banks_per_tile + c.bank;
}

std::uint64_t AddressMap::unmap(const BankCoord& c) const {
    const auto& h = config_;
    if (c.group >= h.groups || c.subgroup >= h.subgroups_per_group || c.tile >= h.tiles_per_subgroup ||
        c.bank >= h.banks_per_tile || c.row >= h.bank_words)
        throw InputError("bank coordinate out of range");
    if (c.row < seq_rows_) {
        const std::uint64_t w = std::uint64_t(c.bank) * seq_rows_ + c.row;
        return global_tile(c) * slice_bytes() + w * word_bytes;
    }
    std::uint64_t i;
    const std::uint64_t outer = std::uint64_t(c.group) * h.subgroups_per_group + c.subgroup;
    if (layout_ == BankLayout::bank_fastest)
        i = (outer * h.tiles_per_subgroup + c.tile) * h.banks_per_tile + c.bank;
    else
        i = (outer * h.banks_per_tile + c.bank) * h.tiles_per_subgroup + c.tile;
    const std::uint64_t w = std::uint64_t(c.row - seq_rows_) * h.total_banks + i;
    return seq_bytes_ + w * word_bytes;
}

std::uint64_t AddressMap::slice_address(std::uint32_t tile, std::uint64_t word) const {
    if (tile >= config_.total_tiles || word >= slice_bytes() / word_bytes)
        throw InputError("sequential slice address out of range");
    return tile * slice_bytes() + word * word_bytes;
}

MappedAddress map_address(const AddressMap& map, std::uint64_t byte_address) { return map.map(byte_address); }

std::vector<BurstChunk> burst_span(const AddressMap& map, std::uint64_t addr, std::uint64_t len) {
    std::vector<BurstChunk> out;
    if (len == 0) return out;
    if (addr % AddressMap::word_bytes != 0 || len % AddressMap::word_bytes != 0)
        throw InputError("burst range must be word aligned");
    if (addr < map.interleaved_base()) throw InputError("burst range overlaps the sequential region");
    if (addr + len > map.l1_bytes()) throw InputError("burst range exceeds the L1 capacity");
    const std::uint64_t stripe = map.stripe_words();
    std::uint64_t w = (addr - map.interleaved_base()) / AddressMap::word_bytes;
    std::uint64_t left = len / AddressMap::word_bytes;
    while (left > 0) {
        const std::uint64_t n = std::min(left, stripe - w % stripe);
        const auto a = map.interleaved_base() + w * AddressMap::word_bytes;
        out.push_back({map.global_subgroup(map.map(a).coord), a, static_cast<std::uint32_t>(n)});
        w += n;
        left -= n;
    }
    return out;
}

}  // namespace xbarscale
