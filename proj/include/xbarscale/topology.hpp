#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace xbarscale {

enum class Level { tile, subgroup, group, cluster };

// alpha C - beta T - gamma SG - delta G
struct HierarchyConfig {
    std::uint32_t pes_per_tile = 1;
    std::uint32_t tiles_per_subgroup = 1;
    std::uint32_t subgroups_per_group = 1;
    std::uint32_t groups = 1;
    std::uint32_t banking_factor = 4;
    std::uint32_t bank_words = 256;

    // derived by validate()
    std::uint32_t total_pes = 0;
    std::uint32_t total_banks = 0;
    std::uint32_t banks_per_tile = 0;
    std::uint32_t total_tiles = 0;
    std::vector<Level> levels;

    bool flat() const { return tiles_per_subgroup == 1 && subgroups_per_group == 1 && groups == 1; }
    std::uint32_t tiles_per_group() const { return tiles_per_subgroup * subgroups_per_group; }
    std::uint32_t banks_per_subgroup() const { return banks_per_tile * tiles_per_subgroup; }
    std::uint32_t total_subgroups() const { return subgroups_per_group * groups; }

    // Number of hierarchy distance classes: local tile plus one per non-trivial outer level.
    std::size_t classes() const;

    // "8C-8T-4SG-4G"; unit levels are omitted ("1024C", "4C-16T-16G").
    std::string label() const;

    friend bool operator==(const HierarchyConfig& a, const HierarchyConfig& b) {
        return a.pes_per_tile == b.pes_per_tile && a.tiles_per_subgroup == b.tiles_per_subgroup &&
               a.subgroups_per_group == b.subgroups_per_group && a.groups == b.groups &&
               a.banking_factor == b.banking_factor && a.bank_words == b.bank_words;
    }
};

HierarchyConfig make_config(std::uint32_t alpha, std::uint32_t beta, std::uint32_t gamma,
                            std::uint32_t delta, std::uint32_t banking_factor = 4);

// Parses "8C-8T-4SG-4G" style labels. Missing levels default to 1.
HierarchyConfig parse_label(const std::string& label, std::uint32_t banking_factor = 4);

// Throws InputError listing every violated invariant.
HierarchyConfig validate(HierarchyConfig config);

// Round-trip latency per distance class, innermost first.
using LatencyLadder = std::vector<std::uint32_t>;

// 1, 3, 5, 7, ... one entry per class of the config.
LatencyLadder default_ladder(const HierarchyConfig& config);

// Throws InputError when the ladder is malformed or its length does not match.
void check_ladder(const HierarchyConfig& config, const LatencyLadder& ladder);

// Banks reachable per distance class: [local tile, same subgroup, same group, remote groups],
// restricted to the classes present in the config.
std::vector<std::uint64_t> bank_population(const HierarchyConfig& config);

double zero_load_latency(const HierarchyConfig& config, const LatencyLadder& ladder);

struct CrossbarInstance {
    std::string name;
    std::uint64_t count = 0;
    std::uint32_t inputs = 0;
    std::uint32_t outputs = 0;

    std::uint64_t leaves() const { return std::uint64_t(inputs) * outputs; }
};

enum class TileAccounting {
    with_remote_ports,  // tile crossbar inputs include the arbitration tree for remote requests
    pe_inputs_only,
};

struct ComplexityReport {
    std::vector<CrossbarInstance> instances;
    std::uint64_t total_complexity = 0;
    std::uint64_t critical_complexity = 0;
    double critical_comb_delay = 0.0;
    std::string critical_instance;
};

// Remote ports leaving each tile: one per outer-level crossbar the tile attaches to.
std::uint32_t remote_ports_per_tile(const HierarchyConfig& config);

ComplexityReport complexity_metrics(const HierarchyConfig& config,
                                    TileAccounting accounting = TileAccounting::with_remote_ports);

struct LevelBounds {
    // empty = any power of two
    std::vector<std::uint32_t> pes_per_tile;
    std::vector<std::uint32_t> tiles_per_subgroup;
    std::vector<std::uint32_t> subgroups_per_group;
    std::vector<std::uint32_t> groups;
    std::uint32_t min_levels = 1;
    std::uint32_t max_levels = 4;
};

// Hierarchy depth: 1 for flat, +1 per non-unit outer level.
std::uint32_t hierarchy_levels(const HierarchyConfig& config);

std::vector<HierarchyConfig> enumerate_hierarchies(std::uint32_t total_pes,
                                                   std::uint32_t banking_factor,
                                                   const LevelBounds& bounds = {});

bool is_pow2(std::uint64_t v);
std::uint32_t log2_floor(std::uint64_t v);
std::uint64_t next_pow2(std::uint64_t v);

}  // namespace xbarscale
