#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xbarscale/addrmap.hpp"

namespace xbarscale {

struct HbmConfig {
    std::uint32_t channels = 16;
    double pin_rate_gbps = 3.6;       // per pin
    std::uint32_t pins_per_channel = 128;
    double clock_mhz = 900.0;         // cluster clock
    std::uint32_t masters = 16;
    std::uint32_t link_bytes = 64;    // per master per cycle
    double refresh_fraction = 0.03;
    double refresh_period_ns = 3900.0;
    std::uint32_t frontend_cycles = 64;
    std::uint32_t interleave_words = 256;
    std::uint32_t outstanding = 8;    // bursts in flight per master

    double channel_peak_gbps() const { return pin_rate_gbps * pins_per_channel / 8.0; }
    double peak_gbps() const { return channel_peak_gbps() * channels; }
    std::uint64_t interleave_bytes() const { return std::uint64_t(interleave_words) * 4; }
};

void check(const HbmConfig& hbm);

double link_ceiling(const HbmConfig& hbm);

enum class Direction { l2_to_l1, l1_to_l2 };

std::string to_string(Direction d);
Direction parse_direction(const std::string& name);

struct DmaDescriptor {
    std::uint64_t source = 0;
    std::uint64_t destination = 0;
    std::uint64_t length = 0;
    Direction direction = Direction::l2_to_l1;

    std::uint64_t l1_address() const { return direction == Direction::l2_to_l1 ? destination : source; }
    std::uint64_t l2_address() const { return direction == Direction::l2_to_l1 ? source : destination; }
};

struct Burst {
    std::uint64_t l1_address = 0;
    std::uint64_t l2_address = 0;
    std::uint32_t bytes = 0;
    std::uint32_t channel = 0;
};

struct DmaSubTask {
    std::uint32_t backend = 0;  // global subgroup id
    std::vector<Burst> bursts;

    std::uint64_t bytes() const;
};

// Splits at L1 stripe and HBM channel boundaries; one subtask per touched subgroup, in subgroup order.
std::vector<DmaSubTask> dma_split(const DmaDescriptor& descriptor, const AddressMap& map, const HbmConfig& hbm = {});

struct TransferStats {
    std::uint64_t bytes = 0;
    std::uint64_t cycles = 0;
    std::uint32_t descriptors = 0;
    double seconds = 0.0;
    double achieved_gbps = 0.0;
    double hbm_utilization = 0.0;
    double link_utilization = 0.0;
};

// Each element is the split of one descriptor; descriptors are configured back to back.
TransferStats run_transfer(const std::vector<std::vector<DmaSubTask>>& descriptors, const HbmConfig& hbm);
TransferStats run_transfer(const std::vector<DmaSubTask>& subtasks, const HbmConfig& hbm);

enum class ScenarioKind { l2_to_l1, l1_to_l2, round_trip };

struct TransferScenario {
    std::string name;
    double clock_mhz = 900.0;
    double pin_rate_gbps = 3.6;
    std::uint64_t bytes = 8ull << 20;
    ScenarioKind kind = ScenarioKind::round_trip;
    double refresh_fraction = 0.03;
    std::uint32_t frontend_cycles = 64;
};

std::string to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(const std::string& name);

// Runs a scenario against the fully interleaved L1 of `config`.
TransferStats run_scenario(const TransferScenario& scenario, const HierarchyConfig& config);

struct MatrixPoint {
    double clock_mhz = 0.0;
    double pin_rate_gbps = 0.0;
    TransferStats stats;
    double peak_gbps = 0.0;
    double link_gbps = 0.0;
};

std::vector<MatrixPoint> bandwidth_matrix(const std::vector<double>& clocks_mhz, const std::vector<double>& pin_rates,
                                          const HierarchyConfig& config, const TransferScenario& base = {});

}  // namespace xbarscale
