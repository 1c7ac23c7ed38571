#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "xbarscale/addrmap.hpp"
#include "xbarscale/topology.hpp"
#include "xbarscale/workloads.hpp"

namespace xbarscale {

struct FabricOptions {
    std::uint32_t input_queue_depth = 1;  // remote-request queue in front of each bank crossbar input
    std::uint32_t spill_depth = 2;
};

struct SpillPlacement {
    std::size_t distance_class = 0;
    std::uint32_t round_trip = 0;
    // registers per direction, on the issuing side and the target side of the crossbar
    std::uint32_t master_registers = 0;
    std::uint32_t slave_registers = 0;
};

inline constexpr std::uint32_t sink = 0xffffffffu;

// Static fabric graph: buffers (spill registers, input queues, bank response slots) joined by arbiters.
class Fabric {
public:
    enum class ArbKind : std::uint8_t { round_robin, drain };

    struct BufferSpec {
        std::uint32_t capacity = 1;
        std::uint32_t latency = 0;
    };
    struct ArbiterSpec {
        ArbKind kind = ArbKind::round_robin;
        std::uint8_t rank = 0;
        std::uint32_t inputs = 1;
        std::uint32_t output = sink;   // buffer id
        std::int32_t bank = -1;        // global bank id for bank arbiters
        std::string name;
    };
    struct Hop {
        std::uint32_t arbiter = 0;
        std::uint32_t input = 0;
    };
    static constexpr std::size_t max_hops = 48;
    static constexpr std::uint8_t ranks = 10;
    static constexpr std::uint8_t issue_rank = 5;  // PE step happens right before this rank

    Fabric(const HierarchyConfig& config, const LatencyLadder& ladder, const FabricOptions& options);

    const HierarchyConfig& config() const { return config_; }
    const LatencyLadder& ladder() const { return ladder_; }
    const FabricOptions& options() const { return options_; }
    const std::vector<BufferSpec>& buffers() const { return buffers_; }
    const std::vector<ArbiterSpec>& arbiters() const { return arbiters_; }
    const std::vector<std::uint32_t>& rank_sources(std::uint8_t rank) const { return rank_sources_[rank]; }
    const std::vector<SpillPlacement>& spill_placement() const { return spill_; }
    std::uint32_t pe_buffer(std::uint32_t pe) const { return pe_buffer_[pe]; }

    std::size_t distance_class(std::uint32_t pe, std::uint32_t global_bank) const;
    // Writes the end-to-end hop list into `out` and returns its length.
    std::size_t route(std::uint32_t pe, std::uint32_t global_bank, std::array<Hop, max_hops>& out) const;

private:
    struct Chain {
        std::vector<std::uint32_t> buffers;
        std::vector<std::uint32_t> links;  // links[i] moves buffers[i] -> buffers[i+1] (or onward)
    };
    struct TilePort {
        std::size_t cls = 0;
        std::uint32_t req_arbiter = 0;
        Chain req_master;
        Chain resp_slave;            // ends in the completion drain
        // target side, for traffic arriving through this port
        Chain req_slave;             // last buffer is the bank input queue
        std::uint32_t resp_arbiter = 0;
        Chain resp_master;
    };
    struct Instance {
        std::vector<std::uint32_t> req_out;   // arbiter per output position
        std::vector<std::uint32_t> resp_out;
    };

    std::uint32_t add_buffer(std::uint32_t capacity, std::uint32_t latency);
    std::uint32_t add_arbiter(ArbKind kind, std::uint8_t rank, std::uint32_t inputs, std::uint32_t output,
                              std::string name);
    std::uint32_t port_index(std::size_t cls, std::uint32_t src_tile, std::uint32_t dst_tile) const;
    std::uint32_t instance_of(std::size_t cls, std::uint32_t src_tile, std::uint32_t dst_tile) const;
    std::uint32_t position_of(std::size_t cls, std::uint32_t tile) const;
    void build();

    HierarchyConfig config_;
    LatencyLadder ladder_;
    FabricOptions options_;
    std::vector<Level> class_level_;
    std::vector<BufferSpec> buffers_;
    std::vector<ArbiterSpec> arbiters_;
    std::array<std::vector<std::uint32_t>, ranks> rank_sources_;
    std::vector<SpillPlacement> spill_;
    std::vector<std::uint32_t> pe_buffer_;
    std::vector<std::uint32_t> bank_arbiter_;
    std::vector<std::uint32_t> bank_resp_buffer_;
    std::vector<std::vector<TilePort>> ports_;  // [tile][port]
    std::vector<std::uint32_t> class_port_base_;
    std::vector<std::vector<Instance>> instances_;  // [class][instance]
    std::uint32_t local_drain_ = 0;
    std::uint32_t remote_drain_ = 0;
};

Fabric build_fabric(const HierarchyConfig& config, const LatencyLadder& ladder, const FabricOptions& options = {});

struct SimOptions {
    std::uint64_t warmup = 1000;
    std::uint32_t table_depth = 8;
    bool check_invariants = false;
};

struct ClassStats {
    std::uint64_t completed = 0;
    double amat = 0.0;
    std::vector<std::uint64_t> histogram;  // index = round-trip cycles

    friend bool operator==(const ClassStats&, const ClassStats&) = default;
};

struct SimStats {
    std::uint64_t cycles = 0;
    std::uint64_t measured_cycles = 0;
    std::uint32_t pes = 0;
    std::uint64_t issued = 0;             // after warmup
    std::uint64_t completed = 0;          // issued after warmup and completed before the end
    std::uint64_t issued_total = 0;
    std::uint64_t completed_total = 0;
    std::uint64_t in_flight = 0;
    std::uint64_t compute_ops = 0;
    double amat = 0.0;
    double throughput = 0.0;              // accepted requests / PE / cycle
    double stall_lsu_full = 0.0;
    double stall_raw = 0.0;
    double stall_contention = 0.0;
    std::vector<ClassStats> classes;
    bool finished = false;                // every stream exhausted and drained
    std::uint64_t invariant_checks = 0;
    std::uint64_t invariant_violations = 0;
    std::string first_violation;

    friend bool operator==(const SimStats&, const SimStats&) = default;
};

SimStats run(const Fabric& fabric, const AddressMap& map, TrafficSource& source, std::uint64_t cycles,
             const SimOptions& options = {});

// Stops early once every stream is exhausted and the fabric has drained.
SimStats run_to_completion(const Fabric& fabric, const AddressMap& map, TrafficSource& source,
                           std::uint64_t max_cycles, const SimOptions& options = {});

// One probe request per class on an idle fabric; throws ModelError when a class misses its ladder entry.
std::vector<std::uint32_t> measure_zero_load(const Fabric& fabric);

}  // namespace xbarscale
