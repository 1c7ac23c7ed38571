#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xbarscale/addrmap.hpp"

namespace xbarscale {

enum class OpKind : std::uint8_t { read, write, compute };

struct Op {
    std::uint64_t cycle = 0;  // earliest issue cycle
    std::uint32_t pe = 0;
    OpKind kind = OpKind::read;
    std::uint64_t address = 0;
    // Waits for the op this many positions earlier in the same PE's stream; 0 = independent.
    std::uint32_t dep = 0;

    friend bool operator==(const Op&, const Op&) = default;
};

using Trace = std::vector<Op>;

inline constexpr std::uint32_t max_dep_distance = 255;

// Per-PE op streams, consumed in order by the simulator.
class TrafficSource {
public:
    virtual ~TrafficSource() = default;
    virtual std::uint32_t pes() const = 0;
    virtual std::optional<Op> next(std::uint32_t pe) = 0;
};

// Deterministic per-stream generator (splitmix64 seeding, xoshiro256** core).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);
    std::uint64_t next();
    double uniform();                          // [0, 1)
    std::uint64_t below(std::uint64_t bound);  // [0, bound)
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t s_[4];
};

enum class PatternKind { uniform, local_tile, gemm_tiled, fft_radix4, csr_spmmadd, trace };

std::string to_string(PatternKind kind);
PatternKind parse_pattern(const std::string& name);

struct AccessPattern {
    PatternKind kind = PatternKind::uniform;
    double p = 1.0;
    std::uint64_t seed = 1;
    std::uint32_t matrix_dim = 32;      // gemm m
    std::uint32_t fft_points = 4096;    // N
    std::uint32_t fft_stage = 0;
    std::uint32_t csr_rows = 64;        // rows per PE
    std::uint32_t csr_nnz_per_row = 8;
    std::string trace_path;
};

// Uniform random interleaved-region words, each PE issuing with probability p per cycle.
std::unique_ptr<TrafficSource> uniform_source(const AddressMap& map, double p, std::uint64_t seed);
// Random words of the issuing PE's own sequential slice.
std::unique_ptr<TrafficSource> local_tile_source(const AddressMap& map, double p, std::uint64_t seed);
std::unique_ptr<TrafficSource> trace_source(const Trace& trace, std::uint32_t pes);

// Finite traces covering `cycles` cycles of the endless generators.
Trace gen_uniform(const AddressMap& map, double p, std::uint64_t seed, std::uint64_t cycles);
Trace gen_local_tile(const AddressMap& map, double p, std::uint64_t seed, std::uint64_t cycles);

// C = A * B with m x m matrices in the interleaved region; 4x4 output blocks spread over PEs.
Trace gen_gemm_tiled(const AddressMap& map, std::uint32_t m, double p);
// One radix-4 decimation-in-frequency stage; butterfly inputs are N / (4 * 4^stage) apart.
Trace gen_fft_radix4(const AddressMap& map, std::uint32_t n, std::uint32_t stage);
std::uint64_t fft_stride(std::uint32_t n, std::uint32_t stage);
// Row-wise merge of two CSR matrices with uniformly random column indices.
Trace gen_csr_spmmadd(const AddressMap& map, std::uint32_t rows, std::uint32_t nnz_per_row, std::uint64_t seed);

// Any pattern as a source; endless patterns run until the simulation stops.
std::unique_ptr<TrafficSource> make_source(const AddressMap& map, const AccessPattern& pattern);

void write_trace_jsonl(std::ostream& out, const Trace& trace);
Trace read_trace_jsonl(std::istream& in);

}  // namespace xbarscale
