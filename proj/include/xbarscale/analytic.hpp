#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xbarscale/topology.hpp"

namespace xbarscale {

struct ArbiterSpec {
    std::uint32_t n = 1;
    std::uint32_t k = 1;
    double p = 0.0;
};

double binomial_pmf(std::uint32_t n, double p, std::uint32_t x);

// Expected extra cycles a request waits at an n-to-1 round-robin arbiter.
double arbiter_latency_n_to_1(std::uint32_t n, double p);

// n inputs spread uniformly over k outputs.
double arbiter_latency_n_to_k(std::uint32_t n, std::uint32_t k, double p);
// The per-output recursion evaluated term by term, for any k.
double arbiter_latency_n_to_k_recursive(std::uint32_t n, std::uint32_t k, double p);
inline double arbiter_latency(const ArbiterSpec& s) { return arbiter_latency_n_to_k(s.n, s.k, s.p); }

// Probability that a given output of the stage carries a request.
double propagate_injection(const ArbiterSpec& stage);

struct StageEstimate {
    std::string name;
    ArbiterSpec offered;   // rate before queue backlog
    double effective_p = 0.0;
    double contention = 0.0;
};

struct ClassEstimate {
    double probability = 0.0;
    std::uint32_t pipeline = 0;  // contention-free round trip
    double contention = 0.0;
    double request_contention = 0.0;
    double response_contention = 0.0;
    double latency = 0.0;
    std::vector<StageEstimate> stages;
};

enum class ThroughputMode {
    pipeline_hidden,  // 1 / (AMAT - mean remote pipeline depth)
    weighted,         // 1 / (1 + sum_c P_c E_c)
    bottleneck,       // 1 / (1 + max_c E_c)
};

struct AmatOptions {
    std::uint32_t queue_depth = 2;
    std::uint32_t max_iterations = 1000;
    double tolerance = 1e-6;
    ThroughputMode throughput = ThroughputMode::pipeline_hidden;
};

struct AmatEstimate {
    std::vector<ClassEstimate> classes;
    double zero_load = 0.0;
    double t_cluster = 0.0;
    double throughput = 0.0;
    std::uint32_t iterations = 0;
    bool converged = true;
};

// Per-class stage chains (PE side to bank side) at injection rate p, before queue feedback.
std::vector<std::vector<StageEstimate>> build_stage_chains(const HierarchyConfig& config, double p);

AmatEstimate cluster_amat(const HierarchyConfig& config, const LatencyLadder& ladder, double p,
                          const AmatOptions& options = {});

double cluster_throughput(const HierarchyConfig& config, const LatencyLadder& ladder,
                          ThroughputMode mode = ThroughputMode::pipeline_hidden);

std::string to_string(ThroughputMode mode);
ThroughputMode parse_throughput_mode(const std::string& name);

// Square-matrix GEMM with W = 3 m^2 words resident: m^3 MACs over 3 m^2 words.
double matmul_arithmetic_intensity(double words);

struct ScalingParams {
    double latency = 0.0;       // L, cycles
    double tile_words = 0.0;    // W
    double bandwidth = 1.0;     // BW, words/cycle
    double intensity = 1.0;     // AI, ops/word
    double pes = 1.0;           // N_PEs
    double utilization = 1.0;   // U
    double scale = 1.0;         // S
};

struct Feasibility {
    bool feasible = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
};

Feasibility kung_feasible(const ScalingParams& params);

// Grows W, N_PEs and BW by s together and multiplies S by s.
ScalingParams scaled(ScalingParams params, double s);

}  // namespace xbarscale
