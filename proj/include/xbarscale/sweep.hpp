#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xbarscale/analytic.hpp"
#include "xbarscale/topology.hpp"

namespace xbarscale {

// One design point with every column of the interconnect analysis table.
struct AnalysisRow {
    HierarchyConfig config;
    LatencyLadder ladder;
    double zero_load = 0.0;
    double amat = 0.0;
    double throughput = 0.0;
    ComplexityReport complexity;
    bool converged = true;
    AmatEstimate estimate;
};

AnalysisRow analyze(const HierarchyConfig& config, const LatencyLadder& ladder, const AmatOptions& options = {},
                    TileAccounting accounting = TileAccounting::with_remote_ports);

// Evaluates every config on up to `threads` workers (0 = from XBAR_SCALE_THREADS or hardware),
// then orders rows by AMAT, ties broken by label.
std::vector<AnalysisRow> sweep(const std::vector<HierarchyConfig>& configs, unsigned threads = 0,
                               const AmatOptions& options = {},
                               TileAccounting accounting = TileAccounting::with_remote_ports);

unsigned sweep_threads();

// Reference values for the 1024-PE design space at banking factor 4.
struct ReferenceRow {
    const char* label;
    double zero_load;
    double amat;
    double throughput;
    std::uint64_t total_complexity;
    std::uint64_t critical_complexity;
    double critical_comb_delay;
};

const std::vector<ReferenceRow>& reference_rows();
std::optional<ReferenceRow> find_reference(const std::string& label);

// Column order follows the reference table.
std::string table_csv_header();
std::string table_csv_row(const AnalysisRow& row);

}  // namespace xbarscale
