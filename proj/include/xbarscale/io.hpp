#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xbarscale/addrmap.hpp"
#include "xbarscale/analytic.hpp"
#include "xbarscale/fabric.hpp"
#include "xbarscale/hbml.hpp"
#include "xbarscale/topology.hpp"

namespace xbarscale {

using json = nlohmann::ordered_json;

// Everything a config file may carry besides the hierarchy itself.
struct ConfigDocument {
    HierarchyConfig config;
    LatencyLadder ladder;
    std::int64_t seq_region_bytes = -1;
    BankLayout layout = BankLayout::bank_fastest;
    FabricOptions fabric;
    SimOptions sim;
    AmatOptions analytic;
    TileAccounting accounting = TileAccounting::with_remote_ports;
    nlohmann::json source;  // the parsed input, for digests
};

ConfigDocument parse_config(const nlohmann::json& j);
ConfigDocument load_config(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

// "1,3,5,7"
LatencyLadder parse_ladder(const std::string& text);
std::vector<double> parse_list(const std::string& text);

std::string to_string(BankLayout layout);
BankLayout parse_layout(const std::string& name);
std::string to_string(TileAccounting a);
TileAccounting parse_accounting(const std::string& name);

json to_json(const HierarchyConfig& c);
json to_json(const ComplexityReport& r);
json to_json(const AmatEstimate& e);
json to_json(const SimStats& s);
json to_json(const TransferStats& s);
json to_json(const Feasibility& f);
json to_json(const ScalingParams& p);
json to_json(const std::vector<SpillPlacement>& placement);

struct RunManifest {
    std::string command;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::string tool_version;
    double wall_time_s = 0.0;
};

json to_json(const RunManifest& m);
std::string digest(const nlohmann::json& j);  // FNV-1a 64 over the canonical dump
std::string tool_version();

// Minimal CSV emission: fields containing separators or quotes are quoted.
std::string csv_field(const std::string& s);
std::string csv_number(double v, int precision = 6);
void write_histogram_csv(std::ostream& out, const SimStats& s);

}  // namespace xbarscale
