#include "xbarscale/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "xbarscale/error.hpp"

#ifndef XBARSCALE_VERSION
#define XBARSCALE_VERSION "dev"
#endif

namespace xbarscale {

std::string tool_version() { return XBARSCALE_VERSION; }

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed JSON in '" + path + "': " + e.what());
    }
}

LatencyLadder parse_ladder(const std::string& text) {
    LatencyLadder out;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t used = 0;
            const long v = std::stol(tok, &used);
            if (used != tok.size() || v < 1) throw InputError("");
            out.push_back(static_cast<std::uint32_t>(v));
        } catch (const std::exception&) {
            throw InputError("malformed ladder '" + text + "'");
        }
    }
    if (out.empty()) throw InputError("empty ladder");
    return out;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw InputError("");
        } catch (const std::exception&) {
            throw InputError("malformed number list '" + text + "'");
        }
    }
    return out;
}

std::string to_string(BankLayout layout) {
    return layout == BankLayout::bank_fastest ? "bank_fastest" : "tile_fastest";
}

BankLayout parse_layout(const std::string& name) {
    if (name == "bank_fastest") return BankLayout::bank_fastest;
    if (name == "tile_fastest") return BankLayout::tile_fastest;
    throw InputError("unknown bank layout '" + name + "'");
}

std::string to_string(TileAccounting a) {
    return a == TileAccounting::with_remote_ports ? "with_remote_ports" : "pe_inputs_only";
}

TileAccounting parse_accounting(const std::string& name) {
    if (name == "with_remote_ports") return TileAccounting::with_remote_ports;
    if (name == "pe_inputs_only") return TileAccounting::pe_inputs_only;
    throw InputError("unknown tile accounting '" + name + "'");
}

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw InputError(std::string("config key '") + key + "' has the wrong type");
    }
}

}  // namespace

ConfigDocument parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    static const char* known[] = {"label", "pes_per_tile", "tiles_per_subgroup", "subgroups_per_group", "groups",
                                  "banking_factor", "bank_words", "ladder", "seq_region_bytes", "bank_layout",
                                  "input_queue_depth", "spill_depth", "table_depth", "warmup", "queue_depth",
                                  "throughput_mode", "tile_accounting", "name", "comment"};
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw InputError("unknown config key '" + key + "'");
    }
    ConfigDocument d;
    d.source = j;
    const auto bf = get_or<std::uint32_t>(j, "banking_factor", 4);
    HierarchyConfig c;
    if (j.contains("label")) {
        c = parse_label(get_or<std::string>(j, "label", ""), bf);
    } else {
        if (!j.contains("pes_per_tile")) throw InputError("config needs 'pes_per_tile' or 'label'");
        c.pes_per_tile = get_or<std::uint32_t>(j, "pes_per_tile", 1);
        c.tiles_per_subgroup = get_or<std::uint32_t>(j, "tiles_per_subgroup", 1);
        c.subgroups_per_group = get_or<std::uint32_t>(j, "subgroups_per_group", 1);
        c.groups = get_or<std::uint32_t>(j, "groups", 1);
        c.banking_factor = bf;
    }
    c.bank_words = get_or<std::uint32_t>(j, "bank_words", 256);
    d.config = validate(c);
    if (j.contains("ladder")) {
        d.ladder = get_or<std::vector<std::uint32_t>>(j, "ladder", {});
    } else {
        d.ladder = default_ladder(d.config);
    }
    check_ladder(d.config, d.ladder);
    d.seq_region_bytes = get_or<std::int64_t>(j, "seq_region_bytes", -1);
    d.layout = parse_layout(get_or<std::string>(j, "bank_layout", "bank_fastest"));
    d.fabric.input_queue_depth = get_or<std::uint32_t>(j, "input_queue_depth", 1);
    d.fabric.spill_depth = get_or<std::uint32_t>(j, "spill_depth", 2);
    d.sim.table_depth = get_or<std::uint32_t>(j, "table_depth", 8);
    d.sim.warmup = get_or<std::uint64_t>(j, "warmup", 1000);
    d.analytic.queue_depth = get_or<std::uint32_t>(j, "queue_depth", 2);
    d.analytic.throughput = parse_throughput_mode(get_or<std::string>(j, "throughput_mode", "pipeline_hidden"));
    d.accounting = parse_accounting(get_or<std::string>(j, "tile_accounting", "with_remote_ports"));
    return d;
}

ConfigDocument load_config(const std::string& path) { return parse_config(read_json_file(path)); }

json to_json(const HierarchyConfig& c) {
    return json{{"label", c.label()},
                {"pes_per_tile", c.pes_per_tile},
                {"tiles_per_subgroup", c.tiles_per_subgroup},
                {"subgroups_per_group", c.subgroups_per_group},
                {"groups", c.groups},
                {"banking_factor", c.banking_factor},
                {"bank_words", c.bank_words},
                {"total_pes", c.total_pes},
                {"total_banks", c.total_banks},
                {"banks_per_tile", c.banks_per_tile}};
}

json to_json(const ComplexityReport& r) {
    json inst = json::array();
    for (const auto& i : r.instances)
        inst.push_back({{"name", i.name},
                        {"count", i.count},
                        {"inputs", i.inputs},
                        {"outputs", i.outputs},
                        {"leaves", i.count * i.leaves()}});
    return json{{"total_complexity", r.total_complexity},
                {"critical_complexity", r.critical_complexity},
                {"critical_comb_delay", r.critical_comb_delay},
                {"critical_instance", r.critical_instance},
                {"instances", inst}};
}

json to_json(const AmatEstimate& e) {
    json classes = json::array();
    for (const auto& c : e.classes) {
        json stages = json::array();
        for (const auto& s : c.stages)
            stages.push_back({{"name", s.name},
                              {"n", s.offered.n},
                              {"k", s.offered.k},
                              {"p", s.offered.p},
                              {"effective_p", s.effective_p},
                              {"contention", s.contention}});
        classes.push_back({{"probability", c.probability},
                           {"pipeline", c.pipeline},
                           {"contention", c.contention},
                           {"request_contention", c.request_contention},
                           {"response_contention", c.response_contention},
                           {"latency", c.latency},
                           {"stages", stages}});
    }
    return json{{"zero_load", e.zero_load},   {"amat", e.t_cluster},         {"throughput", e.throughput},
                {"iterations", e.iterations}, {"converged", e.converged},     {"classes", classes}};
}

json to_json(const SimStats& s) {
    json classes = json::array();
    for (std::size_t k = 0; k < s.classes.size(); ++k) {
        const auto& c = s.classes[k];
        json hist = json::object();
        for (std::size_t l = 0; l < c.histogram.size(); ++l)
            if (c.histogram[l]) hist[std::to_string(l)] = c.histogram[l];
        classes.push_back({{"class", k}, {"completed", c.completed}, {"amat", c.amat}, {"histogram", hist}});
    }
    return json{{"cycles", s.cycles},
                {"measured_cycles", s.measured_cycles},
                {"pes", s.pes},
                {"issued", s.issued},
                {"completed", s.completed},
                {"issued_total", s.issued_total},
                {"completed_total", s.completed_total},
                {"in_flight", s.in_flight},
                {"compute_ops", s.compute_ops},
                {"amat", s.amat},
                {"throughput", s.throughput},
                {"stalls", {{"lsu_full", s.stall_lsu_full}, {"raw", s.stall_raw}, {"contention", s.stall_contention}}},
                {"classes", classes},
                {"finished", s.finished},
                {"invariants", {{"checks", s.invariant_checks},
                                {"violations", s.invariant_violations},
                                {"first_violation", s.first_violation}}}};
}

json to_json(const TransferStats& s) {
    return json{{"bytes", s.bytes},
                {"cycles", s.cycles},
                {"descriptors", s.descriptors},
                {"seconds", s.seconds},
                {"achieved_gbps", s.achieved_gbps},
                {"hbm_utilization", s.hbm_utilization},
                {"link_utilization", s.link_utilization}};
}

json to_json(const Feasibility& f) {
    return json{{"feasible", f.feasible}, {"lhs", f.lhs}, {"rhs", f.rhs}, {"slack", f.slack}};
}

json to_json(const ScalingParams& p) {
    return json{{"latency", p.latency}, {"tile_words", p.tile_words}, {"bandwidth", p.bandwidth},
                {"intensity", p.intensity}, {"pes", p.pes}, {"utilization", p.utilization}, {"scale", p.scale}};
}

json to_json(const std::vector<SpillPlacement>& placement) {
    json out = json::array();
    for (const auto& s : placement)
        out.push_back({{"class", s.distance_class},
                       {"round_trip", s.round_trip},
                       {"master_registers_per_direction", s.master_registers},
                       {"slave_registers_per_direction", s.slave_registers}});
    return out;
}

json to_json(const RunManifest& m) {
    return json{{"command", m.command},
                {"config_digest", m.config_digest},
                {"seed", m.seed},
                {"tool_version", m.tool_version},
                {"wall_time_s", m.wall_time_s}};
}

std::string digest(const nlohmann::json& j) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

std::string csv_number(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

void write_histogram_csv(std::ostream& out, const SimStats& s) {
    out << "class,latency,count\n";
    for (std::size_t k = 0; k < s.classes.size(); ++k)
        for (std::size_t l = 0; l < s.classes[k].histogram.size(); ++l)
            if (s.classes[k].histogram[l]) out << k << ',' << l << ',' << s.classes[k].histogram[l] << '\n';
}

}  // namespace xbarscale
