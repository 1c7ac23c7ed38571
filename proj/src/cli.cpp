#include "xbarscale/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "xbarscale/addrmap.hpp"
#include "xbarscale/analytic.hpp"
#include "xbarscale/error.hpp"
#include "xbarscale/fabric.hpp"
#include "xbarscale/hbml.hpp"
#include "xbarscale/io.hpp"
#include "xbarscale/sweep.hpp"
#include "xbarscale/topology.hpp"
#include "xbarscale/workloads.hpp"

namespace xbarscale {
namespace {

using Clock = std::chrono::steady_clock;

struct Common {
    std::string config;
    std::string label;
    std::string ladder;
    std::string out;
    std::string format;
    std::uint32_t banking_factor = 4;
};

void add_target(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "hierarchy config (JSON)");
    app->add_option("--label", c.label, "hierarchy label such as 8C-8T-4SG-4G");
    app->add_option("--banking-factor", c.banking_factor, "banks per PE when using --label");
    app->add_option("--ladder", c.ladder, "round-trip latency per distance class, e.g. 1,3,5,7");
}

void add_output(CLI::App* app, Common& c, const std::string& default_format) {
    c.format = default_format;
    app->add_option("--out", c.out, "output file (default stdout)");
    app->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

ConfigDocument resolve(const Common& c) {
    if (!c.config.empty() && !c.label.empty()) throw InputError("--config and --label are mutually exclusive");
    ConfigDocument d;
    if (!c.config.empty()) {
        d = load_config(c.config);
    } else if (!c.label.empty()) {
        d = parse_config(nlohmann::json{{"label", c.label}, {"banking_factor", c.banking_factor}});
    } else {
        throw InputError("a hierarchy is required (--config or --label)");
    }
    if (!c.ladder.empty()) {
        d.ladder = parse_ladder(c.ladder);
        check_ladder(d.config, d.ladder);
    }
    return d;
}

nlohmann::json ladder_json(const LatencyLadder& l) { return nlohmann::json(l); }

class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path) {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw InputError("cannot write '" + path + "'");
            stream_ = file_.get();
        }
    }
    std::ostream& stream() { return *stream_; }
    bool to_file() const { return file_ != nullptr; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

struct Invocation {
    explicit Invocation(std::string name) : command(std::move(name)) {}
    std::string command;
    Clock::time_point start = Clock::now();
    std::uint64_t seed = 0;
    nlohmann::json inputs;

    RunManifest manifest() const {
        RunManifest m;
        m.command = command;
        m.config_digest = digest(inputs);
        m.seed = seed;
        m.tool_version = tool_version();
        m.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
        return m;
    }
};

void emit_json(const Invocation& inv, json body, const Common& c, std::ostream& out) {
    json doc;
    doc["manifest"] = to_json(inv.manifest());
    for (auto& [k, v] : body.items()) doc[k] = v;
    Sink sink(c.out, out);
    sink.stream() << doc.dump(2) << '\n';
}

// CSV carries no room for the manifest, so it goes next to the file or to stderr.
void emit_csv(const Invocation& inv, const std::string& text, const std::string& path, std::ostream& out,
              std::ostream& err) {
    Sink sink(path, out);
    sink.stream() << text;
    const std::string manifest = to_json(inv.manifest()).dump(2);
    if (sink.to_file()) {
        std::ofstream m(path + ".manifest.json");
        if (!m) throw InputError("cannot write '" + path + ".manifest.json'");
        m << manifest << '\n';
    } else {
        err << manifest << '\n';
    }
}

// ---- analyze ----

struct AnalyzeArgs {
    Common common;
    std::string throughput_mode;
    std::string accounting;
};

json reference_json(const AnalysisRow& row) {
    const auto ref = find_reference(row.config.label());
    if (!ref || row.config.banking_factor != 4) return nullptr;
    auto rel = [](double ours, double theirs) { return theirs != 0.0 ? (ours - theirs) / theirs : 0.0; };
    return json{{"zero_load", ref->zero_load},
                {"amat", ref->amat},
                {"throughput", ref->throughput},
                {"total_complexity", ref->total_complexity},
                {"critical_complexity", ref->critical_complexity},
                {"critical_comb_delay", ref->critical_comb_delay},
                {"delta",
                 {{"zero_load", row.zero_load - ref->zero_load},
                  {"amat_relative", rel(row.amat, ref->amat)},
                  {"throughput_relative", rel(row.throughput, ref->throughput)},
                  {"total_complexity", std::int64_t(row.complexity.total_complexity) -
                                           std::int64_t(ref->total_complexity)},
                  {"critical_complexity", std::int64_t(row.complexity.critical_complexity) -
                                              std::int64_t(ref->critical_complexity)},
                  {"critical_comb_delay", row.complexity.critical_comb_delay - ref->critical_comb_delay}}}};
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
    Invocation inv{"analyze"};
    auto d = resolve(a.common);
    if (!a.throughput_mode.empty()) d.analytic.throughput = parse_throughput_mode(a.throughput_mode);
    if (!a.accounting.empty()) d.accounting = parse_accounting(a.accounting);
    inv.inputs = {{"config", to_json(d.config)},
                  {"ladder", ladder_json(d.ladder)},
                  {"throughput_mode", to_string(d.analytic.throughput)},
                  {"queue_depth", d.analytic.queue_depth},
                  {"tile_accounting", to_string(d.accounting)}};
    const auto row = analyze(d.config, d.ladder, d.analytic, d.accounting);
    if (a.common.format == "csv") {
        emit_csv(inv, table_csv_header() + "\n" + table_csv_row(row) + "\n", a.common.out, out, err);
    } else {
        json body{{"config", to_json(d.config)},
                  {"ladder", ladder_json(d.ladder)},
                  {"zero_load", row.zero_load},
                  {"amat", row.amat},
                  {"throughput", row.throughput},
                  {"total_complexity", row.complexity.total_complexity},
                  {"critical_complexity", row.complexity.critical_complexity},
                  {"critical_comb_delay", row.complexity.critical_comb_delay},
                  {"throughput_mode", to_string(d.analytic.throughput)},
                  {"tile_accounting", to_string(d.accounting)},
                  {"complexity", to_json(row.complexity)},
                  {"estimate", to_json(row.estimate)},
                  {"reference", reference_json(row)}};
        emit_json(inv, body, a.common, out);
    }
    if (!row.converged) {
        err << "error: contention fixed point did not converge for " << d.config.label() << '\n';
        return exit_model;
    }
    return exit_ok;
}

// ---- sweep ----

struct SweepArgs {
    Common common;
    std::string bounds;
    std::uint32_t total_pes = 1024;
    unsigned threads = 0;
    std::string throughput_mode;
    std::string accounting;
};

std::vector<std::uint32_t> u32_list(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) return {};
    try {
        return j.at(key).get<std::vector<std::uint32_t>>();
    } catch (const nlohmann::json::exception&) {
        throw InputError(std::string("bounds key '") + key + "' must be a list of integers");
    }
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    Invocation inv{"sweep"};
    LevelBounds bounds;
    std::uint32_t total = a.total_pes;
    std::uint32_t bf = a.common.banking_factor;
    std::uint32_t bank_words = 256;
    nlohmann::json source = nlohmann::json::object();
    if (!a.bounds.empty()) {
        source = read_json_file(a.bounds);
        if (!source.is_object()) throw InputError("bounds must be a JSON object");
        static const char* known[] = {"total_pes", "banking_factor", "bank_words", "pes_per_tile",
                                      "tiles_per_subgroup", "subgroups_per_group", "groups", "min_levels",
                                      "max_levels", "name", "comment"};
        for (const auto& [key, _] : source.items())
            if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
                throw InputError("unknown bounds key '" + key + "'");
        try {
            total = source.value("total_pes", total);
            bf = source.value("banking_factor", bf);
            bank_words = source.value("bank_words", bank_words);
            bounds.min_levels = source.value("min_levels", bounds.min_levels);
            bounds.max_levels = source.value("max_levels", bounds.max_levels);
        } catch (const nlohmann::json::exception&) {
            throw InputError("bounds keys have the wrong type");
        }
        bounds.pes_per_tile = u32_list(source, "pes_per_tile");
        bounds.tiles_per_subgroup = u32_list(source, "tiles_per_subgroup");
        bounds.subgroups_per_group = u32_list(source, "subgroups_per_group");
        bounds.groups = u32_list(source, "groups");
    }
    AmatOptions opt;
    if (!a.throughput_mode.empty()) opt.throughput = parse_throughput_mode(a.throughput_mode);
    const TileAccounting acc =
        a.accounting.empty() ? TileAccounting::with_remote_ports : parse_accounting(a.accounting);
    auto configs = enumerate_hierarchies(total, bf, bounds);
    for (auto& c : configs) c.bank_words = bank_words;
    inv.inputs = {{"bounds", source},
                  {"total_pes", total},
                  {"banking_factor", bf},
                  {"throughput_mode", to_string(opt.throughput)},
                  {"tile_accounting", to_string(acc)}};
    if (configs.empty()) err << "warning: the bounds admit no hierarchy\n";
    const auto rows = sweep(configs, a.threads, opt, acc);
    bool converged = true;
    for (const auto& r : rows) converged = converged && r.converged;
    if (a.common.format == "json") {
        json list = json::array();
        for (const auto& r : rows)
            list.push_back({{"hierarchy", r.config.label()},
                            {"zero_load", r.zero_load},
                            {"amat", r.amat},
                            {"throughput", r.throughput},
                            {"total_complexity", r.complexity.total_complexity},
                            {"critical_complexity", r.complexity.critical_complexity},
                            {"critical_comb_delay", r.complexity.critical_comb_delay},
                            {"ladder", ladder_json(r.ladder)},
                            {"converged", r.converged},
                            {"reference", reference_json(r)}});
        emit_json(inv, json{{"rows", list}}, a.common, out);
    } else {
        std::string text = table_csv_header() + "\n";
        for (const auto& r : rows) text += table_csv_row(r) + "\n";
        emit_csv(inv, text, a.common.out, out, err);
    }
    if (!converged) {
        err << "error: some configurations did not converge\n";
        return exit_model;
    }
    return exit_ok;
}

// ---- simulate / trace ----

struct PatternArgs {
    std::string pattern = "uniform";
    double rate = 1.0;
    std::uint64_t seed = 1;
    std::uint32_t matrix_dim = 32;
    std::uint32_t fft_points = 4096;
    std::uint32_t fft_stage = 0;
    std::uint32_t csr_rows = 64;
    std::uint32_t csr_nnz = 8;
    std::string trace;
    std::int64_t seq_region = -2;  // -2: take from config
    std::string layout;
};

void add_pattern(CLI::App* app, PatternArgs& p) {
    app->add_option("--pattern", p.pattern, "uniform, local_tile, gemm_tiled, fft_radix4, csr_spmmadd or trace");
    app->add_option("--rate", p.rate, "injection probability per PE per cycle");
    app->add_option("--seed", p.seed, "random seed");
    app->add_option("--matrix-dim", p.matrix_dim, "GEMM matrix dimension");
    app->add_option("--fft-points", p.fft_points, "FFT length");
    app->add_option("--fft-stage", p.fft_stage, "FFT stage");
    app->add_option("--csr-rows", p.csr_rows, "CSR rows per PE");
    app->add_option("--csr-nnz", p.csr_nnz, "CSR nonzeros per row");
    app->add_option("--trace", p.trace, "JSONL trace for --pattern trace");
    app->add_option("--seq-region", p.seq_region, "sequential region size in bytes");
    app->add_option("--layout", p.layout, "bank_fastest or tile_fastest");
}

AccessPattern to_pattern(const PatternArgs& a) {
    AccessPattern p;
    p.kind = parse_pattern(a.pattern);
    p.p = a.rate;
    p.seed = a.seed;
    p.matrix_dim = a.matrix_dim;
    p.fft_points = a.fft_points;
    p.fft_stage = a.fft_stage;
    p.csr_rows = a.csr_rows;
    p.csr_nnz_per_row = a.csr_nnz;
    p.trace_path = a.trace;
    if (!(p.p >= 0.0 && p.p <= 1.0)) throw InputError("--rate must lie in [0, 1]");
    if (p.kind == PatternKind::trace && p.trace_path.empty()) throw InputError("--pattern trace needs --trace");
    return p;
}

json pattern_json(const AccessPattern& p) {
    json j{{"kind", to_string(p.kind)}, {"rate", p.p}, {"seed", p.seed}};
    switch (p.kind) {
        case PatternKind::gemm_tiled:
            j["matrix_dim"] = p.matrix_dim;
            break;
        case PatternKind::fft_radix4:
            j["fft_points"] = p.fft_points;
            j["fft_stage"] = p.fft_stage;
            break;
        case PatternKind::csr_spmmadd:
            j["csr_rows"] = p.csr_rows;
            j["csr_nnz_per_row"] = p.csr_nnz_per_row;
            break;
        case PatternKind::trace:
            j["trace"] = p.trace_path;
            break;
        default:
            break;
    }
    return j;
}

bool finite(PatternKind k) { return k != PatternKind::uniform && k != PatternKind::local_tile; }

AddressMap make_map(const ConfigDocument& d, const PatternArgs& a) {
    const std::int64_t seq = a.seq_region == -2 ? d.seq_region_bytes : a.seq_region;
    const BankLayout layout = a.layout.empty() ? d.layout : parse_layout(a.layout);
    return AddressMap(d.config, seq, layout);
}

struct SimulateArgs {
    Common common;
    PatternArgs pattern;
    std::uint64_t cycles = 20000;
    std::optional<std::uint64_t> warmup;
    bool check = false;
    std::string histogram;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    Invocation inv{"simulate"};
    const auto d = resolve(a.common);
    const auto pattern = to_pattern(a.pattern);
    const auto map = make_map(d, a.pattern);
    SimOptions so = d.sim;
    if (a.warmup) so.warmup = *a.warmup;
    else if (finite(pattern.kind)) so.warmup = 0;
    so.check_invariants = a.check;
    inv.seed = pattern.seed;
    inv.inputs = {{"config", to_json(d.config)},
                  {"ladder", ladder_json(d.ladder)},
                  {"pattern", pattern_json(pattern)},
                  {"cycles", a.cycles},
                  {"warmup", so.warmup},
                  {"table_depth", so.table_depth},
                  {"input_queue_depth", d.fabric.input_queue_depth},
                  {"spill_depth", d.fabric.spill_depth},
                  {"seq_region_bytes", map.seq_region_bytes()},
                  {"bank_layout", to_string(map.layout())}};
    const auto fabric = build_fabric(d.config, d.ladder, d.fabric);
    auto source = make_source(map, pattern);
    const SimStats stats = finite(pattern.kind) ? run_to_completion(fabric, map, *source, a.cycles, so)
                                                : run(fabric, map, *source, a.cycles, so);
    if (!a.histogram.empty()) {
        std::ofstream h(a.histogram);
        if (!h) throw InputError("cannot write '" + a.histogram + "'");
        write_histogram_csv(h, stats);
    }
    if (a.common.format == "csv") {
        std::ostringstream s;
        s << "hierarchy,pattern,cycles,issued,completed,amat,throughput,stall_lsu_full,stall_raw,stall_contention,"
             "finished\n"
          << d.config.label() << ',' << to_string(pattern.kind) << ',' << stats.cycles << ',' << stats.issued << ','
          << stats.completed << ',' << csv_number(stats.amat) << ',' << csv_number(stats.throughput) << ','
          << csv_number(stats.stall_lsu_full) << ',' << csv_number(stats.stall_raw) << ','
          << csv_number(stats.stall_contention) << ',' << (stats.finished ? "true" : "false") << '\n';
        emit_csv(inv, s.str(), a.common.out, out, err);
    } else {
        json body{{"config", to_json(d.config)},
                  {"ladder", ladder_json(d.ladder)},
                  {"pattern", pattern_json(pattern)},
                  {"spill_placement", to_json(fabric.spill_placement())},
                  {"stats", to_json(stats)}};
        if (pattern.kind == PatternKind::uniform) {
            const auto est = cluster_amat(d.config, d.ladder, pattern.p, d.analytic);
            body["analytic"] = {{"amat", est.t_cluster},
                                {"throughput", est.throughput},
                                {"amat_relative_error", est.t_cluster > 0 ? (stats.amat - est.t_cluster) / est.t_cluster : 0.0}};
        }
        emit_json(inv, body, a.common, out);
    }
    if (stats.invariant_violations > 0) {
        err << "error: " << stats.invariant_violations << " invariant violations, first: " << stats.first_violation
            << '\n';
        return exit_model;
    }
    return exit_ok;
}

struct TraceArgs {
    Common common;
    PatternArgs pattern;
    std::uint64_t cycles = 1000;
};

int cmd_trace(const TraceArgs& a, std::ostream& out, std::ostream& err) {
    Invocation inv{"trace"};
    const auto d = resolve(a.common);
    const auto p = to_pattern(a.pattern);
    const auto map = make_map(d, a.pattern);
    inv.seed = p.seed;
    inv.inputs = {{"config", to_json(d.config)}, {"pattern", pattern_json(p)}, {"cycles", a.cycles}};
    Trace t;
    switch (p.kind) {
        case PatternKind::uniform:
            t = gen_uniform(map, p.p, p.seed, a.cycles);
            break;
        case PatternKind::local_tile:
            t = gen_local_tile(map, p.p, p.seed, a.cycles);
            break;
        case PatternKind::gemm_tiled:
            t = gen_gemm_tiled(map, p.matrix_dim, p.p);
            break;
        case PatternKind::fft_radix4:
            t = gen_fft_radix4(map, p.fft_points, p.fft_stage);
            break;
        case PatternKind::csr_spmmadd:
            t = gen_csr_spmmadd(map, p.csr_rows, p.csr_nnz_per_row, p.seed);
            break;
        case PatternKind::trace:
            throw InputError("trace generation needs a synthetic pattern");
    }
    std::ostringstream s;
    write_trace_jsonl(s, t);
    emit_csv(inv, s.str(), a.common.out, out, err);
    return exit_ok;
}

// ---- transfer ----

struct TransferArgs {
    Common common;
    std::string scenario;
    bool matrix = false;
    std::string clocks = "500,600,700,800,900";
    std::string pin_rates = "2.8,3.2,3.6";
    std::uint64_t bytes = 8ull << 20;
    std::string kind = "round_trip";
};

TransferScenario parse_scenario(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("a transfer scenario must be a JSON object");
    static const char* known[] = {"name", "clock_mhz", "pin_rate_gbps", "bytes", "kind", "refresh_fraction",
                                  "frontend_cycles", "comment"};
    for (const auto& [key, _] : j.items())
        if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
            throw InputError("unknown scenario key '" + key + "'");
    TransferScenario s;
    try {
        s.name = j.value("name", s.name);
        s.clock_mhz = j.value("clock_mhz", s.clock_mhz);
        s.pin_rate_gbps = j.value("pin_rate_gbps", s.pin_rate_gbps);
        s.bytes = j.value("bytes", s.bytes);
        s.kind = parse_scenario_kind(j.value("kind", std::string("round_trip")));
        s.refresh_fraction = j.value("refresh_fraction", s.refresh_fraction);
        s.frontend_cycles = j.value("frontend_cycles", s.frontend_cycles);
    } catch (const nlohmann::json::exception&) {
        throw InputError("scenario keys have the wrong type");
    }
    return s;
}

struct TransferRow {
    std::string name;
    std::string kind;
    double clock_mhz;
    double pin_rate_gbps;
    double peak_gbps;
    double link_gbps;
    TransferStats stats;
};

int cmd_transfer(const TransferArgs& a, std::ostream& out, std::ostream& err) {
    Invocation inv{"transfer"};
    Common target = a.common;
    if (target.config.empty() && target.label.empty()) target.label = "8C-8T-4SG-4G";
    const auto d = resolve(target);
    std::vector<TransferRow> rows;
    nlohmann::json inputs{{"config", to_json(d.config)}};
    auto add_row = [&](const TransferScenario& s, const TransferStats& st) {
        HbmConfig h;
        h.clock_mhz = s.clock_mhz;
        h.pin_rate_gbps = s.pin_rate_gbps;
        rows.push_back({s.name, to_string(s.kind), s.clock_mhz, s.pin_rate_gbps, h.peak_gbps(), link_ceiling(h), st});
    };
    if (a.matrix) {
        if (!a.scenario.empty()) throw InputError("--matrix and --scenario are mutually exclusive");
        TransferScenario base;
        base.bytes = a.bytes;
        base.kind = parse_scenario_kind(a.kind);
        const auto clocks = parse_list(a.clocks);
        const auto rates = parse_list(a.pin_rates);
        inputs["matrix"] = {{"clocks_mhz", clocks}, {"pin_rates_gbps", rates}, {"bytes", base.bytes},
                            {"kind", to_string(base.kind)}};
        for (const auto& p : bandwidth_matrix(clocks, rates, d.config, base)) {
            TransferScenario s = base;
            s.clock_mhz = p.clock_mhz;
            s.pin_rate_gbps = p.pin_rate_gbps;
            char name[64];
            std::snprintf(name, sizeof name, "%gMHz@%gGbps", p.clock_mhz, p.pin_rate_gbps);
            s.name = name;
            add_row(s, p.stats);
        }
    } else {
        if (a.scenario.empty()) throw InputError("transfer needs --scenario FILE or --matrix");
        const auto doc = read_json_file(a.scenario);
        inputs["scenario"] = doc;
        nlohmann::json list;
        if (doc.is_array()) list = doc;
        else if (doc.is_object() && doc.contains("scenarios")) list = doc.at("scenarios");
        else list = nlohmann::json::array({doc});
        if (!list.is_array()) throw InputError("'scenarios' must be a list");
        if (list.empty()) err << "warning: no transfer scenarios\n";
        for (const auto& item : list) {
            const auto s = parse_scenario(item);
            add_row(s, run_scenario(s, d.config));
        }
    }
    inv.inputs = inputs;
    if (a.common.format == "json") {
        json list = json::array();
        for (const auto& r : rows) {
            json j{{"name", r.name},       {"kind", r.kind},         {"clock_mhz", r.clock_mhz},
                   {"pin_rate_gbps", r.pin_rate_gbps}, {"peak_gbps", r.peak_gbps}, {"link_ceiling_gbps", r.link_gbps}};
            for (auto& [k, v] : to_json(r.stats).items()) j[k] = v;
            list.push_back(j);
        }
        emit_json(inv, json{{"config", to_json(d.config)}, {"transfers", list}}, a.common, out);
    } else {
        std::ostringstream s;
        s << "name,kind,clock_mhz,pin_rate_gbps,bytes,cycles,achieved_gbps,peak_gbps,link_ceiling_gbps,"
             "hbm_utilization,link_utilization\n";
        for (const auto& r : rows)
            s << csv_field(r.name) << ',' << r.kind << ',' << csv_number(r.clock_mhz) << ','
              << csv_number(r.pin_rate_gbps) << ',' << r.stats.bytes << ',' << r.stats.cycles << ','
              << csv_number(r.stats.achieved_gbps) << ',' << csv_number(r.peak_gbps) << ','
              << csv_number(r.link_gbps) << ',' << csv_number(r.stats.hbm_utilization) << ','
              << csv_number(r.stats.link_utilization) << '\n';
        emit_csv(inv, s.str(), a.common.out, out, err);
    }
    return exit_ok;
}

// ---- scaling ----

struct ScalingArgs {
    Common common;
    std::string params;
    std::string scales;
};

int cmd_scaling(const ScalingArgs& a, std::ostream& out, std::ostream& err) {
    Invocation inv{"scaling"};
    if (a.params.empty()) throw InputError("scaling needs --params FILE");
    const auto j = read_json_file(a.params);
    if (!j.is_object()) throw InputError("scaling parameters must be a JSON object");
    static const char* known[] = {"latency", "tile_words", "bandwidth", "intensity", "pes", "utilization",
                                  "scale", "scales", "gemm_intensity", "name", "comment"};
    for (const auto& [key, _] : j.items())
        if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
            throw InputError("unknown scaling key '" + key + "'");
    ScalingParams p;
    std::vector<double> scales{1.0};
    bool gemm = false;
    try {
        p.latency = j.value("latency", p.latency);
        p.tile_words = j.value("tile_words", p.tile_words);
        p.bandwidth = j.value("bandwidth", p.bandwidth);
        p.pes = j.value("pes", p.pes);
        p.utilization = j.value("utilization", p.utilization);
        p.scale = j.value("scale", p.scale);
        gemm = j.value("gemm_intensity", false);
        p.intensity = gemm ? matmul_arithmetic_intensity(p.tile_words) : j.value("intensity", p.intensity);
        scales = j.value("scales", scales);
    } catch (const nlohmann::json::exception&) {
        throw InputError("scaling keys have the wrong type");
    }
    if (!a.scales.empty()) scales = parse_list(a.scales);
    inv.inputs = {{"params", j}, {"scales", scales}};
    json list = json::array();
    std::ostringstream csv;
    csv << "factor,scale,latency,tile_words,bandwidth,intensity,pes,utilization,lhs,rhs,slack,feasible\n";
    for (double s : scales) {
        const auto q = scaled(p, s);
        const auto f = kung_feasible(q);
        list.push_back({{"factor", s}, {"params", to_json(q)}, {"feasibility", to_json(f)}});
        csv << csv_number(s) << ',' << csv_number(q.scale) << ',' << csv_number(q.latency) << ','
            << csv_number(q.tile_words) << ',' << csv_number(q.bandwidth) << ',' << csv_number(q.intensity) << ','
            << csv_number(q.pes) << ',' << csv_number(q.utilization) << ',' << csv_number(f.lhs, 9) << ','
            << csv_number(f.rhs, 9) << ',' << csv_number(f.slack, 9) << ',' << (f.feasible ? "true" : "false")
            << '\n';
    }
    if (a.common.format == "csv") emit_csv(inv, csv.str(), a.common.out, out, err);
    else emit_json(inv, json{{"base", to_json(p)}, {"points", list}}, a.common, out);
    return exit_ok;
}

// ---- addrmap / probe ----

struct AddrmapArgs {
    Common common;
    PatternArgs map;
    std::uint64_t start = 0;
    std::uint64_t count = 64;
};

int cmd_addrmap(const AddrmapArgs& a, std::ostream& out, std::ostream& err) {
    Invocation inv{"addrmap"};
    const auto d = resolve(a.common);
    const auto map = make_map(d, a.map);
    if (a.count > (1u << 20)) throw InputError("--count is limited to 1048576 words");
    if (a.start % AddressMap::word_bytes) throw InputError("--start must be word aligned");
    inv.inputs = {{"config", to_json(d.config)},
                  {"seq_region_bytes", map.seq_region_bytes()},
                  {"bank_layout", to_string(map.layout())},
                  {"start", a.start},
                  {"count", a.count}};
    std::ostringstream csv;
    csv << "address,region,group,subgroup,tile,bank,row,global_bank\n";
    json list = json::array();
    for (std::uint64_t i = 0; i < a.count; ++i) {
        const std::uint64_t addr = a.start + i * AddressMap::word_bytes;
        const auto m = map.map(addr);
        const auto& c = m.coord;
        const char* region = m.region == Region::sequential ? "sequential" : "interleaved";
        if (a.common.format == "csv")
            csv << addr << ',' << region << ',' << c.group << ',' << c.subgroup << ',' << c.tile << ',' << c.bank
                << ',' << c.row << ',' << map.global_bank(c) << '\n';
        else
            list.push_back({{"address", addr}, {"region", region}, {"group", c.group}, {"subgroup", c.subgroup},
                            {"tile", c.tile}, {"bank", c.bank}, {"row", c.row}, {"global_bank", map.global_bank(c)}});
    }
    if (a.common.format == "csv") emit_csv(inv, csv.str(), a.common.out, out, err);
    else
        emit_json(inv,
                  json{{"config", to_json(d.config)},
                       {"l1_bytes", map.l1_bytes()},
                       {"seq_region_bytes", map.seq_region_bytes()},
                       {"stripe_words", map.stripe_words()},
                       {"words", list}},
                  a.common, out);
    return exit_ok;
}

int cmd_probe(const Common& c, std::ostream& out) {
    Invocation inv{"probe"};
    const auto d = resolve(c);
    inv.inputs = {{"config", to_json(d.config)},
                  {"ladder", ladder_json(d.ladder)},
                  {"spill_depth", d.fabric.spill_depth},
                  {"input_queue_depth", d.fabric.input_queue_depth}};
    const auto fabric = build_fabric(d.config, d.ladder, d.fabric);
    const auto measured = measure_zero_load(fabric);
    emit_json(inv,
              json{{"config", to_json(d.config)},
                   {"ladder", ladder_json(d.ladder)},
                   {"measured_zero_load", measured},
                   {"spill_placement", to_json(fabric.spill_placement())},
                   {"buffers", fabric.buffers().size()},
                   {"arbiters", fabric.arbiters().size()}},
              c, out);
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hierarchical crossbar scaling toolkit", "xbar-scale"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version());

    std::function<int()> action;

    AnalyzeArgs an;
    auto* analyze_cmd = app.add_subcommand("analyze", "closed-form latency, throughput and complexity of one hierarchy");
    add_target(analyze_cmd, an.common);
    add_output(analyze_cmd, an.common, "json");
    analyze_cmd->add_option("--throughput-mode", an.throughput_mode, "pipeline_hidden, weighted or bottleneck");
    analyze_cmd->add_option("--accounting", an.accounting, "with_remote_ports or pe_inputs_only");
    analyze_cmd->callback([&] { action = [&] { return cmd_analyze(an, out, err); }; });

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "enumerate hierarchies and rank them by AMAT");
    sweep_cmd->add_option("--bounds", sw.bounds, "level bounds (JSON)");
    sweep_cmd->add_option("--total-pes", sw.total_pes, "PE count when no bounds file sets it");
    sweep_cmd->add_option("--banking-factor", sw.common.banking_factor, "banks per PE");
    sweep_cmd->add_option("--threads", sw.threads, "worker threads (default XBAR_SCALE_THREADS or all cores)");
    sweep_cmd->add_option("--throughput-mode", sw.throughput_mode, "pipeline_hidden, weighted or bottleneck");
    sweep_cmd->add_option("--accounting", sw.accounting, "with_remote_ports or pe_inputs_only");
    add_output(sweep_cmd, sw.common, "csv");
    sweep_cmd->callback([&] { action = [&] { return cmd_sweep(sw, out, err); }; });

    SimulateArgs si;
    auto* sim_cmd = app.add_subcommand("simulate", "cycle-level fabric simulation");
    add_target(sim_cmd, si.common);
    add_pattern(sim_cmd, si.pattern);
    add_output(sim_cmd, si.common, "json");
    sim_cmd->add_option("--cycles", si.cycles, "simulated cycles (upper bound for finite patterns)");
    sim_cmd->add_option("--warmup", si.warmup, "cycles excluded from statistics");
    sim_cmd->add_flag("--check", si.check, "verify conservation, fairness and bank exclusivity every cycle");
    sim_cmd->add_option("--histogram", si.histogram, "write the latency histogram CSV here");
    sim_cmd->callback([&] { action = [&] { return cmd_simulate(si, out, err); }; });

    TraceArgs tr;
    auto* trace_cmd = app.add_subcommand("trace", "write a synthetic workload as a JSONL trace");
    add_target(trace_cmd, tr.common);
    add_pattern(trace_cmd, tr.pattern);
    trace_cmd->add_option("--out", tr.common.out, "output file (default stdout)");
    trace_cmd->add_option("--cycles", tr.cycles, "cycles covered by endless patterns");
    trace_cmd->callback([&] { action = [&] { return cmd_trace(tr, out, err); }; });

    TransferArgs tx;
    auto* transfer_cmd = app.add_subcommand("transfer", "DMA transfers between L1 and HBM");
    add_target(transfer_cmd, tx.common);
    transfer_cmd->add_option("--scenario", tx.scenario, "transfer scenarios (JSON)");
    transfer_cmd->add_flag("--matrix", tx.matrix, "sweep cluster clock against pin rate");
    transfer_cmd->add_option("--clocks", tx.clocks, "cluster clocks in MHz for --matrix");
    transfer_cmd->add_option("--pin-rates", tx.pin_rates, "HBM pin rates in Gb/s for --matrix");
    transfer_cmd->add_option("--bytes", tx.bytes, "bytes per --matrix point");
    transfer_cmd->add_option("--kind", tx.kind, "round_trip, l2_to_l1 or l1_to_l2");
    add_output(transfer_cmd, tx.common, "csv");
    transfer_cmd->callback([&] { action = [&] { return cmd_transfer(tx, out, err); }; });

    ScalingArgs sc;
    auto* scaling_cmd = app.add_subcommand("scaling", "compute-versus-transfer feasibility as the cluster grows");
    scaling_cmd->add_option("--params", sc.params, "scaling parameters (JSON)");
    scaling_cmd->add_option("--scales", sc.scales, "growth factors, e.g. 1,2,4,8");
    add_output(scaling_cmd, sc.common, "json");
    scaling_cmd->callback([&] { action = [&] { return cmd_scaling(sc, out, err); }; });

    AddrmapArgs am;
    auto* addr_cmd = app.add_subcommand("addrmap", "dump byte address to bank coordinates");
    add_target(addr_cmd, am.common);
    addr_cmd->add_option("--seq-region", am.map.seq_region, "sequential region size in bytes");
    addr_cmd->add_option("--layout", am.map.layout, "bank_fastest or tile_fastest");
    addr_cmd->add_option("--start", am.start, "first byte address");
    addr_cmd->add_option("--count", am.count, "number of words");
    add_output(addr_cmd, am.common, "csv");
    addr_cmd->callback([&] { action = [&] { return cmd_addrmap(am, out, err); }; });

    Common pr;
    auto* probe_cmd = app.add_subcommand("probe", "measure zero-load latency per class on the simulator");
    add_target(probe_cmd, pr);
    probe_cmd->add_option("--out", pr.out, "output file (default stdout)");
    probe_cmd->callback([&] { action = [&] { return cmd_probe(pr, out); }; });

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << tool_version() << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    }
    try {
        return action ? action() : exit_input;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << '\n';
        return exit_model;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, out, err);
}

}  // namespace xbarscale
