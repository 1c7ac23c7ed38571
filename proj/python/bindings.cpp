#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "xbarscale/addrmap.hpp"
#include "xbarscale/analytic.hpp"
#include "xbarscale/cli.hpp"
#include "xbarscale/error.hpp"
#include "xbarscale/fabric.hpp"
#include "xbarscale/hbml.hpp"
#include "xbarscale/io.hpp"
#include "xbarscale/sweep.hpp"
#include "xbarscale/workloads.hpp"

namespace py = pybind11;
using namespace xbarscale;

namespace {

py::object to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null:
            return py::none();
        case json::value_t::boolean:
            return py::bool_(j.get<bool>());
        case json::value_t::number_integer:
            return py::int_(j.get<std::int64_t>());
        case json::value_t::number_unsigned:
            return py::int_(j.get<std::uint64_t>());
        case json::value_t::number_float:
            return py::float_(j.get<double>());
        case json::value_t::string:
            return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list l;
            for (const auto& v : j) l.append(to_py(v));
            return l;
        }
        default: {
            py::dict d;
            for (auto it = j.begin(); it != j.end(); ++it) d[py::str(it.key())] = to_py(it.value());
            return d;
        }
    }
}

struct Target {
    HierarchyConfig config;
    LatencyLadder ladder;
};

Target target(const std::string& label, const std::optional<LatencyLadder>& ladder, std::uint32_t banking_factor) {
    Target t;
    t.config = validate(parse_label(label, banking_factor));
    t.ladder = ladder ? *ladder : default_ladder(t.config);
    check_ladder(t.config, t.ladder);
    return t;
}

py::dict analyze_py(const std::string& label, const std::optional<LatencyLadder>& ladder, std::uint32_t bf,
                    const std::string& mode) {
    const auto t = target(label, ladder, bf);
    AmatOptions opt;
    opt.throughput = parse_throughput_mode(mode);
    const auto row = analyze(t.config, t.ladder, opt);
    py::dict d;
    d["config"] = to_py(to_json(row.config));
    d["ladder"] = row.ladder;
    d["zero_load"] = row.zero_load;
    d["amat"] = row.amat;
    d["throughput"] = row.throughput;
    d["converged"] = row.converged;
    d["complexity"] = to_py(to_json(row.complexity));
    d["estimate"] = to_py(to_json(row.estimate));
    return d;
}

py::dict simulate_py(const std::string& label, const std::optional<LatencyLadder>& ladder, std::uint32_t bf,
                     const std::string& pattern, double rate, std::uint64_t seed, std::uint64_t cycles,
                     std::optional<std::uint64_t> warmup, bool check) {
    const auto t = target(label, ladder, bf);
    const auto fabric = build_fabric(t.config, t.ladder);
    const AddressMap map(t.config);
    AccessPattern pat;
    pat.kind = parse_pattern(pattern);
    pat.p = rate;
    pat.seed = seed;
    const bool endless = pat.kind == PatternKind::uniform || pat.kind == PatternKind::local_tile;
    SimOptions so;
    so.warmup = warmup ? *warmup : (endless ? 1000 : 0);
    so.check_invariants = check;
    auto src = make_source(map, pat);
    SimStats s;
    {
        py::gil_scoped_release release;
        s = endless ? run(fabric, map, *src, cycles, so) : run_to_completion(fabric, map, *src, cycles, so);
    }
    return to_py(to_json(s));
}

py::dict transfer_py(const std::string& label, double clock, double pins, std::uint64_t bytes,
                     const std::string& kind) {
    TransferScenario sc;
    sc.clock_mhz = clock;
    sc.pin_rate_gbps = pins;
    sc.bytes = bytes;
    sc.kind = parse_scenario_kind(kind);
    const auto st = run_scenario(sc, validate(parse_label(label)));
    auto d = to_py(to_json(st)).cast<py::dict>();
    HbmConfig h;
    h.clock_mhz = clock;
    h.pin_rate_gbps = pins;
    d["peak_gbps"] = h.peak_gbps();
    d["link_ceiling_gbps"] = link_ceiling(h);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hierarchical crossbar interconnect models";
    m.attr("__version__") = tool_version();

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_RuntimeError);

    m.def(
        "parse_label",
        [](const std::string& label, std::uint32_t bf) { return to_py(to_json(validate(parse_label(label, bf)))); },
        py::arg("label"), py::arg("banking_factor") = 4);
    m.def(
        "zero_load",
        [](const std::string& label, const std::optional<LatencyLadder>& ladder, std::uint32_t bf) {
            const auto t = target(label, ladder, bf);
            return zero_load_latency(t.config, t.ladder);
        },
        py::arg("label"), py::arg("ladder") = std::nullopt, py::arg("banking_factor") = 4);
    m.def("analyze", &analyze_py, py::arg("label"), py::arg("ladder") = std::nullopt, py::arg("banking_factor") = 4,
          py::arg("throughput_mode") = "pipeline_hidden");
    m.def("arbiter_latency", &arbiter_latency_n_to_k, py::arg("n"), py::arg("k"), py::arg("p"));
    m.def(
        "reference_rows",
        [] {
            py::list out;
            for (const auto& r : reference_rows()) {
                py::dict d;
                d["label"] = r.label;
                d["zero_load"] = r.zero_load;
                d["amat"] = r.amat;
                d["throughput"] = r.throughput;
                d["total_complexity"] = r.total_complexity;
                d["critical_complexity"] = r.critical_complexity;
                d["critical_comb_delay"] = r.critical_comb_delay;
                out.append(d);
            }
            return out;
        });
    m.def("simulate", &simulate_py, py::arg("label"), py::arg("ladder") = std::nullopt, py::arg("banking_factor") = 4,
          py::arg("pattern") = "uniform", py::arg("rate") = 1.0, py::arg("seed") = 1, py::arg("cycles") = 20000,
          py::arg("warmup") = std::nullopt, py::arg("check") = false);
    m.def(
        "probe",
        [](const std::string& label, const std::optional<LatencyLadder>& ladder, std::uint32_t bf) {
            const auto t = target(label, ladder, bf);
            return measure_zero_load(build_fabric(t.config, t.ladder));
        },
        py::arg("label"), py::arg("ladder") = std::nullopt, py::arg("banking_factor") = 4);
    m.def("transfer", &transfer_py, py::arg("label") = "8C-8T-4SG-4G", py::arg("clock_mhz") = 900.0,
          py::arg("pin_rate_gbps") = 3.6, py::arg("bytes") = std::uint64_t(8) << 20, py::arg("kind") = "round_trip");
    m.def(
        "kung_feasible",
        [](double latency, double tile_words, double bandwidth, double intensity, double pes, double utilization,
           double scale) {
            return to_py(to_json(
                kung_feasible(ScalingParams{latency, tile_words, bandwidth, intensity, pes, utilization, scale})));
        },
        py::arg("latency"), py::arg("tile_words"), py::arg("bandwidth"), py::arg("intensity"), py::arg("pes"),
        py::arg("utilization") = 1.0, py::arg("scale") = 1.0);
    m.def(
        "map_address",
        [](const std::string& label, std::uint64_t address, std::int64_t seq_region) {
            const AddressMap map(validate(parse_label(label)), seq_region);
            const auto r = map.map(address);
            py::dict d;
            d["region"] = r.region == Region::sequential ? "sequential" : "interleaved";
            d["group"] = r.coord.group;
            d["subgroup"] = r.coord.subgroup;
            d["tile"] = r.coord.tile;
            d["bank"] = r.coord.bank;
            d["row"] = r.coord.row;
            d["global_bank"] = map.global_bank(r.coord);
            return d;
        },
        py::arg("label"), py::arg("address"), py::arg("seq_region") = -1);
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
