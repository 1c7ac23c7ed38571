#include "xbarscale/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>

#include "xbarscale/io.hpp"

namespace xbarscale {

AnalysisRow analyze(const HierarchyConfig& config, const LatencyLadder& ladder, const AmatOptions& options,
                    TileAccounting accounting) {
    AnalysisRow r;
    r.config = validate(config);
    r.ladder = ladder;
    r.zero_load = zero_load_latency(r.config, ladder);
    r.estimate = cluster_amat(r.config, ladder, 1.0, options);
    r.amat = r.estimate.t_cluster;
    r.throughput = r.estimate.throughput;
    r.converged = r.estimate.converged;
    r.complexity = complexity_metrics(r.config, accounting);
    return r;
}

unsigned sweep_threads() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("XBAR_SCALE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
    }
    return hw;
}

std::vector<AnalysisRow> sweep(const std::vector<HierarchyConfig>& configs, unsigned threads,
                               const AmatOptions& options, TileAccounting accounting) {
    std::vector<AnalysisRow> rows(configs.size());
    if (threads == 0) threads = sweep_threads();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(configs.size(), 1))));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](unsigned id) {
        try {
            for (std::size_t i = next++; i < configs.size(); i = next++)
                rows[i] = analyze(configs[i], default_ladder(configs[i]), options, accounting);
        } catch (...) {
            errors[id] = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::sort(rows.begin(), rows.end(), [](const AnalysisRow& a, const AnalysisRow& b) {
        if (a.amat != b.amat) return a.amat < b.amat;
        return a.config.label() < b.config.label();
    });
    return rows;
}

const std::vector<ReferenceRow>& reference_rows() {
    static const std::vector<ReferenceRow> rows = {
        {"1024C", 1.000, 1.130, 0.885, 4194304, 4194304, 22},
        {"4C-256T", 2.992, 6.081, 0.245, 87040, 65536, 16},
        {"8C-128T", 2.984, 10.075, 0.124, 54272, 16384, 14},
        {"16C-64T", 2.969, 18.077, 0.062, 74752, 4096, 12},
        {"4C-16T-16G", 4.867, 5.318, 0.431, 163840, 320, 8.3},
        {"4C-32T-8G", 4.742, 5.443, 0.409, 122880, 1024, 10},
        {"8C-16T-8G", 4.734, 5.794, 0.358, 90112, 512, 9},
        {"8C-32T-4G", 4.484, 6.676, 0.272, 69632, 1024, 10},
        {"16C-8T-8G", 4.719, 6.669, 0.273, 110592, 1536, 10.6},
        {"16C-16T-4G", 4.469, 8.612, 0.178, 90112, 1280, 10.3},
        {"4C-16T-4SG-4G", 6.367, 8.457, 0.270, 121856, 4096, 12},
        {"8C-8T-4SG-4G", 6.359, 9.198, 0.230, 89088, 1024, 10},
        {"16C-4T-4SG-4G", 6.344, 11.049, 0.159, 109568, 1536, 10.6},
    };
    return rows;
}

std::optional<ReferenceRow> find_reference(const std::string& label) {
    for (const auto& r : reference_rows())
        if (label == r.label) return r;
    return std::nullopt;
}

std::string table_csv_header() {
    return "hierarchy,zero_load,amat,throughput,total_complexity,critical_complexity,critical_comb_delay,ladder,"
           "converged";
}

std::string table_csv_row(const AnalysisRow& r) {
    std::string ladder;
    for (std::size_t i = 0; i < r.ladder.size(); ++i) ladder += (i ? "-" : "") + std::to_string(r.ladder[i]);
    return r.config.label() + "," + csv_number(r.zero_load, 6) + "," + csv_number(r.amat, 6) + "," +
           csv_number(r.throughput, 6) + "," + std::to_string(r.complexity.total_complexity) + "," +
           std::to_string(r.complexity.critical_complexity) + "," + csv_number(r.complexity.critical_comb_delay, 4) +
           "," + ladder + "," + (r.converged ? "true" : "false");
}

}  // namespace xbarscale
