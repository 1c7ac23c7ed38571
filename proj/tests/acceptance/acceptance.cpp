#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "xbarscale/addrmap.hpp"
#include "xbarscale/analytic.hpp"
#include "xbarscale/fabric.hpp"
#include "xbarscale/hbml.hpp"
#include "xbarscale/sweep.hpp"
#include "xbarscale/topology.hpp"
#include "xbarscale/workloads.hpp"

using namespace xbarscale;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [miss: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs > budget_s) o.require(false, "runtime " + std::to_string(secs) + " s over budget");
    if (!o.pass) ++failures;
    std::printf("%s %2d %s (%.2f s):%s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.str().c_str());
    std::fflush(stdout);
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

HierarchyConfig desk() { return validate(parse_label("4C-4T-2SG-2G")); }

}  // namespace

int main() {
    criterion(1, "zero-load latency of the 13 reference rows", 1.0, [](Outcome& o) {
        double worst = 0.0;
        for (const auto& r : reference_rows()) {
            const auto c = validate(parse_label(r.label));
            const double z = zero_load_latency(c, default_ladder(c));
            worst = std::max(worst, std::abs(z - r.zero_load));
            o.require(std::abs(z - r.zero_load) <= 0.001 + 1e-12, std::string(r.label) + " zero-load " +
                                                                        std::to_string(z));
        }
        o.detail << " worst |delta| " << worst;
    });

    criterion(2, "flat 1024C AMAT and throughput", 1.0, [](Outcome& o) {
        const auto c = validate(parse_label("1024C"));
        const auto e = cluster_amat(c, default_ladder(c), 1.0);
        o.detail << " AMAT " << e.t_cluster << " throughput " << e.throughput;
        o.require(std::abs(e.t_cluster - 1.130) <= 0.005, "AMAT");
        o.require(std::abs(e.throughput - 0.885) <= 0.005, "throughput");
        o.require(std::abs(arbiter_latency_n_to_k(1024, 4096, 1.0) - 0.130) <= 0.005, "n-to-k at 1024x4096");
    });

    criterion(3, "hierarchical AMAT and throughput within 15% with family ordering", 10.0, [](Outcome& o) {
        double worst_a = 0.0, worst_t = 0.0;
        // family: same outer levels, varying the PE/tile split
        std::map<std::tuple<std::uint32_t, std::uint32_t, std::size_t>, std::vector<std::pair<ReferenceRow, AnalysisRow>>>
            families;
        for (const auto& r : reference_rows()) {
            const auto c = validate(parse_label(r.label));
            if (c.flat()) continue;
            const auto row = analyze(c, default_ladder(c));
            worst_a = std::max(worst_a, rel(row.amat, r.amat));
            worst_t = std::max(worst_t, rel(row.throughput, r.throughput));
            o.require(row.converged, std::string(r.label) + " did not converge");
            o.require(rel(row.amat, r.amat) <= 0.15, std::string(r.label) + " AMAT " + std::to_string(row.amat));
            o.require(rel(row.throughput, r.throughput) <= 0.15,
                      std::string(r.label) + " throughput " + std::to_string(row.throughput));
            families[{c.subgroups_per_group, c.groups, c.classes()}].push_back({r, row});
        }
        std::size_t pairs = 0;
        for (auto& [key, rows] : families) {
            std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first.amat < b.first.amat; });
            for (std::size_t i = 1; i < rows.size(); ++i) {
                ++pairs;
                const auto& lo = rows[i - 1];
                const auto& hi = rows[i];
                o.require(lo.second.amat < hi.second.amat,
                          std::string("AMAT order ") + lo.first.label + " < " + hi.first.label);
                o.require(lo.second.throughput > hi.second.throughput,
                          std::string("throughput order ") + lo.first.label + " > " + hi.first.label);
            }
        }
        o.detail << " worst AMAT error " << worst_a * 100 << "%, worst throughput error " << worst_t * 100 << "%, "
                 << pairs << " ordered pairs in " << families.size() << " families";
    });

    criterion(4, "complexity metrics", 1.0, [](Outcome& o) {
        struct Exact {
            const char* label;
            std::uint64_t critical;
            double delay;  // < 0: not checked
        };
        const Exact exact[] = {{"1024C", 4194304, 22}, {"4C-256T", 65536, -1}, {"8C-8T-4SG-4G", 1024, 10},
                               {"16C-4T-4SG-4G", 1536, -1}};
        for (const auto& e : exact) {
            const auto m = complexity_metrics(validate(parse_label(e.label)));
            o.require(m.critical_complexity == e.critical, std::string(e.label) + " critical " +
                                                               std::to_string(m.critical_complexity));
            if (e.delay >= 0) o.require(std::abs(m.critical_comb_delay - e.delay) < 1e-9, std::string(e.label) + " delay");
        }
        o.detail << " total-complexity deltas (with remote ports):";
        for (const auto& r : reference_rows()) {
            const auto m = complexity_metrics(validate(parse_label(r.label)));
            const long long d = static_cast<long long>(m.total_complexity) - static_cast<long long>(r.total_complexity);
            o.detail << " " << r.label << " " << (d >= 0 ? "+" : "") << d;
        }
    });

    criterion(5, "arbiter model against closed form and Monte Carlo", 30.0, [](Outcome& o) {
        auto closed_1 = [](std::uint32_t n, double p) { return n * p - 1.0 + std::pow(1.0 - p, n); };
        double worst = 0.0;
        for (std::uint32_t n = 1; n <= 256; ++n)
            for (std::uint32_t k = 1; k <= 256; ++k)
                for (double p : {0.01, 0.25, 0.5, 0.75, 1.0}) {
                    const double q = p / k;
                    const double e1 = closed_1(n, q);
                    const double p0 = std::pow(1.0 - q, n);
                    const double geo = p0 == 1.0 ? e1 * k : e1 * (1.0 - std::pow(p0, k)) / (1.0 - p0);
                    worst = std::max(worst, std::abs(arbiter_latency_n_to_k_recursive(n, k, p) - geo));
                    worst = std::max(worst, std::abs(arbiter_latency_n_to_k(n, k, p) - geo));
                }
        o.require(worst <= 1e-9, "recursion vs closed form");
        o.detail << " worst recursion delta " << worst;

        std::mt19937_64 rng(20240607);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const int trials = 100000;
        double worst_z = 0.0;
        for (std::uint32_t n = 1; n <= 16; ++n)
            for (double p : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
                double sum = 0.0, sq = 0.0;
                for (int t = 0; t < trials; ++t) {
                    int x = 0;
                    for (std::uint32_t i = 0; i < n; ++i) x += u(rng) < p;
                    const double wait = x > 0 ? x - 1.0 : 0.0;
                    sum += wait;
                    sq += wait * wait;
                }
                const double mean = sum / trials;
                const double sigma = std::sqrt(std::max(0.0, sq / trials - mean * mean) / trials);
                const double model = arbiter_latency_n_to_1(n, p);
                const double dev = std::abs(mean - model);
                if (sigma > 0) worst_z = std::max(worst_z, dev / sigma);
                o.require(dev <= 3.0 * sigma + 1e-12, "Monte Carlo n=" + std::to_string(n) + " p=" + std::to_string(p));
            }
        o.detail << ", worst Monte Carlo deviation " << worst_z << " sigma";
    });

    criterion(6, "desk-scale simulator against the analytic model", 120.0, [](Outcome& o) {
        const auto cfg = desk();
        const LatencyLadder ladder{1, 3, 5, 7};
        const auto fabric = build_fabric(cfg, ladder);
        const auto zl = measure_zero_load(fabric);
        o.require(zl == ladder, "measured zero-load ladder");
        const AddressMap map(cfg);
        auto src = uniform_source(map, 1.0, 1);
        SimOptions so;
        so.warmup = 1000;
        const auto s = run(fabric, map, *src, 51000, so);
        const auto e = cluster_amat(cfg, ladder, 1.0);
        o.detail << " zero-load " << zl[0] << "-" << zl[1] << "-" << zl[2] << "-" << zl[3] << ", simulated AMAT "
                 << s.amat << " vs model " << e.t_cluster << " (" << rel(s.amat, e.t_cluster) * 100
                 << "%), throughput " << s.throughput << " vs " << e.throughput << "; per class sim/model";
        for (std::size_t k = 0; k < s.classes.size(); ++k)
            o.detail << " " << s.classes[k].amat << "/" << e.classes[k].latency;
        o.require(s.measured_cycles >= 50000, "post-warmup window");
        o.require(rel(s.amat, e.t_cluster) <= 0.15, "AMAT within 15%");
    });

    criterion(7, "1024-PE simulation smoke", 600.0, [](Outcome& o) {
        const auto cfg = validate(parse_label("8C-8T-4SG-4G"));
        const auto fabric = build_fabric(cfg, default_ladder(cfg));
        const AddressMap map(cfg);
        SimOptions so;
        so.check_invariants = true;
        auto a = uniform_source(map, 1.0, 42);
        const auto sa = run(fabric, map, *a, 10000, so);
        auto b = uniform_source(map, 1.0, 42);
        const auto sb = run(fabric, map, *b, 10000, so);
        o.require(sa == sb, "identical statistics on rerun");
        o.require(sa.invariant_checks >= 10000, "checked every cycle");
        o.require(sa.invariant_violations == 0, "invariants: " + sa.first_violation);
        o.require(sa.completed > 0, "traffic completed");
        o.detail << " AMAT " << sa.amat << ", throughput " << sa.throughput << ", " << sa.invariant_checks
                 << " invariant checks, " << sa.invariant_violations << " violations";
    });

    criterion(8, "HBML bandwidth", 60.0 * 12, [](Outcome& o) {
        const auto cfg = validate(parse_label("8C-8T-4SG-4G"));
        auto point = [&](double clock, double pins) {
            TransferScenario s;
            s.clock_mhz = clock;
            s.pin_rate_gbps = pins;
            return run_scenario(s, cfg);
        };
        for (double pins : {2.8, 3.2, 3.6}) {
            for (double clock : {700.0, 800.0, 900.0, 1000.0}) {
                HbmConfig h;
                h.clock_mhz = clock;
                h.pin_rate_gbps = pins;
                if (link_ceiling(h) < h.peak_gbps()) continue;  // link-bound, not HBM-bound
                const auto st = point(clock, pins);
                o.detail << " " << clock << "MHz/" << pins << ":" << st.hbm_utilization * 100 << "%";
                o.require(st.hbm_utilization >= 0.95, "utilization at " + std::to_string(clock) + " MHz, " +
                                                          std::to_string(pins) + " Gb/s");
            }
        }
        const auto nominal = point(900, 3.6);
        o.detail << "; 900MHz/3.6 " << nominal.achieved_gbps << " GB/s";
        o.require(rel(nominal.achieved_gbps, 896.0) <= 0.03, "896 GB/s at 900 MHz");
        const auto lo = point(500, 2.8), hi = point(500, 3.6);
        o.detail << "; 500MHz " << lo.hbm_utilization * 100 << "% / " << hi.hbm_utilization * 100 << "%";
        o.require(rel(lo.hbm_utilization, 0.618) <= 0.15, "500 MHz at 2.8 Gb/s");
        o.require(rel(hi.hbm_utilization, 0.494) <= 0.15, "500 MHz at 3.6 Gb/s");
        for (double pins : {2.8, 3.2, 3.6})
            o.require(point(500, pins).achieved_gbps <= 512.0 * (1 + 1e-9), "512 GB/s link ceiling");
    });

    criterion(9, "address map bijection over 2^16 words", 10.0, [](Outcome& o) {
        std::uint64_t checked = 0;
        for (auto layout : {BankLayout::bank_fastest, BankLayout::tile_fastest})
            for (std::int64_t seq : {std::int64_t(0), std::int64_t(-1), std::int64_t(256 * 4 * 32)}) {
                const AddressMap map(desk(), seq, layout);
                o.require(map.l1_bytes() == (std::uint64_t(1) << 16) * 4, "desk L1 is 2^16 words");
                std::vector<bool> seen(std::size_t(1) << 16, false);
                for (std::uint64_t a = 0; a < map.l1_bytes(); a += 4) {
                    const auto m = map.map(a);
                    const std::size_t slot = std::size_t(map.global_bank(m.coord)) * 256 + m.coord.row;
                    if (slot >= seen.size() || seen[slot] || map.unmap(m.coord) != a) {
                        o.require(false, "bijection at address " + std::to_string(a));
                        return;
                    }
                    seen[slot] = true;
                    ++checked;
                }
                if (map.interleaved_region_bytes() == 0) continue;
                std::uint64_t next = map.interleaved_base();
                for (const auto& ch : burst_span(map, map.interleaved_base(), map.interleaved_region_bytes())) {
                    o.require(ch.address == next && ch.words <= map.stripe_words(), "burst_span tiling");
                    for (std::uint32_t w = 0; w < ch.words; ++w)
                        if (map.global_subgroup(map.map(ch.address + 4ull * w).coord) != ch.subgroup) {
                            o.require(false, "stripe ownership");
                            return;
                        }
                    next += 4ull * ch.words;
                }
                o.require(next == map.l1_bytes(), "burst_span covers the interleaved region");
            }
        for (std::uint32_t rows : {64u, 128u, 512u, 1024u}) {
            auto big = desk();
            big.bank_words = rows;
            const AddressMap ref(desk(), 0);
            const AddressMap other(validate(big), 0);
            for (std::uint64_t a = 0; a < std::min(ref.l1_bytes(), other.l1_bytes()); a += 4)
                if (ref.global_bank(ref.map(a).coord) != other.global_bank(other.map(a).coord)) {
                    o.require(false, "bank index changes with " + std::to_string(rows) + " rows");
                    return;
                }
        }
        o.detail << " " << checked << " words mapped and inverted";
    });

    criterion(10, "workload trends", 60.0, [](Outcome& o) {
        const auto cfg = desk();
        const auto fabric = build_fabric(cfg, {1, 3, 5, 7});
        const AddressMap map(cfg);
        SimOptions so;
        so.warmup = 1000;
        auto loc = local_tile_source(map, 1.0, 5);
        auto uni = uniform_source(map, 1.0, 5);
        const auto sl = run(fabric, map, *loc, 11000, so);
        const auto su = run(fabric, map, *uni, 11000, so);
        o.require(sl.amat < su.amat, "local AMAT below uniform AMAT");
        o.detail << " local AMAT " << sl.amat << " < uniform " << su.amat;

        AccessPattern csr;
        csr.kind = PatternKind::csr_spmmadd;
        csr.seed = 1;
        auto cs = make_source(map, csr);
        SimOptions fin;
        fin.warmup = 0;
        const auto sc = run_to_completion(fabric, map, *cs, 2000000, fin);
        o.require(sc.finished, "CSR finished");
        o.require(sc.stall_contention <= 0.10, "CSR contention stalls at most 10%");
        o.detail << "; CSR contention stall fraction " << sc.stall_contention * 100 << "%";

        std::size_t grid = 0;
        for (double latency : {0.0, 10.0, 100.0, 1000.0})
            for (double ratio : {4.0, 32.0, 256.0})
                for (double ai : {1.0, 8.0, 64.0})
                    for (double util : {0.5, 1.0}) {
                        const ScalingParams base{latency, 8192, 8192 / ratio, ai, 256, util, 1.0};
                        double last = kung_feasible(base).slack;
                        for (double s : {2.0, 4.0, 8.0, 16.0, 64.0}) {
                            const double now = kung_feasible(scaled(base, s)).slack;
                            o.require(now > last, "slack grows with S");
                            last = now;
                        }
                        ++grid;
                    }
        o.detail << "; Kung slack increases with S on " << grid << " grid points";
    });

    std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
