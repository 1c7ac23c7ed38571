#include "xbarscale/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xbarscale/error.hpp"

namespace xbarscale {

double binomial_pmf(std::uint32_t n, double p, std::uint32_t x) {
    if (x > n) throw InputError("binomial_pmf: x out of range");
    if (p < 0.0 || p > 1.0) throw InputError("binomial_pmf: p out of range");
    if (p == 0.0) return x == 0 ? 1.0 : 0.0;
    if (p == 1.0) return x == n ? 1.0 : 0.0;
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(double(n - x) + 1.0);
    return std::exp(log_c + x * std::log(p) + double(n - x) * std::log1p(-p));
}

namespace {

double pow_one_minus(double q, std::uint32_t n) {
    if (q >= 1.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(double(n) * std::log1p(-q));
}

void check_spec(std::uint32_t n, std::uint32_t k, double p) {
    if (n < 1 || k < 1) throw InputError("arbiter needs n >= 1 and k >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("injection rate must lie in [0, 1]");
}

}  // namespace

double arbiter_latency_n_to_1(std::uint32_t n, double p) {
    check_spec(n, 1, p);
    if (p == 0.0) return 0.0;
    return std::max(0.0, double(n) * p - 1.0 + pow_one_minus(p, n));
}

double arbiter_latency_n_to_k_recursive(std::uint32_t n, std::uint32_t k, double p) {
    check_spec(n, k, p);
    if (p == 0.0) return 0.0;
    const double q = p / k;
    const double e1 = arbiter_latency_n_to_1(n, q);
    const double p0 = pow_one_minus(q, n);
    double e = e1;
    for (std::uint32_t i = 2; i <= k; ++i) e = e1 + p0 * e;
    return e;
}

double arbiter_latency_n_to_k(std::uint32_t n, std::uint32_t k, double p) {
    if (k <= 64) return arbiter_latency_n_to_k_recursive(n, k, p);
    check_spec(n, k, p);
    if (p == 0.0) return 0.0;
    const double q = p / k;
    const double e1 = arbiter_latency_n_to_1(n, q);
    const double p0 = pow_one_minus(q, n);
    if (p0 >= 1.0) return e1 * k;
    return e1 * (1.0 - std::pow(p0, double(k))) / (1.0 - p0);
}

double propagate_injection(const ArbiterSpec& s) {
    check_spec(s.n, s.k, s.p);
    return 1.0 - pow_one_minus(s.p / s.k, s.n);
}

std::vector<std::vector<StageEstimate>> build_stage_chains(const HierarchyConfig& c, double p) {
    const auto pop = bank_population(c);
    const std::uint32_t alpha = c.pes_per_tile;
    const auto r_in = static_cast<std::uint32_t>(next_pow2(remote_ports_per_tile(c)));
    const double bank_p = std::min(1.0, alpha * p / double(alpha + r_in));
    const StageEstimate bank{"bank", {alpha + r_in, c.banks_per_tile, bank_p}, bank_p, 0.0};

    struct Remote {
        const char* port;
        const char* xbar;
        std::uint32_t ports;
        std::uint32_t width;
    };
    std::vector<Remote> remotes;
    if (c.tiles_per_subgroup > 1) remotes.push_back({"subgroup-port", "subgroup", 1, c.tiles_per_subgroup});
    if (c.subgroups_per_group > 1)
        remotes.push_back({"inter-subgroup-port", "inter-subgroup", c.subgroups_per_group - 1, c.tiles_per_subgroup});
    if (c.groups > 1) remotes.push_back({"inter-group-port", "inter-group", c.groups - 1, c.tiles_per_group()});

    std::vector<std::vector<StageEstimate>> chains{{bank}};
    for (std::size_t i = 0; i < remotes.size(); ++i) {
        const auto& r = remotes[i];
        const double share = p * double(pop[i + 1]) / double(c.total_banks);
        const ArbiterSpec port{alpha, r.ports, share};
        const ArbiterSpec xbar{r.width, r.width, propagate_injection(port)};
        chains.push_back({{r.port, port, port.p, 0.0}, {r.xbar, xbar, xbar.p, 0.0}, bank});
    }
    return chains;
}

namespace {

AmatEstimate solve(const HierarchyConfig& c, const LatencyLadder& ladder, double p, const AmatOptions& opt) {
    check_ladder(c, ladder);
    if (!(p > 0.0 && p <= 1.0)) throw InputError("injection rate must lie in (0, 1]");
    if (opt.queue_depth < 1) throw InputError("queue depth must be >= 1");

    const auto pop = bank_population(c);
    auto chains = build_stage_chains(c, p);
    const std::size_t nc = chains.size();

    AmatEstimate est;
    est.zero_load = zero_load_latency(c, ladder);
    est.converged = false;

    auto bank_eff = chains[0][0].effective_p;
    double prev_t = std::numeric_limits<double>::quiet_NaN();
    for (std::uint32_t it = 1; it <= opt.max_iterations; ++it) {
        const double e_bank = arbiter_latency_n_to_k(chains[0][0].offered.n, chains[0][0].offered.k, bank_eff);
        chains[0][0].effective_p = bank_eff;
        chains[0][0].contention = e_bank;
        for (std::size_t ci = 1; ci < nc; ++ci) {
            auto& port = chains[ci][0];
            auto& xbar = chains[ci][1];
            auto& bk = chains[ci][2];
            port.contention = arbiter_latency_n_to_k(port.offered.n, port.offered.k, port.effective_p);
            xbar.offered.p = propagate_injection({port.offered.n, port.offered.k, port.effective_p});
            xbar.contention = arbiter_latency_n_to_k(xbar.offered.n, xbar.offered.k, xbar.effective_p);
            bk.effective_p = bank_eff;
            bk.contention = e_bank;
        }

        double t = 0.0;
        for (std::size_t ci = 0; ci < nc; ++ci) {
            double e = 0.0;
            for (const auto& s : chains[ci]) e += s.contention;
            t += double(pop[ci]) / double(c.total_banks) * (ladder[ci] + e);
        }
        est.t_cluster = t;
        est.iterations = it;
        if (!std::isnan(prev_t) && std::abs(t - prev_t) < opt.tolerance) {
            est.converged = true;
            break;
        }
        prev_t = t;

        // queued retries raise the rate each stage sees
        auto amplify = [&](const StageEstimate& s) {
            const double e = s.contention;
            return std::min(1.0, s.offered.p * (1.0 + e / (opt.queue_depth * (1.0 + e))));
        };
        bank_eff = amplify(chains[0][0]);
        for (std::size_t ci = 1; ci < nc; ++ci) {
            chains[ci][0].effective_p = amplify(chains[ci][0]);
            chains[ci][1].effective_p = amplify(chains[ci][1]);
        }
    }

    for (std::size_t ci = 0; ci < nc; ++ci) {
        ClassEstimate ce;
        ce.probability = double(pop[ci]) / double(c.total_banks);
        ce.pipeline = ladder[ci];
        for (const auto& s : chains[ci]) ce.contention += s.contention;
        ce.request_contention = ce.contention / 2.0;
        ce.response_contention = ce.contention / 2.0;
        ce.latency = ce.pipeline + ce.contention;
        ce.stages = chains[ci];
        est.classes.push_back(std::move(ce));
    }
    return est;
}

double service_time(const AmatEstimate& sat, ThroughputMode mode) {
    double weighted = 0.0;
    double worst = 0.0;
    for (const auto& ce : sat.classes) {
        weighted += ce.probability * ce.contention;
        worst = std::max(worst, ce.contention);
    }
    switch (mode) {
        case ThroughputMode::weighted:
            return 1.0 + weighted;
        case ThroughputMode::bottleneck:
            return 1.0 + worst;
        case ThroughputMode::pipeline_hidden:
            break;
    }
    double hidden = 0.0;
    if (sat.classes.size() > 1) {
        for (std::size_t i = 1; i < sat.classes.size(); ++i) hidden += sat.classes[i].pipeline - 1.0;
        hidden /= double(sat.classes.size() - 1);
    }
    return std::max(sat.t_cluster - hidden, 1.0 + weighted);
}

}  // namespace

AmatEstimate cluster_amat(const HierarchyConfig& c, const LatencyLadder& ladder, double p, const AmatOptions& opt) {
    auto est = solve(c, ladder, p, opt);
    const auto sat = p == 1.0 ? est : solve(c, ladder, 1.0, opt);
    est.throughput = 1.0 / service_time(sat, opt.throughput);
    return est;
}

double cluster_throughput(const HierarchyConfig& c, const LatencyLadder& ladder, ThroughputMode mode) {
    AmatOptions opt;
    opt.throughput = mode;
    return 1.0 / service_time(solve(c, ladder, 1.0, opt), mode);
}

std::string to_string(ThroughputMode mode) {
    switch (mode) {
        case ThroughputMode::pipeline_hidden:
            return "pipeline_hidden";
        case ThroughputMode::weighted:
            return "weighted";
        case ThroughputMode::bottleneck:
            return "bottleneck";
    }
    return "pipeline_hidden";
}

ThroughputMode parse_throughput_mode(const std::string& name) {
    if (name == "pipeline_hidden") return ThroughputMode::pipeline_hidden;
    if (name == "weighted") return ThroughputMode::weighted;
    if (name == "bottleneck") return ThroughputMode::bottleneck;
    throw InputError("unknown throughput mode '" + name + "'");
}

double matmul_arithmetic_intensity(double words) {
    if (!(words > 0.0)) throw InputError("matmul working set must be positive");
    return std::sqrt(words) / (3.0 * std::sqrt(3.0));
}

Feasibility kung_feasible(const ScalingParams& s) {
    if (!(s.latency >= 0.0) || !(s.tile_words > 0.0) || !(s.bandwidth > 0.0) || !(s.intensity > 0.0) ||
        !(s.pes > 0.0) || !(s.utilization > 0.0 && s.utilization <= 1.0) || !(s.scale > 0.0))
        throw InputError("scaling parameters must be positive (utilization in (0, 1])");
    Feasibility f;
    f.lhs = s.latency + s.tile_words / s.bandwidth;
    f.rhs = std::sqrt(s.scale) * s.intensity * s.tile_words / (s.pes * s.utilization);
    f.slack = f.rhs - f.lhs;
    f.feasible = f.lhs < f.rhs;
    return f;
}

ScalingParams scaled(ScalingParams s, double factor) {
    if (!(factor > 0.0)) throw InputError("scale factor must be positive");
    s.tile_words *= factor;
    s.pes *= factor;
    s.bandwidth *= factor;
    s.scale *= factor;
    return s;
}

}  // namespace xbarscale
