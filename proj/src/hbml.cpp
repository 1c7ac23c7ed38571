#include "xbarscale/hbml.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "xbarscale/error.hpp"

namespace xbarscale {

void check(const HbmConfig& h) {
    if (h.channels < 1) throw InputError("HBM needs at least one channel");
    if (!(h.pin_rate_gbps > 0.0)) throw InputError("pin rate must be positive");
    if (!(h.clock_mhz > 0.0)) throw InputError("cluster clock must be positive");
    if (!(h.refresh_fraction >= 0.0 && h.refresh_fraction < 1.0)) throw InputError("refresh fraction must lie in [0, 1)");
    if (!(h.refresh_period_ns > 0.0)) throw InputError("refresh period must be positive");
    if (h.interleave_words < 1) throw InputError("interleave granularity must be positive");
    if (h.outstanding < 1) throw InputError("masters need at least one outstanding burst");
}

double link_ceiling(const HbmConfig& h) { return double(h.masters) * h.link_bytes * h.clock_mhz * 1e6 / 1e9; }

std::string to_string(Direction d) { return d == Direction::l2_to_l1 ? "l2_to_l1" : "l1_to_l2"; }

Direction parse_direction(const std::string& name) {
    if (name == "l2_to_l1" || name == "in") return Direction::l2_to_l1;
    if (name == "l1_to_l2" || name == "out") return Direction::l1_to_l2;
    throw InputError("unknown transfer direction '" + name + "'");
}

std::uint64_t DmaSubTask::bytes() const {
    std::uint64_t n = 0;
    for (const auto& b : bursts) n += b.bytes;
    return n;
}

std::vector<DmaSubTask> dma_split(const DmaDescriptor& d, const AddressMap& map, const HbmConfig& hbm) {
    if (d.length == 0) throw InputError("DMA descriptor length must be positive");
    if (d.source % AddressMap::word_bytes || d.destination % AddressMap::word_bytes ||
        d.length % AddressMap::word_bytes)
        throw InputError("DMA descriptor must be word aligned");
    check(hbm);
    const std::uint64_t l1 = d.l1_address();
    const std::uint64_t l2 = d.l2_address();
    const std::uint64_t il = hbm.interleave_bytes();
    std::vector<DmaSubTask> tasks(map.config().total_subgroups());
    for (const auto& chunk : burst_span(map, l1, d.length)) {
        std::uint64_t off = chunk.address - l1;
        std::uint64_t left = std::uint64_t(chunk.words) * AddressMap::word_bytes;
        while (left > 0) {
            const std::uint64_t a2 = l2 + off;
            const std::uint64_t n = std::min(left, il - a2 % il);
            Burst b;
            b.l1_address = l1 + off;
            b.l2_address = a2;
            b.bytes = static_cast<std::uint32_t>(n);
            b.channel = static_cast<std::uint32_t>((a2 / il) % hbm.channels);
            tasks[chunk.subgroup].backend = chunk.subgroup;
            tasks[chunk.subgroup].bursts.push_back(b);
            off += n;
            left -= n;
        }
    }
    std::vector<DmaSubTask> out;
    for (auto& t : tasks)
        if (!t.bursts.empty()) out.push_back(std::move(t));
    return out;
}

TransferStats run_transfer(const std::vector<std::vector<DmaSubTask>>& descs, const HbmConfig& h) {
    check(h);
    TransferStats st;
    st.descriptors = static_cast<std::uint32_t>(descs.size());
    struct Pending {
        std::uint64_t ready;
        std::uint32_t channel;
        double left;
    };
    std::vector<std::deque<Pending>> masters(std::max<std::uint32_t>(h.masters, 1));
    std::uint64_t config_end = 0;
    for (std::size_t i = 0; i < descs.size(); ++i) {
        config_end = (i + 1) * std::uint64_t(h.frontend_cycles);
        for (const auto& task : descs[i]) {
            auto& q = masters[task.backend % masters.size()];
            for (const auto& b : task.bursts) {
                if (b.channel >= h.channels) throw InputError("burst targets a channel beyond the HBM config");
                q.push_back({config_end, b.channel, double(b.bytes)});
                st.bytes += b.bytes;
            }
        }
    }
    if (h.masters == 0 && st.bytes > 0) throw InputError("cannot move data without DMA masters");

    const double rate = h.channel_peak_gbps() * 1e9 / (h.clock_mhz * 1e6);  // bytes per cluster cycle
    const double cap = std::max(rate, double(h.link_bytes));
    const double period = h.refresh_period_ns * h.clock_mhz / 1000.0;
    const double blackout = h.refresh_fraction * period;
    const std::size_t nm = masters.size();
    std::vector<double> credit(h.channels, 0.0);
    std::vector<std::deque<std::pair<std::uint32_t, Pending>>> channel_q(h.channels);
    std::vector<std::uint32_t> in_flight(nm, 0);
    std::vector<double> link_left(nm, 0.0);
    std::size_t left = 0;
    for (const auto& q : masters) left += q.size();

    std::uint64_t t = 0;
    std::uint64_t last_move = 0;
    const double eps = 1e-9;
    while (left > 0) {
        for (std::size_t m = 0; m < nm; ++m) {
            auto& q = masters[m];
            while (!q.empty() && q.front().ready <= t && in_flight[m] < h.outstanding) {
                channel_q[q.front().channel].push_back({static_cast<std::uint32_t>(m), q.front()});
                q.pop_front();
                ++in_flight[m];
            }
            link_left[m] = h.link_bytes;
        }
        const double phase = std::fmod(double(t), period);
        const double dark = std::max(0.0, std::min(phase + 1.0, blackout) - phase) +
                            std::max(0.0, std::min(phase + 1.0, period + blackout) - period);
        const double avail = std::max(0.0, 1.0 - dark);
        if (avail > 0.0) {
            for (std::uint32_t k = 0; k < h.channels; ++k) {
                const std::uint32_t c = static_cast<std::uint32_t>((t + k) % h.channels);
                credit[c] = std::min(cap, credit[c] + rate * avail);
                auto& q = channel_q[c];
                while (!q.empty()) {
                    auto& [m, b] = q.front();
                    const double moved = std::min({link_left[m], b.left, credit[c]});
                    if (moved <= eps) break;
                    credit[c] -= moved;
                    link_left[m] -= moved;
                    b.left -= moved;
                    last_move = t;
                    if (b.left > eps) break;
                    --in_flight[m];
                    --left;
                    q.pop_front();
                }
            }
        }
        ++t;
        if (t > (std::uint64_t(1) << 40)) throw ModelError("transfer did not finish");
    }
    st.cycles = st.bytes > 0 ? std::max(last_move + 1, config_end) : config_end;
    st.seconds = double(st.cycles) / (h.clock_mhz * 1e6);
    if (st.seconds > 0.0) st.achieved_gbps = double(st.bytes) / st.seconds / 1e9;
    st.hbm_utilization = st.achieved_gbps / h.peak_gbps();
    const double link = link_ceiling(h);
    st.link_utilization = link > 0.0 ? st.achieved_gbps / link : 0.0;
    return st;
}

TransferStats run_transfer(const std::vector<DmaSubTask>& subtasks, const HbmConfig& hbm) {
    return run_transfer(std::vector<std::vector<DmaSubTask>>{subtasks}, hbm);
}

std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::l2_to_l1:
            return "l2_to_l1";
        case ScenarioKind::l1_to_l2:
            return "l1_to_l2";
        case ScenarioKind::round_trip:
            return "round_trip";
    }
    return "round_trip";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
    if (name == "round_trip") return ScenarioKind::round_trip;
    return parse_direction(name) == Direction::l2_to_l1 ? ScenarioKind::l2_to_l1 : ScenarioKind::l1_to_l2;
}

TransferStats run_scenario(const TransferScenario& s, const HierarchyConfig& config) {
    HbmConfig h;
    h.clock_mhz = s.clock_mhz;
    h.pin_rate_gbps = s.pin_rate_gbps;
    h.refresh_fraction = s.refresh_fraction;
    h.frontend_cycles = s.frontend_cycles;
    check(h);
    if (s.bytes % AddressMap::word_bytes) throw InputError("transfer size must be word aligned");
    const AddressMap map(config, 0);
    const std::uint64_t region = map.interleaved_region_bytes();

    std::vector<DmaDescriptor> plan;
    auto add = [&](std::uint64_t total, Direction dir, std::uint64_t l2_base) {
        for (std::uint64_t off = 0; off < total; off += region) {
            DmaDescriptor d;
            d.length = std::min(region, total - off);
            d.direction = dir;
            const std::uint64_t l1 = map.interleaved_base();
            d.source = dir == Direction::l2_to_l1 ? l2_base + off : l1;
            d.destination = dir == Direction::l2_to_l1 ? l1 : l2_base + off;
            plan.push_back(d);
        }
    };
    switch (s.kind) {
        case ScenarioKind::l2_to_l1:
            add(s.bytes, Direction::l2_to_l1, 0);
            break;
        case ScenarioKind::l1_to_l2:
            add(s.bytes, Direction::l1_to_l2, 0);
            break;
        case ScenarioKind::round_trip:
            add(s.bytes / 2, Direction::l2_to_l1, 0);
            add(s.bytes - s.bytes / 2, Direction::l1_to_l2, s.bytes / 2);
            break;
    }
    std::vector<std::vector<DmaSubTask>> split;
    for (const auto& d : plan)
        if (d.length > 0) split.push_back(dma_split(d, map, h));
    if (split.empty()) split.emplace_back();
    return run_transfer(split, h);
}

std::vector<MatrixPoint> bandwidth_matrix(const std::vector<double>& clocks, const std::vector<double>& rates,
                                          const HierarchyConfig& config, const TransferScenario& base) {
    std::vector<MatrixPoint> out;
    for (double r : rates) {
        for (double f : clocks) {
            TransferScenario s = base;
            s.clock_mhz = f;
            s.pin_rate_gbps = r;
            MatrixPoint p;
            p.clock_mhz = f;
            p.pin_rate_gbps = r;
            p.stats = run_scenario(s, config);
            HbmConfig h;
            h.clock_mhz = f;
            h.pin_rate_gbps = r;
            p.peak_gbps = h.peak_gbps();
            p.link_gbps = link_ceiling(h);
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace xbarscale
