#include "xbarscale/fabric.hpp"

#include <algorithm>
#include <optional>

#include "xbarscale/error.hpp"

namespace xbarscale {

namespace {

enum Rank : std::uint8_t {
    resp_port = 0,
    resp_master_link = 1,
    resp_xbar = 2,
    resp_slave_link = 3,
    resp_drain = 4,
    req_port = 5,
    req_master_link = 6,
    req_xbar = 7,
    req_slave_link = 8,
    req_bank = 9,
};

}  // namespace

Fabric::Fabric(const HierarchyConfig& config, const LatencyLadder& ladder, const FabricOptions& options)
    : config_(validate(config)), ladder_(ladder), options_(options) {
    check_ladder(config_, ladder_);
    if (options_.input_queue_depth < 1 || options_.input_queue_depth > 4)
        throw InputError("input queue depth must lie in [1, 4]");
    if (options_.spill_depth < 1 || options_.spill_depth > 4) throw InputError("spill depth must lie in [1, 4]");
    for (auto l : ladder_)
        if ((l - 1) / 2 > 20) throw InputError("ladder entries above 41 cycles are not supported by the simulator");
    build();
}

std::uint32_t Fabric::add_buffer(std::uint32_t capacity, std::uint32_t latency) {
    buffers_.push_back({capacity, latency});
    return static_cast<std::uint32_t>(buffers_.size() - 1);
}

std::uint32_t Fabric::add_arbiter(ArbKind kind, std::uint8_t rank, std::uint32_t inputs, std::uint32_t output,
                                  std::string name) {
    ArbiterSpec a;
    a.kind = kind;
    a.rank = rank;
    a.inputs = inputs;
    a.output = output;
    a.name = std::move(name);
    arbiters_.push_back(std::move(a));
    return static_cast<std::uint32_t>(arbiters_.size() - 1);
}

std::size_t Fabric::distance_class(std::uint32_t pe, std::uint32_t global_bank) const {
    const auto& c = config_;
    const std::uint32_t s = pe / c.pes_per_tile;
    const std::uint32_t t = global_bank / c.banks_per_tile;
    Level lv;
    if (s == t)
        return 0;
    else if (s / c.tiles_per_subgroup == t / c.tiles_per_subgroup)
        lv = Level::subgroup;
    else if (s / c.tiles_per_group() == t / c.tiles_per_group())
        lv = Level::group;
    else
        lv = Level::cluster;
    return static_cast<std::size_t>(std::find(class_level_.begin(), class_level_.end(), lv) - class_level_.begin());
}

std::uint32_t Fabric::port_index(std::size_t cls, std::uint32_t src, std::uint32_t dst) const {
    const auto& c = config_;
    const std::uint32_t base = class_port_base_[cls];
    std::uint32_t s = 0, d = 0;
    switch (class_level_[cls]) {
        case Level::subgroup:
            return base;
        case Level::group:
            s = (src / c.tiles_per_subgroup) % c.subgroups_per_group;
            d = (dst / c.tiles_per_subgroup) % c.subgroups_per_group;
            break;
        default:
            s = src / c.tiles_per_group();
            d = dst / c.tiles_per_group();
            break;
    }
    return base + (d < s ? d : d - 1);
}

std::uint32_t Fabric::instance_of(std::size_t cls, std::uint32_t src, std::uint32_t dst) const {
    const auto& c = config_;
    switch (class_level_[cls]) {
        case Level::subgroup:
            return src / c.tiles_per_subgroup;
        case Level::group: {
            const std::uint32_t g = src / c.tiles_per_group();
            const std::uint32_t s = (src / c.tiles_per_subgroup) % c.subgroups_per_group;
            const std::uint32_t d = (dst / c.tiles_per_subgroup) % c.subgroups_per_group;
            return (g * c.subgroups_per_group + s) * c.subgroups_per_group + d;
        }
        default:
            return (src / c.tiles_per_group()) * c.groups + dst / c.tiles_per_group();
    }
}

std::uint32_t Fabric::position_of(std::size_t cls, std::uint32_t tile) const {
    if (class_level_[cls] == Level::cluster) return tile % config_.tiles_per_group();
    return tile % config_.tiles_per_subgroup;
}

void Fabric::build() {
    const auto& c = config_;
    class_level_ = c.levels;
    const std::uint32_t alpha = c.pes_per_tile;
    const std::uint32_t banks = c.banks_per_tile;
    const std::size_t nclass = class_level_.size();

    std::vector<std::uint32_t> class_ports(nclass, 0);
    class_port_base_.assign(nclass, 0);
    std::uint32_t nports = 0;
    for (std::size_t k = 1; k < nclass; ++k) {
        switch (class_level_[k]) {
            case Level::subgroup:
                class_ports[k] = 1;
                break;
            case Level::group:
                class_ports[k] = c.subgroups_per_group - 1;
                break;
            default:
                class_ports[k] = c.groups - 1;
                break;
        }
        class_port_base_[k] = nports;
        nports += class_ports[k];
    }

    spill_.clear();
    for (std::size_t k = 0; k < nclass; ++k) {
        const std::uint32_t r = (ladder_[k] - 1) / 2;
        spill_.push_back({k, ladder_[k], k == 0 ? 0 : (r + 1) / 2, k == 0 ? 0 : r / 2});
    }

    for (std::uint32_t pe = 0; pe < c.total_pes; ++pe) pe_buffer_.push_back(add_buffer(1, 0));
    for (std::uint32_t b = 0; b < c.total_banks; ++b) bank_resp_buffer_.push_back(add_buffer(1, 1));
    local_drain_ = add_arbiter(ArbKind::drain, resp_port, 1, sink, "complete-local");
    remote_drain_ = add_arbiter(ArbKind::drain, resp_drain, 1, sink, "complete-remote");

    auto source = [&](std::uint8_t rank, std::uint32_t buffer) { rank_sources_[rank].push_back(buffer); };
    auto chain = [&](std::uint32_t length, std::uint32_t capacity, std::uint8_t link_rank,
                     const std::string& name) {
        Chain ch;
        for (std::uint32_t i = 0; i < length; ++i) ch.buffers.push_back(add_buffer(capacity, 1));
        for (std::uint32_t i = 0; i + 1 < length; ++i) {
            ch.links.push_back(add_arbiter(ArbKind::round_robin, link_rank, 1, ch.buffers[i + 1], name));
            source(link_rank, ch.buffers[i]);
        }
        return ch;
    };

    ports_.assign(c.total_tiles, {});
    for (std::uint32_t t = 0; t < c.total_tiles; ++t) {
        const std::string tname = "tile" + std::to_string(t);
        for (std::size_t k = 1; k < nclass; ++k) {
            const std::uint32_t m = spill_[k].master_registers;
            const std::uint32_t s = spill_[k].slave_registers;
            for (std::uint32_t j = 0; j < class_ports[k]; ++j) {
                const std::string pname = tname + ".port" + std::to_string(class_port_base_[k] + j);
                TilePort p;
                p.cls = k;
                p.req_master = chain(m, options_.spill_depth, req_master_link, pname + ".req-spill");
                p.req_arbiter = add_arbiter(ArbKind::round_robin, req_port, alpha, p.req_master.buffers[0],
                                            pname + ".req");
                p.resp_slave = chain(s, options_.spill_depth, resp_slave_link, pname + ".resp-spill");
                if (s > 0) source(resp_drain, p.resp_slave.buffers.back());

                p.req_slave = chain(s, options_.spill_depth, req_slave_link, pname + ".in-spill");
                const std::uint32_t queue = add_buffer(options_.input_queue_depth, 0);
                if (s > 0) {
                    p.req_slave.links.push_back(
                        add_arbiter(ArbKind::round_robin, req_slave_link, 1, queue, pname + ".in-spill"));
                    source(req_slave_link, p.req_slave.buffers.back());
                }
                p.req_slave.buffers.push_back(queue);
                source(req_bank, queue);

                p.resp_master = chain(m, options_.spill_depth, resp_master_link, pname + ".out-spill");
                p.resp_arbiter = add_arbiter(ArbKind::round_robin, resp_port, banks, p.resp_master.buffers[0],
                                             pname + ".resp");
                ports_[t].push_back(std::move(p));
            }
        }
        for (std::uint32_t i = 0; i < alpha; ++i) {
            source(req_port, pe_buffer_[t * alpha + i]);
            source(req_bank, pe_buffer_[t * alpha + i]);
        }
        for (std::uint32_t b = 0; b < banks; ++b) {
            const std::uint32_t gb = t * banks + b;
            auto id = add_arbiter(ArbKind::round_robin, req_bank, alpha + nports, bank_resp_buffer_[gb],
                                  "bank" + std::to_string(gb));
            arbiters_[id].bank = static_cast<std::int32_t>(gb);
            bank_arbiter_.push_back(id);
            source(resp_port, bank_resp_buffer_[gb]);
        }
    }

    instances_.assign(nclass, {});
    for (std::size_t k = 1; k < nclass; ++k) {
        const std::uint32_t width = class_level_[k] == Level::cluster ? c.tiles_per_group() : c.tiles_per_subgroup;
        std::uint32_t count = 0;
        switch (class_level_[k]) {
            case Level::subgroup:
                count = c.total_subgroups();
                break;
            case Level::group:
                count = c.groups * c.subgroups_per_group * c.subgroups_per_group;
                break;
            default:
                count = c.groups * c.groups;
                break;
        }
        instances_[k].assign(count, {});
        const std::uint32_t s_regs = spill_[k].slave_registers;
        for (std::uint32_t src = 0; src < c.total_tiles; ++src) {
            for (std::uint32_t dst = 0; dst < c.total_tiles; ++dst) {
                if (src == dst) continue;
                const std::size_t k2 = distance_class(src * alpha, dst * banks);
                if (k2 != k) continue;
                auto& inst = instances_[k][instance_of(k, src, dst)];
                if (inst.req_out.empty()) {
                    inst.req_out.assign(width, sink);
                    inst.resp_out.assign(width, sink);
                }
                const std::string iname = "xbar" + std::to_string(k) + "." + std::to_string(instance_of(k, src, dst));
                const auto pd = position_of(k, dst);
                const auto ps = position_of(k, src);
                if (inst.req_out[pd] == sink) {
                    const auto& target = ports_[dst][port_index(k, dst, src)];
                    inst.req_out[pd] = add_arbiter(ArbKind::round_robin, req_xbar, width, target.req_slave.buffers[0],
                                                   iname + ".req" + std::to_string(pd));
                }
                if (inst.resp_out[ps] == sink) {
                    const auto& origin = ports_[src][port_index(k, src, dst)];
                    const std::uint32_t out = s_regs > 0 ? origin.resp_slave.buffers[0] : sink;
                    inst.resp_out[ps] =
                        add_arbiter(ArbKind::round_robin, resp_xbar, width, out, iname + ".resp" + std::to_string(ps));
                }
            }
        }
        for (std::uint32_t t = 0; t < c.total_tiles; ++t) {
            for (std::uint32_t j = 0; j < class_ports[k]; ++j) {
                const auto& p = ports_[t][class_port_base_[k] + j];
                source(req_xbar, p.req_master.buffers.back());
                source(resp_xbar, p.resp_master.buffers.back());
            }
        }
    }

    for (auto& list : rank_sources_) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
}

std::size_t Fabric::route(std::uint32_t pe, std::uint32_t gb, std::array<Hop, max_hops>& out) const {
    const auto& c = config_;
    std::size_t n = 0;
    const std::uint32_t src = pe / c.pes_per_tile;
    const std::uint32_t dst = gb / c.banks_per_tile;
    const std::uint32_t pe_local = pe % c.pes_per_tile;
    const std::size_t k = distance_class(pe, gb);
    if (k == 0) {
        out[n++] = {bank_arbiter_[gb], pe_local};
        out[n++] = {local_drain_, 0};
        return n;
    }
    const std::uint32_t j = port_index(k, src, dst);
    const std::uint32_t u = port_index(k, dst, src);
    const auto& p = ports_[src][j];
    const auto& q = ports_[dst][u];
    const auto& inst = instances_[k][instance_of(k, src, dst)];
    const auto ps = position_of(k, src);
    const auto pd = position_of(k, dst);

    out[n++] = {p.req_arbiter, pe_local};
    for (auto l : p.req_master.links) out[n++] = {l, 0};
    out[n++] = {inst.req_out[pd], ps};
    for (auto l : q.req_slave.links) out[n++] = {l, 0};
    out[n++] = {bank_arbiter_[gb], c.pes_per_tile + u};

    out[n++] = {q.resp_arbiter, gb % c.banks_per_tile};
    for (auto l : q.resp_master.links) out[n++] = {l, 0};
    out[n++] = {inst.resp_out[ps], pd};
    if (!p.resp_slave.buffers.empty()) {
        for (auto l : p.resp_slave.links) out[n++] = {l, 0};
        out[n++] = {remote_drain_, 0};
    }
    return n;
}

Fabric build_fabric(const HierarchyConfig& config, const LatencyLadder& ladder, const FabricOptions& options) {
    return Fabric(config, ladder, options);
}

namespace {

struct Packet {
    std::array<Fabric::Hop, Fabric::max_hops> route;
    std::uint8_t length = 0;
    std::uint8_t hop = 0;
    std::uint8_t cls = 0;
    std::uint32_t pe = 0;
    std::uint64_t issue = 0;
    std::uint64_t seq = 0;
};

struct PeState {
    std::optional<Op> pending;
    std::uint64_t seq = 0;
    std::array<std::uint64_t, 64> txn{};
    std::uint32_t outstanding = 0;
    bool exhausted = false;
};

class Simulator {
public:
    Simulator(const Fabric& fabric, const AddressMap* map, TrafficSource* source, const SimOptions& options)
        : f_(fabric), map_(map), source_(source), opt_(options) {
        const auto& bufs = f_.buffers();
        base_.resize(bufs.size());
        std::size_t slots = 0;
        for (std::size_t i = 0; i < bufs.size(); ++i) {
            base_[i] = static_cast<std::uint32_t>(slots);
            slots += bufs[i].capacity;
        }
        slot_pkt_.assign(slots, 0);
        slot_ready_.assign(slots, 0);
        head_.assign(bufs.size(), 0);
        size_.assign(bufs.size(), 0);
        const auto& arbs = f_.arbiters();
        rr_.assign(arbs.size(), 0);
        stamp_.assign(arbs.size(), 0);
        best_.assign(arbs.size(), {});
        if (opt_.check_invariants) {
            wait_base_.resize(arbs.size());
            std::size_t w = 0;
            for (std::size_t i = 0; i < arbs.size(); ++i) {
                wait_base_[i] = static_cast<std::uint32_t>(w);
                w += arbs[i].inputs;
            }
            wait_.assign(w, 0);
            bank_last_.assign(f_.config().total_banks, ~0ull);
        }
        if (opt_.table_depth < 1 || opt_.table_depth > 64) throw InputError("transaction table depth must lie in [1, 64]");
        pes_.resize(f_.config().total_pes);
        const std::size_t nc = f_.ladder().size();
        stats_.classes.assign(nc, {});
        lat_sum_.assign(nc, 0.0);
        stats_.pes = f_.config().total_pes;
        if (source_ && source_->pes() != f_.config().total_pes)
            throw InputError("workload has " + std::to_string(source_->pes()) + " PE streams but the fabric has " +
                             std::to_string(f_.config().total_pes) + " PEs");
    }

    void cycle(std::uint64_t now) {
        response_half(now);
        if (source_) pe_step();
        request_half();
    }

    void response_half(std::uint64_t now) {
        now_ = now;
        for (std::uint8_t r = 0; r < Fabric::issue_rank; ++r) process_rank(r);
    }

    void request_half() {
        for (std::uint8_t r = Fabric::issue_rank; r < Fabric::ranks; ++r) process_rank(r);
        if (opt_.check_invariants) check_conservation();
    }

    // Issue a lone read for zero-load probing; returns false when the PE buffer is busy.
    bool inject(std::uint32_t pe, std::uint32_t bank) {
        auto& st = pes_[pe];
        if (size_[f_.pe_buffer(pe)] > 0 || st.outstanding >= opt_.table_depth) return false;
        issue(pe, st, bank);
        return true;
    }

    bool drained() const { return live_ == 0; }
    bool sources_done() const {
        for (const auto& p : pes_)
            if (!p.exhausted || p.pending) return false;
        return true;
    }
    std::uint64_t last_latency() const { return last_latency_; }

    SimStats finish(std::uint64_t cycles) {
        stats_.cycles = cycles;
        stats_.measured_cycles = cycles > opt_.warmup ? cycles - opt_.warmup : 0;
        stats_.in_flight = live_;
        double total = 0.0;
        for (std::size_t k = 0; k < stats_.classes.size(); ++k) {
            auto& cs = stats_.classes[k];
            cs.amat = cs.completed ? lat_sum_[k] / double(cs.completed) : 0.0;
            total += lat_sum_[k];
        }
        stats_.amat = stats_.completed ? total / double(stats_.completed) : 0.0;
        const double pe_cycles = double(stats_.pes) * double(stats_.measured_cycles);
        if (pe_cycles > 0) {
            stats_.throughput = double(stats_.issued) / pe_cycles;
            stats_.stall_lsu_full = double(stall_lsu_) / pe_cycles;
            stats_.stall_raw = double(stall_raw_) / pe_cycles;
            stats_.stall_contention = double(stall_cont_) / pe_cycles;
        }
        return stats_;
    }

private:
    struct Best {
        std::uint32_t dist = 0;
        std::uint32_t input = 0;
        std::uint32_t buffer = 0;
        bool grant = false;
    };

    void push(std::uint32_t b, std::uint32_t pkt, std::uint64_t ready) {
        const auto cap = f_.buffers()[b].capacity;
        const std::uint32_t slot = base_[b] + (head_[b] + size_[b]) % cap;
        slot_pkt_[slot] = pkt;
        slot_ready_[slot] = ready;
        ++size_[b];
    }

    std::uint32_t pop(std::uint32_t b) {
        const auto cap = f_.buffers()[b].capacity;
        const std::uint32_t pkt = slot_pkt_[base_[b] + head_[b]];
        head_[b] = static_cast<std::uint8_t>((head_[b] + 1) % cap);
        --size_[b];
        return pkt;
    }

    void violation(const std::string& what) {
        ++stats_.invariant_violations;
        if (stats_.first_violation.empty()) stats_.first_violation = "cycle " + std::to_string(now_) + ": " + what;
    }

    void process_rank(std::uint8_t rank) {
        const auto& arbs = f_.arbiters();
        ++epoch_;
        touched_.clear();
        drains_.clear();
        if (opt_.check_invariants) requests_.clear();
        for (std::uint32_t b : f_.rank_sources(rank)) {
            if (size_[b] == 0) continue;
            const std::uint32_t slot = base_[b] + head_[b];
            if (slot_ready_[slot] > now_) continue;
            const Packet& pk = packets_[slot_pkt_[slot]];
            const auto& hop = pk.route[pk.hop];
            const auto& a = arbs[hop.arbiter];
            if (a.rank != rank) continue;
            if (a.kind == Fabric::ArbKind::drain) {
                drains_.push_back(b);
                continue;
            }
            const std::uint32_t dist = (hop.input + a.inputs - rr_[hop.arbiter]) % a.inputs;
            if (opt_.check_invariants) requests_.push_back({hop.arbiter, hop.input});
            if (stamp_[hop.arbiter] != epoch_) {
                stamp_[hop.arbiter] = epoch_;
                best_[hop.arbiter] = {dist, hop.input, b, false};
                touched_.push_back(hop.arbiter);
            } else if (dist < best_[hop.arbiter].dist) {
                best_[hop.arbiter] = {dist, hop.input, b, false};
            }
        }
        for (std::uint32_t id : touched_) {
            const auto out = arbs[id].output;
            best_[id].grant = out == sink || size_[out] < f_.buffers()[out].capacity;
        }
        if (opt_.check_invariants) {
            for (const auto& [id, input] : requests_) {
                if (!best_[id].grant) continue;
                auto& w = wait_[wait_base_[id] + input];
                if (best_[id].input == input) {
                    w = 0;
                } else if (++w > arbs[id].inputs - 1) {
                    violation("round-robin starvation at " + arbs[id].name);
                }
            }
            stats_.invariant_checks += requests_.size();
        }
        for (std::uint32_t id : touched_) {
            const auto& bst = best_[id];
            if (!bst.grant) continue;
            const auto& a = arbs[id];
            const std::uint32_t pkt = pop(bst.buffer);
            rr_[id] = (bst.input + 1) % a.inputs;
            if (a.bank >= 0 && opt_.check_invariants) {
                if (bank_last_[a.bank] == now_) violation("bank " + std::to_string(a.bank) + " accessed twice");
                bank_last_[a.bank] = now_;
            }
            Packet& pk = packets_[pkt];
            ++pk.hop;
            if (a.output == sink)
                complete(pkt);
            else
                push(a.output, pkt, now_ + f_.buffers()[a.output].latency);
        }
        for (std::uint32_t b : drains_) {
            const std::uint32_t pkt = pop(b);
            ++packets_[pkt].hop;
            complete(pkt);
        }
    }

    void complete(std::uint32_t pkt) {
        Packet& pk = packets_[pkt];
        auto& st = pes_[pk.pe];
        for (std::uint32_t i = 0; i < st.outstanding; ++i) {
            if (st.txn[i] == pk.seq) {
                st.txn[i] = st.txn[--st.outstanding];
                break;
            }
        }
        const std::uint64_t lat = now_ - pk.issue;
        last_latency_ = lat;
        ++stats_.completed_total;
        if (pk.issue >= opt_.warmup) {
            auto& cs = stats_.classes[pk.cls];
            ++cs.completed;
            ++stats_.completed;
            lat_sum_[pk.cls] += double(lat);
            if (cs.histogram.size() <= lat) cs.histogram.resize(lat + 1, 0);
            ++cs.histogram[lat];
        }
        free_.push_back(pkt);
        --live_;
    }

    void issue(std::uint32_t pe, PeState& st, std::uint32_t bank) {
        std::uint32_t id;
        if (!free_.empty()) {
            id = free_.back();
            free_.pop_back();
        } else {
            id = static_cast<std::uint32_t>(packets_.size());
            packets_.emplace_back();
        }
        Packet& pk = packets_[id];
        pk.length = static_cast<std::uint8_t>(f_.route(pe, bank, pk.route));
        pk.hop = 0;
        pk.cls = static_cast<std::uint8_t>(f_.distance_class(pe, bank));
        pk.pe = pe;
        pk.issue = now_;
        pk.seq = st.seq;
        st.txn[st.outstanding++] = st.seq;
        push(f_.pe_buffer(pe), id, now_);
        ++live_;
        ++stats_.issued_total;
        if (now_ >= opt_.warmup) ++stats_.issued;
    }

    bool dep_met(const PeState& st, const Op& op) const {
        if (op.dep == 0) return true;
        if (op.dep > st.seq) return true;
        const std::uint64_t target = st.seq - op.dep;
        for (std::uint32_t i = 0; i < st.outstanding; ++i)
            if (st.txn[i] == target) return false;
        return true;
    }

    void pe_step() {
        const bool measure = now_ >= opt_.warmup;
        const auto npes = static_cast<std::uint32_t>(pes_.size());
        for (std::uint32_t pe = 0; pe < npes; ++pe) {
            auto& st = pes_[pe];
            if (!st.pending) {
                if (st.exhausted) continue;
                st.pending = source_->next(pe);
                if (!st.pending) {
                    st.exhausted = true;
                    continue;
                }
                if (st.pending->dep > max_dep_distance) throw InputError("dependency distance exceeds 255");
            }
            const Op& op = *st.pending;
            if (op.cycle > now_) continue;
            if (!dep_met(st, op)) {
                if (measure) ++stall_raw_;
                continue;
            }
            if (op.kind == OpKind::compute) {
                ++st.seq;
                if (measure) ++stats_.compute_ops;
                st.pending.reset();
                continue;
            }
            if (st.outstanding >= opt_.table_depth) {
                if (measure) ++stall_lsu_;
                continue;
            }
            if (size_[f_.pe_buffer(pe)] > 0) {
                if (measure) ++stall_cont_;
                continue;
            }
            const auto m = map_->map(op.address);
            issue(pe, st, map_->global_bank(m.coord));
            ++st.seq;
            st.pending.reset();
        }
    }

    void check_conservation() {
        std::uint64_t held = 0;
        for (auto s : size_) held += s;
        if (held != live_) violation("packets in buffers do not match packets in flight");
        if (stats_.issued_total != stats_.completed_total + live_) violation("issued != completed + in flight");
        ++stats_.invariant_checks;
    }

    const Fabric& f_;
    const AddressMap* map_;
    TrafficSource* source_;
    SimOptions opt_;
    std::uint64_t now_ = 0;
    std::vector<std::uint32_t> base_;
    std::vector<std::uint32_t> slot_pkt_;
    std::vector<std::uint64_t> slot_ready_;
    std::vector<std::uint8_t> head_;
    std::vector<std::uint8_t> size_;
    std::vector<std::uint32_t> rr_;
    std::vector<std::uint64_t> stamp_;
    std::vector<Best> best_;
    std::uint64_t epoch_ = 0;
    std::vector<std::uint32_t> touched_;
    std::vector<std::uint32_t> drains_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> requests_;
    std::vector<std::uint32_t> wait_base_;
    std::vector<std::uint32_t> wait_;
    std::vector<std::uint64_t> bank_last_;
    std::vector<Packet> packets_;
    std::vector<std::uint32_t> free_;
    std::uint64_t live_ = 0;
    std::vector<PeState> pes_;
    SimStats stats_;
    std::vector<double> lat_sum_;
    std::uint64_t stall_lsu_ = 0;
    std::uint64_t stall_raw_ = 0;
    std::uint64_t stall_cont_ = 0;
    std::uint64_t last_latency_ = 0;
};

}  // namespace

SimStats run(const Fabric& fabric, const AddressMap& map, TrafficSource& source, std::uint64_t cycles,
             const SimOptions& options) {
    if (!(map.config() == fabric.config())) throw InputError("address map and fabric describe different configs");
    if (cycles <= options.warmup) throw InputError("cycles must exceed the warmup window");
    Simulator sim(fabric, &map, &source, options);
    for (std::uint64_t t = 0; t < cycles; ++t) sim.cycle(t);
    auto stats = sim.finish(cycles);
    stats.finished = sim.sources_done() && sim.drained();
    return stats;
}

SimStats run_to_completion(const Fabric& fabric, const AddressMap& map, TrafficSource& source,
                           std::uint64_t max_cycles, const SimOptions& options) {
    if (!(map.config() == fabric.config())) throw InputError("address map and fabric describe different configs");
    Simulator sim(fabric, &map, &source, options);
    std::uint64_t t = 0;
    bool done = false;
    while (t < max_cycles && !done) {
        sim.cycle(t++);
        done = sim.sources_done() && sim.drained();
    }
    auto stats = sim.finish(t);
    stats.finished = done;
    return stats;
}

std::vector<std::uint32_t> measure_zero_load(const Fabric& fabric) {
    const auto& c = fabric.config();
    std::vector<std::uint32_t> out;
    for (std::size_t k = 0; k < fabric.ladder().size(); ++k) {
        std::uint32_t bank = 0;
        while (bank < c.total_banks && fabric.distance_class(0, bank) != k) ++bank;
        SimOptions opt;
        opt.warmup = 0;
        Simulator sim(fabric, nullptr, nullptr, opt);
        std::uint64_t t = 0;
        sim.response_half(0);
        sim.inject(0, bank);
        sim.request_half();
        while (!sim.drained() && t < 10'000) sim.cycle(++t);
        out.push_back(static_cast<std::uint32_t>(sim.last_latency()));
        if (out.back() != fabric.ladder()[k])
            throw ModelError("fabric class " + std::to_string(k) + " round trip is " + std::to_string(out.back()) +
                             " cycles, ladder requires " + std::to_string(fabric.ladder()[k]));
    }
    return out;
}

}  // namespace xbarscale
