#include "xbarscale/topology.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "xbarscale/error.hpp"

namespace xbarscale {

bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::uint32_t log2_floor(std::uint64_t v) {
    std::uint32_t r = 0;
    while (v >>= 1) ++r;
    return r;
}

std::uint64_t next_pow2(std::uint64_t v) {
    if (v <= 1) return v;
    std::uint64_t p = 1;
    while (p < v) p <<= 1;
    return p;
}

std::size_t HierarchyConfig::classes() const {
    return 1 + (tiles_per_subgroup > 1) + (subgroups_per_group > 1) + (groups > 1);
}

std::string HierarchyConfig::label() const {
    std::ostringstream os;
    os << pes_per_tile << 'C';
    if (tiles_per_subgroup > 1) os << '-' << tiles_per_subgroup << 'T';
    if (subgroups_per_group > 1) os << '-' << subgroups_per_group << "SG";
    if (groups > 1) os << '-' << groups << 'G';
    return os.str();
}

HierarchyConfig make_config(std::uint32_t alpha, std::uint32_t beta, std::uint32_t gamma,
                            std::uint32_t delta, std::uint32_t banking_factor) {
    HierarchyConfig c;
    c.pes_per_tile = alpha;
    c.tiles_per_subgroup = beta;
    c.subgroups_per_group = gamma;
    c.groups = delta;
    c.banking_factor = banking_factor;
    return validate(c);
}

HierarchyConfig parse_label(const std::string& label, std::uint32_t banking_factor) {
    static const std::regex part(R"((\d+)(C|T|SG|G))");
    HierarchyConfig c;
    c.banking_factor = banking_factor;
    std::istringstream in(label);
    std::string tok;
    bool seen_c = false;
    int last = -1;
    while (std::getline(in, tok, '-')) {
        std::smatch m;
        if (!std::regex_match(tok, m, part) || m[1].length() > 9)
            throw InputError("malformed hierarchy label '" + label + "'");
        auto v = static_cast<std::uint32_t>(std::stoul(m[1].str()));
        const std::string unit = m[2].str();
        const int order = unit == "C" ? 0 : unit == "T" ? 1 : unit == "SG" ? 2 : 3;
        if (order <= last) throw InputError("hierarchy label '" + label + "' must list C, T, SG, G once each, in order");
        last = order;
        if (order == 0) {
            c.pes_per_tile = v;
            seen_c = true;
        } else if (order == 1) {
            c.tiles_per_subgroup = v;
        } else if (order == 2) {
            c.subgroups_per_group = v;
        } else {
            c.groups = v;
        }
    }
    if (!seen_c) throw InputError("malformed hierarchy label '" + label + "'");
    return validate(c);
}

HierarchyConfig validate(HierarchyConfig c) {
    std::vector<std::string> problems;
    auto check = [&](const char* name, std::uint32_t v) {
        if (v == 0)
            problems.push_back(std::string(name) + " must be >= 1");
        else if (!is_pow2(v))
            problems.push_back(std::string(name) + " = " + std::to_string(v) + " is not a power of two");
    };
    check("pes_per_tile", c.pes_per_tile);
    check("tiles_per_subgroup", c.tiles_per_subgroup);
    check("subgroups_per_group", c.subgroups_per_group);
    check("groups", c.groups);
    if (c.banking_factor < 1) problems.push_back("banking_factor must be >= 1");
    if (c.bank_words < 1) problems.push_back("bank_words must be >= 1");
    if (problems.empty()) {
        std::uint64_t pes = std::uint64_t(c.pes_per_tile) * c.tiles_per_subgroup * c.subgroups_per_group * c.groups;
        if (pes * c.banking_factor > (1ull << 31)) problems.push_back("hierarchy too large");
    }
    if (!problems.empty()) {
        std::string msg = "invalid hierarchy config:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw InputError(msg);
    }
    c.total_tiles = c.tiles_per_subgroup * c.subgroups_per_group * c.groups;
    c.total_pes = c.pes_per_tile * c.total_tiles;
    c.total_banks = c.total_pes * c.banking_factor;
    c.banks_per_tile = c.pes_per_tile * c.banking_factor;
    c.levels = {Level::tile};
    if (c.tiles_per_subgroup > 1) c.levels.push_back(Level::subgroup);
    if (c.subgroups_per_group > 1) c.levels.push_back(Level::group);
    if (c.groups > 1) c.levels.push_back(Level::cluster);
    return c;
}

LatencyLadder default_ladder(const HierarchyConfig& config) {
    LatencyLadder l;
    for (std::size_t i = 0; i < config.classes(); ++i) l.push_back(static_cast<std::uint32_t>(2 * i + 1));
    return l;
}

void check_ladder(const HierarchyConfig& config, const LatencyLadder& ladder) {
    if (ladder.size() != config.classes())
        throw InputError("ladder has " + std::to_string(ladder.size()) + " entries but " + config.label() +
                         " has " + std::to_string(config.classes()) + " distance classes");
    if (ladder.front() != 1) throw InputError("ladder must start at 1");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (ladder[i] % 2 == 0) throw InputError("ladder entries must be odd");
        if (i > 0 && ladder[i] <= ladder[i - 1]) throw InputError("ladder must be strictly increasing");
    }
}

std::vector<std::uint64_t> bank_population(const HierarchyConfig& c) {
    const std::uint64_t tile = c.banks_per_tile;
    const std::uint64_t subgroup = tile * c.tiles_per_subgroup;
    const std::uint64_t group = subgroup * c.subgroups_per_group;
    const std::uint64_t cluster = group * c.groups;
    std::vector<std::uint64_t> pop{tile};
    if (c.tiles_per_subgroup > 1) pop.push_back(subgroup - tile);
    if (c.subgroups_per_group > 1) pop.push_back(group - subgroup);
    if (c.groups > 1) pop.push_back(cluster - group);
    return pop;
}

double zero_load_latency(const HierarchyConfig& config, const LatencyLadder& ladder) {
    check_ladder(config, ladder);
    const auto pop = bank_population(config);
    double sum = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) sum += double(pop[i]) * ladder[i];
    return sum / double(config.total_banks);
}

std::uint32_t remote_ports_per_tile(const HierarchyConfig& c) {
    std::uint32_t r = 0;
    if (c.tiles_per_subgroup > 1) r += 1;
    if (c.subgroups_per_group > 1) r += c.subgroups_per_group - 1;
    if (c.groups > 1) r += c.groups - 1;
    return r;
}

ComplexityReport complexity_metrics(const HierarchyConfig& c, TileAccounting accounting) {
    ComplexityReport rep;
    const std::uint32_t alpha = c.pes_per_tile;
    const std::uint32_t banks = c.banks_per_tile;
    const std::uint32_t r_out = remote_ports_per_tile(c);
    // remote inputs reach the banks through a binary tree
    const auto r_in = static_cast<std::uint32_t>(next_pow2(r_out));

    if (accounting == TileAccounting::pe_inputs_only || r_out == 0) {
        rep.instances.push_back({"tile", c.total_tiles, alpha, banks});
    } else {
        rep.instances.push_back({"tile", c.total_tiles, alpha + r_in, banks});
        rep.instances.push_back({"tile-demux", c.total_tiles, alpha, r_out});
    }
    const std::uint32_t beta = c.tiles_per_subgroup;
    const std::uint32_t gamma = c.subgroups_per_group;
    const std::uint32_t delta = c.groups;
    if (beta > 1) rep.instances.push_back({"subgroup", std::uint64_t(gamma) * delta, beta, beta});
    if (gamma > 1)
        rep.instances.push_back({"inter-subgroup", std::uint64_t(delta) * gamma * (gamma - 1), beta, beta});
    if (delta > 1)
        rep.instances.push_back({"inter-group", std::uint64_t(delta) * (delta - 1), beta * gamma, beta * gamma});

    const CrossbarInstance* crit = nullptr;
    for (const auto& inst : rep.instances) {
        rep.total_complexity += inst.count * inst.leaves();
        if (inst.name == "tile-demux") continue;
        if (!crit || inst.leaves() > crit->leaves()) crit = &inst;
    }
    rep.critical_complexity = crit->leaves();
    rep.critical_instance = crit->name;
    rep.critical_comb_delay = std::log2(double(crit->inputs)) + std::log2(double(crit->outputs));
    return rep;
}

std::uint32_t hierarchy_levels(const HierarchyConfig& c) {
    return 1 + (c.tiles_per_subgroup > 1) + (c.subgroups_per_group > 1) + (c.groups > 1);
}

namespace {

bool allowed(const std::vector<std::uint32_t>& set, std::uint32_t v) {
    return set.empty() || std::find(set.begin(), set.end(), v) != set.end();
}

}  // namespace

std::vector<HierarchyConfig> enumerate_hierarchies(std::uint32_t total_pes, std::uint32_t banking_factor,
                                                   const LevelBounds& bounds) {
    if (!is_pow2(total_pes)) throw InputError("total_pes must be a power of two");
    std::vector<HierarchyConfig> out;
    for (std::uint32_t a = 1; a <= total_pes; a <<= 1) {
        for (std::uint32_t b = 1; a * b <= total_pes; b <<= 1) {
            for (std::uint32_t g = 1; a * b * g <= total_pes; g <<= 1) {
                const std::uint32_t d = total_pes / (a * b * g);
                if (!allowed(bounds.pes_per_tile, a) || !allowed(bounds.tiles_per_subgroup, b) ||
                    !allowed(bounds.subgroups_per_group, g) || !allowed(bounds.groups, d))
                    continue;
                auto c = make_config(a, b, g, d, banking_factor);
                const auto lv = hierarchy_levels(c);
                if (lv < bounds.min_levels || lv > bounds.max_levels) continue;
                out.push_back(c);
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const HierarchyConfig& x, const HierarchyConfig& y) {
        return hierarchy_levels(x) < hierarchy_levels(y);
    });
    return out;
}

}  // namespace xbarscale
