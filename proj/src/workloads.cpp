#include "xbarscale/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "xbarscale/error.hpp"

namespace xbarscale {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed ^ (stream * 0xd1342543de82ef95ull + 0x632be59bd9b4e019ull);
    for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return double(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) return 0;
    // Lemire's nearly-divisionless method
    unsigned __int128 m = (unsigned __int128)next() * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (lo < threshold) {
            m = (unsigned __int128)next() * bound;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::string to_string(PatternKind kind) {
    switch (kind) {
        case PatternKind::uniform:
            return "uniform";
        case PatternKind::local_tile:
            return "local_tile";
        case PatternKind::gemm_tiled:
            return "gemm_tiled";
        case PatternKind::fft_radix4:
            return "fft_radix4";
        case PatternKind::csr_spmmadd:
            return "csr_spmmadd";
        case PatternKind::trace:
            return "trace";
    }
    return "uniform";
}

PatternKind parse_pattern(const std::string& name) {
    for (auto k : {PatternKind::uniform, PatternKind::local_tile, PatternKind::gemm_tiled, PatternKind::fft_radix4,
                   PatternKind::csr_spmmadd, PatternKind::trace})
        if (to_string(k) == name) return k;
    if (name == "local") return PatternKind::local_tile;
    if (name == "gemm") return PatternKind::gemm_tiled;
    if (name == "fft") return PatternKind::fft_radix4;
    if (name == "csr") return PatternKind::csr_spmmadd;
    throw InputError("unknown access pattern '" + name + "'");
}

namespace {

void check_rate(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("injection rate must lie in [0, 1]");
}

// Bernoulli(p) arrivals per PE per cycle; addresses drawn by `Draw`.
template <typename Draw>
class RandomSource : public TrafficSource {
public:
    RandomSource(std::uint32_t pes, double p, std::uint64_t seed, Draw draw)
        : p_(p), seed_(seed), draw_(std::move(draw)), cursor_(pes, 0) {
        rngs_.reserve(pes);
        for (std::uint32_t i = 0; i < pes; ++i) rngs_.emplace_back(seed_, i);
    }

    std::uint32_t pes() const override { return static_cast<std::uint32_t>(cursor_.size()); }

    std::optional<Op> next(std::uint32_t pe) override {
        if (p_ <= 0.0) return std::nullopt;
        auto& rng = rngs_[pe];
        auto& t = cursor_[pe];
        if (p_ < 1.0)
            while (!rng.bernoulli(p_)) ++t;
        Op op;
        op.cycle = t++;
        op.pe = pe;
        op.kind = OpKind::read;
        op.address = draw_(pe, rng);
        return op;
    }

private:
    double p_;
    std::uint64_t seed_;
    Draw draw_;
    std::vector<Rng> rngs_;
    std::vector<std::uint64_t> cursor_;
};

template <typename Draw>
std::unique_ptr<TrafficSource> make_random(std::uint32_t pes, double p, std::uint64_t seed, Draw draw) {
    return std::make_unique<RandomSource<Draw>>(pes, p, seed, std::move(draw));
}

class TraceSource : public TrafficSource {
public:
    TraceSource(const Trace& trace, std::uint32_t pes) : streams_(pes), pos_(pes, 0) {
        for (const auto& op : trace) {
            if (op.pe >= pes) throw InputError("trace op targets PE " + std::to_string(op.pe) + " beyond the fabric");
            if (op.dep > max_dep_distance) throw InputError("trace dependency distance exceeds 255");
            streams_[op.pe].push_back(op);
        }
    }

    std::uint32_t pes() const override { return static_cast<std::uint32_t>(streams_.size()); }

    std::optional<Op> next(std::uint32_t pe) override {
        if (pos_[pe] >= streams_[pe].size()) return std::nullopt;
        return streams_[pe][pos_[pe]++];
    }

private:
    std::vector<std::vector<Op>> streams_;
    std::vector<std::size_t> pos_;
};

Trace drain(TrafficSource& src, std::uint64_t cycles) {
    Trace out;
    for (std::uint32_t pe = 0; pe < src.pes(); ++pe) {
        while (auto op = src.next(pe)) {
            if (op->cycle >= cycles) break;
            out.push_back(*op);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Op& a, const Op& b) { return a.cycle < b.cycle; });
    return out;
}

std::uint64_t interleaved_words(const AddressMap& map) {
    const std::uint64_t w = map.interleaved_region_bytes() / AddressMap::word_bytes;
    if (w == 0) throw InputError("the interleaved region is empty");
    return w;
}

// Op builder for one PE stream; pacing spreads ops 1/p cycles apart.
class Stream {
public:
    Stream(Trace& out, std::uint32_t pe, double p) : out_(out), pe_(pe), p_(p) {}

    std::uint64_t position() const { return index_; }

    void add(OpKind kind, std::uint64_t address, std::uint32_t dep = 0) {
        Op op;
        op.cycle = p_ >= 1.0 ? 0 : static_cast<std::uint64_t>(std::floor(double(index_) / p_));
        op.pe = pe_;
        op.kind = kind;
        op.address = address;
        op.dep = dep;
        out_.push_back(op);
        ++index_;
    }
    void load(std::uint64_t a, std::uint32_t dep = 0) { add(OpKind::read, a, dep); }
    void store(std::uint64_t a, std::uint32_t dep = 0) { add(OpKind::write, a, dep); }
    void compute(std::uint32_t dep = 0) { add(OpKind::compute, 0, dep); }

private:
    Trace& out_;
    std::uint32_t pe_;
    double p_;
    std::uint64_t index_ = 0;
};

}  // namespace

std::unique_ptr<TrafficSource> uniform_source(const AddressMap& map, double p, std::uint64_t seed) {
    check_rate(p);
    const std::uint64_t words = interleaved_words(map);
    const std::uint64_t base = map.interleaved_base();
    return make_random(map.config().total_pes, p, seed,
                       [=](std::uint32_t, Rng& rng) { return base + rng.below(words) * AddressMap::word_bytes; });
}

std::unique_ptr<TrafficSource> local_tile_source(const AddressMap& map, double p, std::uint64_t seed) {
    check_rate(p);
    const std::uint64_t words = map.slice_bytes() / AddressMap::word_bytes;
    if (words == 0) throw InputError("the sequential region is empty; local-tile traffic needs per-tile slices");
    const std::uint32_t alpha = map.config().pes_per_tile;
    return make_random(map.config().total_pes, p, seed, [=, m = map](std::uint32_t pe, Rng& rng) {
        return m.slice_address(pe / alpha, rng.below(words));
    });
}

std::unique_ptr<TrafficSource> trace_source(const Trace& trace, std::uint32_t pes) {
    return std::make_unique<TraceSource>(trace, pes);
}

Trace gen_uniform(const AddressMap& map, double p, std::uint64_t seed, std::uint64_t cycles) {
    auto src = uniform_source(map, p, seed);
    return drain(*src, cycles);
}

Trace gen_local_tile(const AddressMap& map, double p, std::uint64_t seed, std::uint64_t cycles) {
    auto src = local_tile_source(map, p, seed);
    return drain(*src, cycles);
}

Trace gen_gemm_tiled(const AddressMap& map, std::uint32_t m, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw InputError("injection rate must lie in (0, 1]");
    if (m == 0 || m % 4 != 0) throw InputError("matrix dimension must be a positive multiple of 4");
    const std::uint64_t mm = std::uint64_t(m) * m;
    if (3 * mm > interleaved_words(map))
        throw InputError("three " + std::to_string(m) + "x" + std::to_string(m) +
                         " matrices do not fit in the interleaved region");
    const std::uint64_t w = AddressMap::word_bytes;
    const std::uint64_t a_base = map.interleaved_base();
    const std::uint64_t b_base = a_base + mm * w;
    const std::uint64_t c_base = b_base + mm * w;
    const std::uint32_t pes = map.config().total_pes;
    const std::uint32_t blocks = m / 4;

    std::vector<Trace> per_pe(pes);
    std::vector<Stream> streams;
    streams.reserve(pes);
    for (std::uint32_t pe = 0; pe < pes; ++pe) streams.emplace_back(per_pe[pe], pe, p);
    for (std::uint32_t blk = 0; blk < blocks * blocks; ++blk) {
        const std::uint32_t bi = blk / blocks, bj = blk % blocks;
        auto& s = streams[blk % pes];
        for (std::uint32_t k = 0; k < m; ++k) {
            for (std::uint32_t i = 0; i < 4; ++i) s.load(a_base + (std::uint64_t(bi * 4 + i) * m + k) * w);
            for (std::uint32_t j = 0; j < 4; ++j) s.load(b_base + (std::uint64_t(k) * m + bj * 4 + j) * w);
            // MAC (i, j) sits at offset 8 + 4i + j; first uses of A_i and B_j wait for their loads
            for (std::uint32_t i = 0; i < 4; ++i)
                for (std::uint32_t j = 0; j < 4; ++j) {
                    std::uint32_t dep = 0;
                    if (i == 0) dep = 4;
                    else if (j == 0) dep = 8 + 3 * i;
                    s.compute(dep);
                }
        }
        for (std::uint32_t i = 0; i < 4; ++i)
            for (std::uint32_t j = 0; j < 4; ++j) s.store(c_base + (std::uint64_t(bi * 4 + i) * m + bj * 4 + j) * w);
    }
    Trace out;
    for (auto& t : per_pe) out.insert(out.end(), t.begin(), t.end());
    return out;
}

std::uint64_t fft_stride(std::uint32_t n, std::uint32_t stage) {
    if (n < 4 || !is_pow2(n) || log2_floor(n) % 2 != 0) throw InputError("FFT size must be a power of 4");
    const std::uint32_t stages = log2_floor(n) / 2;
    if (stage >= stages) throw InputError("FFT stage out of range");
    return n / (4ull << (2 * stage));
}

Trace gen_fft_radix4(const AddressMap& map, std::uint32_t n, std::uint32_t stage) {
    const std::uint64_t stride = fft_stride(n, stage);
    const std::uint32_t pes = map.config().total_pes;
    const std::uint32_t cores_per_fft = std::max<std::uint32_t>(1, n / 16);
    const std::uint32_t ffts = std::max<std::uint32_t>(1, pes / cores_per_fft);
    if (std::uint64_t(ffts) * n > interleaved_words(map))
        throw InputError("FFT data does not fit in the interleaved region");
    const std::uint64_t w = AddressMap::word_bytes;
    std::vector<Trace> per_pe(pes);
    std::vector<Stream> streams;
    streams.reserve(pes);
    for (std::uint32_t pe = 0; pe < pes; ++pe) streams.emplace_back(per_pe[pe], pe, 1.0);
    for (std::uint32_t f = 0; f < ffts; ++f) {
        const std::uint64_t base = map.interleaved_base() + std::uint64_t(f) * n * w;
        for (std::uint64_t b = 0; b < n / 4; ++b) {
            const std::uint64_t first = (b / stride) * 4 * stride + b % stride;
            const std::uint32_t pe = static_cast<std::uint32_t>((f * cores_per_fft + b / 4) % pes);
            auto& s = streams[pe];
            for (std::uint32_t q = 0; q < 4; ++q) s.load(base + (first + q * stride) * w);
            for (std::uint32_t q = 0; q < 4; ++q) s.compute(4);
            for (std::uint32_t q = 0; q < 4; ++q) s.compute();
            for (std::uint32_t q = 0; q < 4; ++q) s.store(base + (first + q * stride) * w);
        }
    }
    Trace out;
    for (auto& t : per_pe) out.insert(out.end(), t.begin(), t.end());
    return out;
}

Trace gen_csr_spmmadd(const AddressMap& map, std::uint32_t rows, std::uint32_t nnz, std::uint64_t seed) {
    const std::uint64_t words = interleaved_words(map);
    const std::uint32_t pes = map.config().total_pes;
    const std::uint64_t w = AddressMap::word_bytes;
    const std::uint64_t total_rows = std::uint64_t(rows) * pes;
    const std::uint64_t cols = std::max<std::uint64_t>(4 * std::uint64_t(nnz), 64);
    const std::uint64_t elems = total_rows * nnz;
    // array bases in words; the arrays wrap around the interleaved region when they exceed it
    const std::uint64_t a_col = 0, a_val = elems, b_col = 2 * elems, b_val = 3 * elems;
    const std::uint64_t c_col = 4 * elems, c_val = 6 * elems, c_ptr = 8 * elems;
    auto addr = [&](std::uint64_t word) { return map.interleaved_base() + (word % words) * w; };

    Trace out;
    for (std::uint32_t pe = 0; pe < pes; ++pe) {
        Rng rng(seed, pe);
        Stream s(out, pe, 1.0);
        for (std::uint32_t r = 0; r < rows; ++r) {
            const std::uint64_t row = std::uint64_t(pe) * rows + r;
            auto draw = [&] {
                std::vector<std::uint64_t> c(nnz);
                for (auto& x : c) x = rng.below(cols);
                std::sort(c.begin(), c.end());
                return c;
            };
            const auto ca = draw();
            const auto cb = draw();
            const std::uint64_t ea = row * nnz, eb = row * nnz, ec = row * 2 * nnz;
            std::uint32_t i = 0, j = 0, k = 0;
            bool need_a = nnz > 0, need_b = nnz > 0;
            std::uint64_t last_a = 0, last_b = 0;
            while (i < nnz || j < nnz) {
                if (need_a && i < nnz) {
                    s.load(addr(a_col + ea + i));
                    last_a = s.position();
                    need_a = false;
                }
                if (need_b && j < nnz) {
                    s.load(addr(b_col + eb + j));
                    last_b = s.position();
                    need_b = false;
                }
                const std::uint64_t newest = std::max(last_a, last_b);
                s.compute(static_cast<std::uint32_t>(s.position() + 1 - newest));  // compare
                s.compute();                                                        // branch
                const bool take_a = j >= nnz || (i < nnz && ca[i] <= cb[j]);
                const bool take_b = i >= nnz || (j < nnz && cb[j] <= ca[i]);
                if (take_a) s.load(addr(a_val + ea + i));
                if (take_b) s.load(addr(b_val + eb + j));
                const std::uint64_t v = s.position();
                s.compute(1);  // add or move
                s.compute();   // index bookkeeping
                s.compute();
                s.compute();
                s.store(addr(c_col + ec + k));
                s.store(addr(c_val + ec + k), static_cast<std::uint32_t>(s.position() - v));
                ++k;
                if (take_a) {
                    ++i;
                    need_a = true;
                }
                if (take_b) {
                    ++j;
                    need_b = true;
                }
            }
            s.compute();
            s.store(addr(c_ptr + row + 1));
        }
    }
    return out;
}

std::unique_ptr<TrafficSource> make_source(const AddressMap& map, const AccessPattern& pat) {
    const std::uint32_t pes = map.config().total_pes;
    switch (pat.kind) {
        case PatternKind::uniform:
            return uniform_source(map, pat.p, pat.seed);
        case PatternKind::local_tile:
            return local_tile_source(map, pat.p, pat.seed);
        case PatternKind::gemm_tiled:
            return trace_source(gen_gemm_tiled(map, pat.matrix_dim, pat.p), pes);
        case PatternKind::fft_radix4:
            return trace_source(gen_fft_radix4(map, pat.fft_points, pat.fft_stage), pes);
        case PatternKind::csr_spmmadd:
            return trace_source(gen_csr_spmmadd(map, pat.csr_rows, pat.csr_nnz_per_row, pat.seed), pes);
        case PatternKind::trace: {
            if (pat.trace_path.empty()) break;
            std::ifstream in(pat.trace_path);
            if (!in) throw InputError("cannot open trace '" + pat.trace_path + "'");
            return trace_source(read_trace_jsonl(in), pes);
        }
    }
    throw InputError("trace patterns need a trace file");
}

namespace {

const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::read:
            return "read";
        case OpKind::write:
            return "write";
        case OpKind::compute:
            return "compute";
    }
    return "read";
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const Trace& trace) {
    for (const auto& op : trace) {
        nlohmann::ordered_json j;
        j["cycle"] = op.cycle;
        j["pe"] = op.pe;
        j["op"] = op_name(op.kind);
        j["address"] = op.address;
        j["dep"] = op.dep;
        out << j.dump() << '\n';
    }
}

Trace read_trace_jsonl(std::istream& in) {
    Trace out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Op op;
            op.cycle = j.value("cycle", std::uint64_t{0});
            op.pe = j.at("pe").get<std::uint32_t>();
            const auto kind = j.value("op", std::string("read"));
            if (kind == "read" || kind == "load")
                op.kind = OpKind::read;
            else if (kind == "write" || kind == "store")
                op.kind = OpKind::write;
            else if (kind == "compute")
                op.kind = OpKind::compute;
            else
                throw InputError("unknown op '" + kind + "'");
            op.address = j.value("address", std::uint64_t{0});
            op.dep = j.value("dep", std::uint32_t{0});
            out.push_back(op);
        } catch (const nlohmann::json::exception& e) {
            throw InputError("trace line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace xbarscale
