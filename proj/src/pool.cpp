#include "nots/pool.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "nots/errors.hpp"
#include "nots/parallel.hpp"

namespace nots {

namespace {

constexpr char kMagic[8] = {'N', 'O', 'B', 'E', 'N', 'C', 'H', '1'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    explicit Reader(const std::string& b) : bytes_(b) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n) throw FormatError(std::string("truncated ") + what, pos_);
    }
    std::uint64_t uint(int nbytes, const char* what) {
        need(nbytes, what);
        std::uint64_t v = 0;
        for (int b = 0; b < nbytes; ++b)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
        pos_ += nbytes;
        return v;
    }
    double f64(const char* what) { return std::bit_cast<double>(uint(8, what)); }
    std::string raw(std::size_t n, const char* what) {
        need(n, what);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

private:
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

nlohmann::json metadata_json(const CandidatePool& pool) {
    const auto& m = pool.metadata();
    const auto& g = pool.grid();
    return nlohmann::json{{"format_version", 1},
                          {"bounds", {g.x0(), g.x1(), g.y0(), g.y1()}},
                          {"seed", m.seed},
                          {"generator", m.generator},
                          {"tau", m.tau},
                          {"alpha", m.alpha},
                          {"a_low", m.a_low},
                          {"a_high", m.a_high},
                          {"forcing", m.forcing}};
}

}  // namespace

CandidatePool::CandidatePool(Grid2D grid, std::vector<PoolInstance> instances, PoolMetadata meta)
    : grid_(std::move(grid)), instances_(std::move(instances)), meta_(std::move(meta)) {
    if (instances_.empty()) throw ValidationError("candidate pool must be nonempty");
    for (const auto& inst : instances_)
        if (!(inst.input.grid() == grid_) || !(inst.output.grid() == grid_))
            throw StructuralError("pool instances must share the pool grid");
}

DarcyInstance generate_instance(const GRFConfig& cfg, double a_low, double a_high, double g, std::uint64_t seed,
                                std::size_t index) {
    Rng rng(seed, index);
    PermeabilityField a = binarize(sample_grf(cfg, rng), a_low, a_high);
    ScalarField u = solve_darcy(a, g);
    return DarcyInstance{std::move(a), std::move(u), g};
}

CandidatePool generate_pool(std::size_t n, const GRFConfig& cfg, double a_low, double a_high, double g,
                            std::uint64_t seed, unsigned threads) {
    if (n < 1) throw ValidationError("pool size must be at least 1");
    cfg.validate();
    std::vector<std::optional<PoolInstance>> slots(n);
    parallel_for(
        n,
        [&](std::size_t i) {
            try {
                DarcyInstance d = generate_instance(cfg, a_low, a_high, g, seed, i);
                slots[i].emplace(PoolInstance{d.a.field(), std::move(d.u)});
            } catch (const SolverError& e) {
                throw SolverError("instance " + std::to_string(i) + ": " + e.what(), e.residual(), e.iterations());
            }
        },
        threads);
    std::vector<PoolInstance> inst;
    inst.reserve(n);
    for (auto& s : slots) inst.push_back(std::move(*s));
    PoolMetadata meta{seed, "darcy", cfg.tau, cfg.alpha, a_low, a_high, g};
    return CandidatePool(cfg.grid, std::move(inst), meta);
}

std::string serialize_pool(const CandidatePool& pool) {
    const Grid2D& g = pool.grid();
    std::string out(kMagic, kMagic + 8);
    put_u32(out, static_cast<std::uint32_t>(g.nx()));
    put_u32(out, static_cast<std::uint32_t>(g.ny()));
    put_u32(out, static_cast<std::uint32_t>(pool.size()));
    put_u32(out, kPoolFlagIndex | kPoolFlagMetadata);
    const std::size_t record = 2 * g.size() * 8;
    out.reserve(kPoolHeaderBytes + pool.size() * (record + 8) + 512);
    for (const auto& inst : pool.instances()) {
        for (double v : inst.input.values()) put_f64(out, v);
        for (double v : inst.output.values()) put_f64(out, v);
    }
    for (std::size_t i = 0; i < pool.size(); ++i) put_u64(out, kPoolHeaderBytes + i * record);
    const std::string meta = metadata_json(pool).dump();
    put_u64(out, meta.size());
    out += meta;
    return out;
}

CandidatePool parse_pool(const std::string& bytes) {
    Reader r(bytes);
    r.need(8, "magic");
    if (std::memcmp(bytes.data(), kMagic, 7) != 0) throw FormatError("bad magic", 0);
    if (bytes[7] != kMagic[7]) throw FormatError("unsupported format version", 7);
    r.raw(8, "magic");
    const auto nx = static_cast<int>(r.uint(4, "header"));
    const auto ny = static_cast<int>(r.uint(4, "header"));
    const std::size_t header_n = 16;
    const std::uint64_t n = r.uint(4, "header");
    const auto flags = static_cast<std::uint32_t>(r.uint(4, "header"));
    if (nx < 2 || ny < 2) throw FormatError("invalid grid size", 8);
    if (n < 1) throw FormatError("empty pool", header_n);
    if (flags & ~(kPoolFlagIndex | kPoolFlagMetadata)) throw FormatError("unknown flags", 20);

    const std::size_t npts = static_cast<std::size_t>(nx) * ny;
    const std::size_t record = 2 * npts * 8;
    if (r.remaining() / record < n) throw FormatError("truncated payload", r.offset() + r.remaining());
    std::vector<std::vector<double>> a(n), u(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i].resize(npts);
        u[i].resize(npts);
        for (auto& v : a[i]) v = r.f64("payload");
        for (auto& v : u[i]) v = r.f64("payload");
    }
    if (flags & kPoolFlagIndex) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t at = r.offset();
            if (r.uint(8, "index") != kPoolHeaderBytes + i * record) throw FormatError("index entry mismatch", at);
        }
    }
    Grid2D grid(nx, ny);
    PoolMetadata meta;
    if (flags & kPoolFlagMetadata) {
        const std::uint64_t len = r.uint(8, "metadata length");
        const std::size_t at = r.offset();
        const std::string text = r.raw(len, "metadata");
        try {
            const auto j = nlohmann::json::parse(text);
            if (j.at("format_version").get<int>() != 1) throw FormatError("unsupported metadata version", at);
            const auto b = j.at("bounds");
            grid = Grid2D(nx, ny, b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                          b.at(3).get<double>());
            meta.seed = j.at("seed").get<std::uint64_t>();
            meta.generator = j.at("generator").get<std::string>();
            meta.tau = j.at("tau").get<double>();
            meta.alpha = j.at("alpha").get<double>();
            meta.a_low = j.at("a_low").get<double>();
            meta.a_high = j.at("a_high").get<double>();
            meta.forcing = j.at("forcing").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string("bad metadata: ") + e.what(), at);
        } catch (const ValidationError& e) {
            throw FormatError(std::string("bad metadata: ") + e.what(), at);
        }
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes", r.offset());

    std::vector<PoolInstance> inst;
    inst.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            inst.push_back(PoolInstance{ScalarField(grid, std::move(a[i])), ScalarField(grid, std::move(u[i]))});
        } catch (const StructuralError&) {
            throw FormatError("non-finite value in record " + std::to_string(i), kPoolHeaderBytes + i * record);
        }
    }
    return CandidatePool(grid, std::move(inst), meta);
}

void write_pool(const CandidatePool& pool, const std::string& path) {
    const std::string bytes = serialize_pool(pool);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

CandidatePool read_pool(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_pool(ss.str());
}

std::uint64_t pool_digest(const CandidatePool& pool) {
    const std::string bytes = serialize_pool(pool);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex_digest(std::uint64_t d) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
    return buf;
}

}  // namespace nots
