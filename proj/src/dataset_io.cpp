#include "geokernel/dataset_io.hpp"

#include "geokernel/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace geokernel {

namespace {

constexpr char kMagic[4] = {'G', 'K', 'D', '1'};

class Writer {
public:
    template <class U>
    void put(U v) {
        static_assert(std::is_unsigned_v<U>);
        for (std::size_t b = 0; b < sizeof(U); ++b) out_.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
    }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
    void bytes(const char* p, std::size_t n) { out_.append(p, n); }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& in) : in_(in) {}

    template <class U>
    U get() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t b = 0; b < sizeof(U); ++b) {
            v |= static_cast<U>(static_cast<unsigned char>(in_[pos_ + b])) << (8 * b);
        }
        pos_ += sizeof(U);
        return v;
    }
    double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
    void expect_magic() {
        need(4);
        if (std::memcmp(in_.data(), kMagic, 4) != 0) throw ValidationError("dataset: bad magic bytes");
        pos_ += 4;
    }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > in_.size()) throw ValidationError("dataset: file is truncated");
    }
    const std::string& in_;
    std::size_t pos_ = 0;
};

std::size_t ambient(const ManifoldDescriptor& d) {
    return d.kind == ManifoldKind::Sphere ? 3 : static_cast<std::size_t>(d.dim);
}

}  // namespace

std::string encode_dataset(const TrajectoryDataset& ds) {
    const std::size_t n = ds.N(), amb = ambient(ds.manifold);
    Writer w;
    w.bytes(kMagic, 4);
    w.put<std::uint32_t>(kDatasetVersion);
    w.put(static_cast<std::uint32_t>(ds.manifold.kind));
    w.put(static_cast<std::uint32_t>(ds.manifold.dim));
    w.f64(ds.manifold.radius);
    w.put(static_cast<std::uint32_t>(ds.manifold.convention));
    w.f64(ds.manifold.interaction_cap);
    w.put<std::uint64_t>(n);
    w.put<std::uint64_t>(ds.type_count);
    w.put<std::uint64_t>(ds.L());
    w.put<std::uint64_t>(ds.M());
    w.f64(ds.T);
    w.put<std::uint64_t>(ds.seed);
    for (int t : ds.types) w.put(static_cast<std::uint32_t>(t));
    for (double t : ds.times) w.f64(t);
    for (const auto& run : ds.runs) {
        if (run.snaps.size() != ds.L()) throw ValidationError("dataset: run has the wrong number of snapshots");
        for (const auto& snap : run.snaps) {
            if (snap.x.size() != n || snap.v.size() != n) throw ValidationError("dataset: snapshot has the wrong size");
            for (const auto* arr : {&snap.x, &snap.v}) {
                for (const auto& p : *arr) {
                    for (std::size_t a = 0; a < amb; ++a) w.f64(p[static_cast<Eigen::Index>(a)]);
                }
            }
        }
    }
    return w.take();
}

TrajectoryDataset decode_dataset(const std::string& bytes) {
    Reader r(bytes);
    r.expect_magic();
    if (r.get<std::uint32_t>() != kDatasetVersion) throw ValidationError("dataset: unsupported version");
    TrajectoryDataset ds;
    const auto kind = r.get<std::uint32_t>();
    if (kind > 2) throw ValidationError("dataset: unknown manifold kind");
    ds.manifold.kind = static_cast<ManifoldKind>(kind);
    ds.manifold.dim = static_cast<int>(r.get<std::uint32_t>());
    ds.manifold.radius = r.f64();
    const auto conv = r.get<std::uint32_t>();
    if (conv > 1) throw ValidationError("dataset: unknown distance convention");
    ds.manifold.convention = static_cast<DistanceConvention>(conv);
    ds.manifold.interaction_cap = r.f64();
    const auto n = r.get<std::uint64_t>();
    ds.type_count = r.get<std::uint64_t>();
    const auto L = r.get<std::uint64_t>();
    const auto M = r.get<std::uint64_t>();
    ds.T = r.f64();
    ds.seed = r.get<std::uint64_t>();
    Manifold check(ds.manifold);  // validates the descriptor
    (void)check;

    const std::size_t amb = ambient(ds.manifold);
    // Exact payload size, checked before allocating anything.
    const long double expect = 4.0L * n + 8.0L * L + 16.0L * M * L * n * amb;
    if (expect != static_cast<long double>(r.remaining())) {
        throw ValidationError("dataset: payload length does not match the header counts");
    }
    ds.types.resize(n);
    for (auto& t : ds.types) {
        const auto v = r.get<std::uint32_t>();
        if (v >= ds.type_count) throw ValidationError("dataset: type label out of range");
        t = static_cast<int>(v);
    }
    ds.times.resize(L);
    for (auto& t : ds.times) t = r.f64();
    ds.runs.resize(M);
    for (auto& run : ds.runs) {
        run.times = ds.times;
        run.snaps.resize(L);
        for (auto& snap : run.snaps) {
            for (auto* arr : {&snap.x, &snap.v}) {
                arr->assign(n, Vec3::Zero());
                for (auto& p : *arr) {
                    for (std::size_t a = 0; a < amb; ++a) p[static_cast<Eigen::Index>(a)] = r.f64();
                }
            }
        }
    }
    return ds;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ValidationError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_dataset(const TrajectoryDataset& ds, const std::filesystem::path& path) {
    write_text(path, encode_dataset(ds));
}

TrajectoryDataset read_dataset(const std::filesystem::path& path) {
    return decode_dataset(read_text(path));
}

}  // namespace geokernel
