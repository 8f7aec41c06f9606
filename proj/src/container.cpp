#include "hetres/container.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "hetres/fp16.hpp"

namespace hetres::io {

using nlohmann::json;

const NamedArray* Container::find(const std::string& name) const {
    for (const auto& a : arrays)
        if (a.name == name) return &a;
    return nullptr;
}

const NamedArray& Container::get(const std::string& name) const {
    const NamedArray* a = find(name);
    if (!a) throw CorruptionError("container: missing array '" + name + "'");
    return *a;
}

namespace {

constexpr char kMagic[4] = {'H', 'R', 'S', 'V'};

std::size_t dtype_size(Dtype d) {
    switch (d) {
        case Dtype::f16: return 2;
        case Dtype::f32: return 4;
        case Dtype::f64: return 8;
        case Dtype::u8: return 1;
        case Dtype::i64: return 8;
    }
    throw CorruptionError("container: unknown dtype code");
}

struct Writer {
    std::vector<char> buf;

    void bytes(const void* p, std::size_t n) {
        const char* c = static_cast<const char*>(p);
        buf.insert(buf.end(), c, c + n);
    }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
};

struct Reader {
    const char* p;
    const char* end;

    void bytes(void* out, std::size_t n) {
        if (static_cast<std::size_t>(end - p) < n)
            throw CorruptionError("container: truncated file");
        std::memcpy(out, p, n);
        p += n;
    }
    std::uint32_t u32() {
        std::uint32_t v;
        bytes(&v, 4);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        bytes(&v, 8);
        return v;
    }
};

std::uint64_t fnv64(const char* p, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(p[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_array(Writer& w, const NamedArray& a) {
    w.u64(a.name.size());
    w.bytes(a.name.data(), a.name.size());
    w.u32(static_cast<std::uint32_t>(a.dtype));
    w.u64(static_cast<std::uint64_t>(a.rows));
    w.u64(static_cast<std::uint64_t>(a.cols));
    const auto n = static_cast<std::size_t>(a.rows) * static_cast<std::size_t>(a.cols);
    switch (a.dtype) {
        case Dtype::f16:
            for (Index r = 0; r < a.rows; ++r)
                for (Index c = 0; c < a.cols; ++c) {
                    const std::uint16_t h =
                        fp16::from_float(static_cast<float>(a.data(r, c)));
                    w.bytes(&h, 2);
                }
            break;
        case Dtype::f32:
            for (Index r = 0; r < a.rows; ++r)
                for (Index c = 0; c < a.cols; ++c) {
                    const float f = static_cast<float>(a.data(r, c));
                    w.bytes(&f, 4);
                }
            break;
        case Dtype::f64:
            for (Index r = 0; r < a.rows; ++r)
                for (Index c = 0; c < a.cols; ++c) {
                    const double d = a.data(r, c);
                    w.bytes(&d, 8);
                }
            break;
        case Dtype::u8:
            require(a.idata.size() == n, "container: u8 payload size mismatch");
            for (std::int64_t v : a.idata) {
                const auto b = static_cast<std::uint8_t>(v);
                w.bytes(&b, 1);
            }
            break;
        case Dtype::i64:
            require(a.idata.size() == n, "container: i64 payload size mismatch");
            for (std::int64_t v : a.idata) w.bytes(&v, 8);
            break;
    }
}

NamedArray read_array(Reader& r) {
    NamedArray a;
    const std::uint64_t name_len = r.u64();
    if (name_len > 1u << 20) throw CorruptionError("container: absurd name length");
    a.name.resize(name_len);
    r.bytes(a.name.data(), name_len);
    const std::uint32_t code = r.u32();
    if (code > 4) throw CorruptionError("container: unknown dtype code");
    a.dtype = static_cast<Dtype>(code);
    a.rows = static_cast<Index>(r.u64());
    a.cols = static_cast<Index>(r.u64());
    if (a.rows < 0 || a.cols < 0)
        throw CorruptionError("container: negative shape");
    const auto n = static_cast<std::size_t>(a.rows) * static_cast<std::size_t>(a.cols);
    if (a.is_float()) {
        a.data.resize(a.rows, a.cols);
        switch (a.dtype) {
            case Dtype::f16:
                for (Index i = 0; i < a.rows; ++i)
                    for (Index j = 0; j < a.cols; ++j) {
                        std::uint16_t h;
                        r.bytes(&h, 2);
                        a.data(i, j) = static_cast<double>(fp16::to_float(h));
                    }
                break;
            case Dtype::f32:
                for (Index i = 0; i < a.rows; ++i)
                    for (Index j = 0; j < a.cols; ++j) {
                        float f;
                        r.bytes(&f, 4);
                        a.data(i, j) = f;
                    }
                break;
            default:
                for (Index i = 0; i < a.rows; ++i)
                    for (Index j = 0; j < a.cols; ++j) {
                        double d;
                        r.bytes(&d, 8);
                        a.data(i, j) = d;
                    }
                break;
        }
    } else {
        a.idata.resize(n);
        if (a.dtype == Dtype::u8) {
            for (auto& v : a.idata) {
                std::uint8_t b;
                r.bytes(&b, 1);
                v = b;
            }
        } else {
            for (auto& v : a.idata) r.bytes(&v, 8);
        }
    }
    return a;
}

}  // namespace

void save(const std::string& path, const Container& c) {
    Writer w;
    w.bytes(kMagic, 4);
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(c.kind));
    w.u32(static_cast<std::uint32_t>(c.arrays.size()));
    w.u64(c.meta.size());
    w.bytes(c.meta.data(), c.meta.size());
    for (const auto& a : c.arrays) write_array(w, a);
    const std::uint64_t sum = fnv64(w.buf.data(), w.buf.size());
    w.u64(sum);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("container: cannot open for writing: " + path);
    f.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
    if (!f) throw Error("container: write failed: " + path);
}

Container load(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw Error("container: cannot open: " + path);
    const auto size = static_cast<std::size_t>(f.tellg());
    if (size < 4 + 4 + 4 + 4 + 8 + 8)
        throw CorruptionError("container: file too short");
    std::vector<char> buf(size);
    f.seekg(0);
    f.read(buf.data(), static_cast<std::streamsize>(size));
    if (!f) throw CorruptionError("container: short read");

    const std::uint64_t stored = fnv64(buf.data(), size - 8);
    std::uint64_t trailer;
    std::memcpy(&trailer, buf.data() + size - 8, 8);
    if (stored != trailer)
        throw CorruptionError("container: checksum mismatch");

    Reader r{buf.data(), buf.data() + size - 8};
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw CorruptionError("container: bad magic");
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        throw UnsupportedVersionError("container: unsupported format version " +
                                      std::to_string(version));
    Container c;
    c.kind = static_cast<Kind>(r.u32());
    const std::uint32_t n_arrays = r.u32();
    const std::uint64_t meta_len = r.u64();
    c.meta.resize(meta_len);
    r.bytes(c.meta.data(), meta_len);
    for (std::uint32_t i = 0; i < n_arrays; ++i) c.arrays.push_back(read_array(r));
    if (r.p != r.end) throw CorruptionError("container: trailing bytes before checksum");
    return c;
}

void save_state(const std::string& path, const dyn::StateMatrix& x, Dtype dtype) {
    require(dtype == Dtype::f16 || dtype == Dtype::f32 || dtype == Dtype::f64,
            "save_state: states need a float dtype");
    Container c;
    c.kind = Kind::state;
    json meta{{"dt", x.dt},
              {"kind", x.meta.kind},
              {"noise_seed", x.meta.noise_seed},
              {"fallback_integrator", x.meta.fallback_integrator}};
    c.meta = meta.dump();
    NamedArray a;
    a.name = "X";
    a.dtype = dtype;
    a.rows = x.X.rows();
    a.cols = x.X.cols();
    a.data = x.X;
    c.arrays.push_back(std::move(a));
    save(path, c);
}

dyn::StateMatrix load_state(const std::string& path) {
    const Container c = load(path);
    if (c.kind != Kind::state) throw CorruptionError("load_state: not a state container");
    const json meta = json::parse(c.meta);
    dyn::StateMatrix x;
    x.X = c.get("X").data;
    x.dt = meta.at("dt").get<double>();
    x.meta.dt = x.dt;
    x.meta.kind = meta.at("kind").get<std::string>();
    x.meta.noise_seed = meta.at("noise_seed").get<std::uint64_t>();
    x.meta.fallback_integrator = meta.at("fallback_integrator").get<bool>();
    return x;
}

void save_stimulus(const std::string& path, const stim::Stimulus& s, Dtype dtype) {
    Container c;
    c.kind = Kind::stimulus;
    json sources = json::array();
    for (const auto& src : s.sources)
        sources.push_back({{"tag", src.tag}, {"params", src.params}, {"seed", src.seed}});
    json meta{{"dt_dense", s.dt_dense},
              {"compound_freq", s.compound_freq},
              {"time_scale", s.time_scale},
              {"sources", sources}};
    c.meta = meta.dump();
    NamedArray a;
    a.name = "components";
    a.dtype = dtype;
    a.rows = s.components.rows();
    a.cols = s.components.cols();
    a.data = s.components;
    c.arrays.push_back(std::move(a));
    save(path, c);
}

stim::Stimulus load_stimulus(const std::string& path) {
    const Container c = load(path);
    if (c.kind != Kind::stimulus)
        throw CorruptionError("load_stimulus: not a stimulus container");
    const json meta = json::parse(c.meta);
    stim::Stimulus s;
    s.components = c.get("components").data;
    s.dt_dense = meta.at("dt_dense").get<double>();
    s.compound_freq = meta.at("compound_freq").get<double>();
    s.time_scale = meta.at("time_scale").get<double>();
    for (const auto& j : meta.at("sources")) {
        stim::SourceInfo src;
        src.tag = j.at("tag").get<std::string>();
        src.seed = j.at("seed").get<std::uint64_t>();
        for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
            src.params[it.key()] = it.value().get<double>();
        s.sources.push_back(std::move(src));
    }
    return s;
}

void save_network(const std::string& path, const topo::Network& n) {
    Container c;
    c.kind = Kind::network;
    const auto& sp = n.spec;
    json meta{{"N", sp.N}, {"p", sp.p}, {"f_exc", sp.f_exc}, {"sigma0", sp.sigma0},
              {"J", sp.J}, {"Ju", sp.Ju}, {"Jn", sp.Jn}, {"K", sp.K},
              {"tau_mean", sp.tau_mean}, {"h", sp.h},
              {"profile", topo::to_string(sp.profile)},
              {"tau_floor", sp.tau_floor},
              {"seeds", {{"connectivity", sp.seeds.connectivity},
                         {"input", sp.seeds.input}, {"tau", sp.seeds.tau}}},
              {"tau_rejections", n.tau_rejections},
              {"warnings", n.warnings}};
    c.meta = meta.dump();

    // Sparse W as triplets.
    const auto nnz = static_cast<Index>(n.W.nonZeros());
    NamedArray rows{"w_row", Dtype::i64, nnz, 1, {}, {}};
    NamedArray cols{"w_col", Dtype::i64, nnz, 1, {}, {}};
    NamedArray vals{"w_val", Dtype::f64, nnz, 1, MatrixXd(nnz, 1), {}};
    rows.idata.reserve(static_cast<std::size_t>(nnz));
    cols.idata.reserve(static_cast<std::size_t>(nnz));
    Index e = 0;
    for (Index i = 0; i < n.W.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(n.W, i);
             it; ++it, ++e) {
            rows.idata.push_back(it.row());
            cols.idata.push_back(it.col());
            vals.data(e, 0) = it.value();
        }
    c.arrays.push_back(std::move(rows));
    c.arrays.push_back(std::move(cols));
    c.arrays.push_back(std::move(vals));

    NamedArray wu{"wu", Dtype::f64, n.Wu.rows(), n.Wu.cols(), n.Wu, {}};
    c.arrays.push_back(std::move(wu));
    NamedArray tau{"tau", Dtype::f64, n.tau.size(), 1, n.tau, {}};
    c.arrays.push_back(std::move(tau));
    NamedArray exc{"is_exc", Dtype::u8, static_cast<Index>(n.is_exc.size()), 1, {}, {}};
    for (auto b : n.is_exc) exc.idata.push_back(b);
    c.arrays.push_back(std::move(exc));
    save(path, c);
}

topo::Network load_network(const std::string& path) {
    const Container c = load(path);
    if (c.kind != Kind::network)
        throw CorruptionError("load_network: not a network container");
    const json meta = json::parse(c.meta);

    topo::Network n;
    auto& sp = n.spec;
    sp.N = meta.at("N").get<Index>();
    sp.p = meta.at("p").get<double>();
    sp.f_exc = meta.at("f_exc").get<double>();
    sp.sigma0 = meta.at("sigma0").get<double>();
    sp.J = meta.at("J").get<double>();
    sp.Ju = meta.at("Ju").get<double>();
    sp.Jn = meta.at("Jn").get<double>();
    sp.K = meta.at("K").get<Index>();
    sp.tau_mean = meta.at("tau_mean").get<double>();
    sp.h = meta.at("h").get<double>();
    sp.profile = topo::profile_from_string(meta.at("profile").get<std::string>());
    sp.tau_floor = meta.at("tau_floor").get<double>();
    sp.seeds.connectivity = meta.at("seeds").at("connectivity").get<std::uint64_t>();
    sp.seeds.input = meta.at("seeds").at("input").get<std::uint64_t>();
    sp.seeds.tau = meta.at("seeds").at("tau").get<std::uint64_t>();
    n.tau_rejections = meta.at("tau_rejections").get<Index>();
    n.warnings = meta.at("warnings").get<std::vector<std::string>>();

    const auto& rows = c.get("w_row");
    const auto& cols = c.get("w_col");
    const auto& vals = c.get("w_val");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(rows.idata.size());
    for (std::size_t i = 0; i < rows.idata.size(); ++i)
        trip.emplace_back(static_cast<Index>(rows.idata[i]),
                          static_cast<Index>(cols.idata[i]), vals.data(static_cast<Index>(i), 0));
    n.W.resize(sp.N, sp.N);
    n.W.setFromTriplets(trip.begin(), trip.end());
    n.W.makeCompressed();
    n.Wu = c.get("wu").data;
    n.tau = c.get("tau").data.col(0);
    for (auto v : c.get("is_exc").idata)
        n.is_exc.push_back(static_cast<std::uint8_t>(v));
    return n;
}

void save_raster(const std::string& path, const dyn::SpikeRaster& r) {
    Container c;
    c.kind = Kind::raster;
    json meta{{"N", r.N}, {"duration", r.duration}};
    c.meta = meta.dump();

    // (neuron, time) pairs sorted by time, ties by neuron index.
    std::vector<std::pair<double, Index>> events;
    for (Index n = 0; n < r.N; ++n)
        for (double t : r.spikes[static_cast<std::size_t>(n)]) events.emplace_back(t, n);
    std::sort(events.begin(), events.end());

    const auto m = static_cast<Index>(events.size());
    NamedArray neuron{"neuron", Dtype::i64, m, 1, {}, {}};
    NamedArray time{"time", Dtype::f64, m, 1, MatrixXd(m, 1), {}};
    for (Index i = 0; i < m; ++i) {
        neuron.idata.push_back(events[static_cast<std::size_t>(i)].second);
        time.data(i, 0) = events[static_cast<std::size_t>(i)].first;
    }
    c.arrays.push_back(std::move(neuron));
    c.arrays.push_back(std::move(time));
    save(path, c);
}

dyn::SpikeRaster load_raster(const std::string& path) {
    const Container c = load(path);
    if (c.kind != Kind::raster)
        throw CorruptionError("load_raster: not a raster container");
    const json meta = json::parse(c.meta);
    dyn::SpikeRaster r;
    r.N = meta.at("N").get<Index>();
    r.duration = meta.at("duration").get<double>();
    r.spikes.assign(static_cast<std::size_t>(r.N), {});
    const auto& neuron = c.get("neuron");
    const auto& time = c.get("time");
    for (std::size_t i = 0; i < neuron.idata.size(); ++i)
        r.spikes[static_cast<std::size_t>(neuron.idata[i])].push_back(
            time.data(static_cast<Index>(i), 0));
    return r;
}

}  // namespace hetres::io
