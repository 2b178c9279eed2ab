// Binary map/profile files, CSV tables and run manifests.
//
// CMAP1: "CMAP1\0", u32 version, u64 N, f64 x_min, f64 dx, u64 n_samples,
//        N f64 G1, N(N+1)/2 f64 g2 (upper triangle, row major).
// FLOW1: "FLOW1\0", u32 version, u64 N, f64 x_min, f64 dx, u64 n_horizons,
//        columns x, |F_p|, n, v, c_B (N f64 each), then per horizon f64 x and
//        u32 direction (0 sub->super, 1 super->sub).
// All integers and floats are little-endian regardless of the host.
#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "polariton/bistability.hpp"
#include "polariton/correlations.hpp"
#include "polariton/dispersion.hpp"
#include "polariton/meanfield.hpp"

namespace polariton::io {

struct FormatError : Error {
    using Error::Error;
};

inline constexpr std::uint32_t format_version = 1;
inline constexpr std::array<char, 6> cmap_magic = {'C', 'M', 'A', 'P', '1', '\0'};
inline constexpr std::array<char, 6> flow_magic = {'F', 'L', 'O', 'W', '1', '\0'};

// ---------------------------------------------------------------------------
// Little-endian byte buffers
// ---------------------------------------------------------------------------

class Writer {
public:
    void raw(const char* p, std::size_t n) { bytes_.append(p, n); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    const std::string& bytes() const { return bytes_; }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    std::string bytes_;
};

class Reader {
public:
    explicit Reader(std::string_view bytes, std::string what) : b_(bytes), what_(std::move(what)) {}

    void magic(const std::array<char, 6>& m) {
        need(m.size());
        if (std::memcmp(b_.data() + pos_, m.data(), m.size()) != 0) throw FormatError(what_ + ": bad magic");
        pos_ += m.size();
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::size_t remaining() const { return b_.size() - pos_; }
    void finish() const {
        if (pos_ != b_.size()) throw FormatError(what_ + ": trailing bytes");
    }
    void expect_remaining(std::uint64_t n) const {
        if (remaining() != n) throw FormatError(what_ + ": payload size mismatch (truncated or corrupt)");
    }
    const std::string& what() const { return what_; }

private:
    void need(std::size_t n) const {
        if (b_.size() - pos_ < n) throw FormatError(what_ + ": truncated");
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::string_view b_;
    std::size_t pos_ = 0;
    std::string what_;
};

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// Writes through a temporary sibling and renames over the target.
inline void atomic_write(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// CMAP1
// ---------------------------------------------------------------------------

inline std::string encode_cmap(const CorrelationMap& map) {
    const std::size_t n = map.size();
    if (map.g2.m != n) throw Error("encode_cmap: G1 and g2 sizes differ");
    Writer w;
    w.raw(cmap_magic.data(), cmap_magic.size());
    w.u32(format_version);
    w.u64(n);
    w.f64(map.x_min);
    w.f64(map.dx);
    w.u64(map.n_samples);
    for (double v : map.G1) w.f64(v);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) w.f64(map.g2(i, j));
    return w.bytes();
}

inline CorrelationMap decode_cmap(std::string_view bytes) {
    Reader r(bytes, "CMAP1");
    r.magic(cmap_magic);
    if (const auto v = r.u32(); v != format_version) throw FormatError("CMAP1: unsupported version " + std::to_string(v));
    const std::uint64_t n = r.u64();
    CorrelationMap map;
    map.x_min = r.f64();
    map.dx = r.f64();
    map.n_samples = r.u64();
    if (n == 0 || n > (1ULL << 24)) throw FormatError("CMAP1: implausible size " + std::to_string(n));
    if (!std::isfinite(map.x_min) || !(map.dx > 0.0) || !std::isfinite(map.dx))
        throw FormatError("CMAP1: invalid axis");
    r.expect_remaining(8 * (n + n * (n + 1) / 2));
    map.G1.resize(n);
    for (auto& v : map.G1) v = r.f64();
    map.g2 = SymmetricMatrix(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) map.g2.set(i, j, r.f64());
    r.finish();
    return map;
}

inline void write_cmap(const std::filesystem::path& path, const CorrelationMap& map) {
    atomic_write(path, encode_cmap(map));
}
inline CorrelationMap read_cmap(const std::filesystem::path& path) { return decode_cmap(read_file(path)); }

// ---------------------------------------------------------------------------
// FLOW1
// ---------------------------------------------------------------------------

struct FlowProfile {
    double x_min = 0.0;
    double dx = 0.0;
    std::vector<double> x;
    std::vector<double> pump_abs;
    std::vector<double> n;
    std::vector<double> v;
    std::vector<double> c_B;
    std::vector<Horizon> horizons;

    std::size_t size() const { return x.size(); }
};

inline FlowProfile flow_profile(const MeanFieldSolution& s) {
    FlowProfile f;
    f.x_min = s.grid.x_min();
    f.dx = s.grid.dx();
    f.x = s.grid.coordinates();
    f.pump_abs = s.pump_abs;
    f.n = s.n;
    f.v = s.v;
    f.c_B = s.c_B;
    f.horizons = s.horizons;
    return f;
}

inline std::string encode_flow(const FlowProfile& f) {
    const std::size_t n = f.size();
    for (const auto* col : {&f.pump_abs, &f.n, &f.v, &f.c_B})
        if (col->size() != n) throw Error("encode_flow: column sizes differ");
    Writer w;
    w.raw(flow_magic.data(), flow_magic.size());
    w.u32(format_version);
    w.u64(n);
    w.f64(f.x_min);
    w.f64(f.dx);
    w.u64(f.horizons.size());
    for (const auto* col : {&f.x, &f.pump_abs, &f.n, &f.v, &f.c_B})
        for (double v : *col) w.f64(v);
    for (const auto& h : f.horizons) {
        w.f64(h.x);
        w.u32(h.type == HorizonType::sub_to_super ? 0u : 1u);
    }
    return w.bytes();
}

inline FlowProfile decode_flow(std::string_view bytes) {
    Reader r(bytes, "FLOW1");
    r.magic(flow_magic);
    if (const auto v = r.u32(); v != format_version) throw FormatError("FLOW1: unsupported version " + std::to_string(v));
    const std::uint64_t n = r.u64();
    FlowProfile f;
    f.x_min = r.f64();
    f.dx = r.f64();
    const std::uint64_t nh = r.u64();
    if (n == 0 || n > (1ULL << 28)) throw FormatError("FLOW1: implausible size " + std::to_string(n));
    if (nh > n) throw FormatError("FLOW1: implausible horizon count");
    if (!std::isfinite(f.x_min) || !(f.dx > 0.0) || !std::isfinite(f.dx)) throw FormatError("FLOW1: invalid axis");
    r.expect_remaining(8 * 5 * n + 12 * nh);
    for (auto* col : {&f.x, &f.pump_abs, &f.n, &f.v, &f.c_B}) {
        col->resize(n);
        for (auto& v : *col) v = r.f64();
    }
    for (std::uint64_t i = 0; i < nh; ++i) {
        const double x = r.f64();
        const std::uint32_t d = r.u32();
        if (d > 1) throw FormatError("FLOW1: invalid horizon direction");
        f.horizons.push_back({x, d == 0 ? HorizonType::sub_to_super : HorizonType::super_to_sub});
    }
    r.finish();
    return f;
}

inline void write_flow(const std::filesystem::path& path, const FlowProfile& f) { atomic_write(path, encode_flow(f)); }
inline FlowProfile read_flow(const std::filesystem::path& path) { return decode_flow(read_file(path)); }

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Columns pass, F, n, c_B, stability for both hysteresis passes.
inline std::string bistability_csv(const std::vector<CurveSample>& up, const std::vector<CurveSample>& down) {
    std::string out = "pass,F,n,c_B,stability\n";
    auto rows = [&](const char* pass, const std::vector<CurveSample>& s) {
        for (const auto& c : s)
            out += std::string(pass) + "," + num(c.F) + "," + num(c.n) + "," + num(c.c_B) + "," +
                   to_string(c.stability) + "\n";
    };
    rows("up", up);
    rows("down", down);
    return out;
}

/// Density-parametrised S-curve: F, n, c_B, stability.
inline std::string curve_csv(const BistabilityCurve& curve) {
    std::string out = "F,n,c_B,stability\n";
    for (const auto& c : curve.samples)
        out += num(c.F) + "," + num(c.n) + "," + num(c.c_B) + "," + to_string(c.stability) + "\n";
    return out;
}

/// Laboratory-frame branches: k, Re w+, Im w+, Re w-, Im w-.
inline std::string dispersion_csv(const BranchParams& b, double k_min, double k_max, std::size_t n_k) {
    std::string out = "k,re_omega_plus,im_omega_plus,re_omega_minus,im_omega_minus\n";
    for (std::size_t i = 0; i < n_k; ++i) {
        const double k = k_min + (k_max - k_min) * static_cast<double>(i) / static_cast<double>(n_k - 1);
        const auto w = omega_lab(k, b);
        out += num(k) + "," + num(w.plus.real()) + "," + num(w.plus.imag()) + "," + num(w.minus.real()) + "," +
               num(w.minus.imag()) + "\n";
    }
    return out;
}

struct DispersionMarker {
    std::string name;  ///< omega_min or omega_max
    double omega = 0.0;
    double k = 0.0;
};

inline std::string markers_csv(const std::vector<DispersionMarker>& markers) {
    std::string out = "marker,omega,k\n";
    for (const auto& m : markers) out += m.name + "," + num(m.omega) + "," + num(m.k) + "\n";
    return out;
}

inline std::string flow_csv(const FlowProfile& f) {
    std::string out = "x,pump_abs,n,v,c_B\n";
    for (std::size_t i = 0; i < f.size(); ++i)
        out += num(f.x[i]) + "," + num(f.pump_abs[i]) + "," + num(f.n[i]) + "," + num(f.v[i]) + "," +
               num(f.c_B[i]) + "\n";
    return out;
}

inline std::string horizons_csv(const std::vector<Horizon>& hs) {
    std::string out = "x,type\n";
    for (const auto& h : hs) out += num(h.x) + "," + to_string(h.type) + "\n";
    return out;
}

inline std::string g1_csv(const CorrelationMap& map) {
    std::string out = "x,G1\n";
    for (std::size_t i = 0; i < map.size(); ++i) out += num(map.x(i)) + "," + num(map.G1[i]) + "\n";
    return out;
}

/// Full g2 - 1 map as rows of x' at fixed x (NaN where masked).
inline std::string g2_csv(const CorrelationMap& map) {
    std::string out;
    for (std::size_t i = 0; i < map.size(); ++i) {
        for (std::size_t j = 0; j < map.size(); ++j) {
            if (j) out += ",";
            out += num(map.g2(i, j) - 1.0);
        }
        out += "\n";
    }
    return out;
}

inline std::string statistics_csv(const RegionStatistics& s) {
    std::string out = "region,value,se,significance\n";
    auto row = [&](const char* name, const Estimate& e) {
        out += std::string(name) + "," + num(e.value) + "," + num(e.se) + "," + num(e.significance()) + "\n";
    };
    row("SW", s.SW);
    row("SE", s.SE);
    row("NW", s.NW);
    row("NE", s.NE);
    row("moustache", s.moustache);
    row("edge", s.edge);
    row("diagonal_upstream", s.diagonal_upstream);
    return out;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

inline constexpr const char* code_version = "0.1.0";

struct RunManifest {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string version = code_version;
    double wall_seconds = 0.0;
    std::uint64_t realizations = 0;
    std::uint64_t samples = 0;
    std::vector<std::string> outputs;
    std::string timestamp;  ///< UTC, ISO 8601

    nlohmann::json to_json() const {
        char hash[19];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
        return {{"command", command},           {"config_hash", hash},       {"seed", seed},
                {"code_version", version},      {"wall_seconds", wall_seconds}, {"realizations", realizations},
                {"samples", samples},           {"outputs", outputs},        {"timestamp", timestamp}};
    }
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    atomic_write(path, m.to_json().dump(2) + "\n");
}

}  // namespace polariton::io
