#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sawpull/counts.hpp"
#include "sawpull/enumerate.hpp"
#include "sawpull/errors.hpp"
#include "sawpull/flatperm.hpp"
#include "sawpull/partition.hpp"
#include "sawpull/version.hpp"

namespace sawpull {

inline constexpr const char* kTableHeader = "class,d,n,v,h,count";

// FNV-1a 64-bit over the payload bytes.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string checksum_string(std::string_view payload) {
    char buf[28];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(payload)));
    return buf;
}

struct Manifest {
    int schema_version = kSchemaVersion;
    int dimension = 0;
    WalkClass cls = WalkClass::positive;
    int n_max = 0;
    bool stochastic = false;
    std::optional<std::uint64_t> seed;   // stochastic payloads only
    std::optional<std::uint64_t> tours;  // stochastic payloads only
    std::string generator = kGeneratorVersion;
    double wall_time_s = 0.0;
    std::string checksum;
};

namespace io_detail {

inline std::string fmt_double(double x) {
    // shortest representation that parses back to the same value
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    return buf;
}

inline void write_file(const std::filesystem::path& dest, const std::string& data) {
    std::ofstream out(dest, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + dest.string() + "' for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw IoError("short write to '" + dest.string() + "'");
}

inline std::string read_file(const std::filesystem::path& src) {
    std::ifstream in(src, std::ios::binary);
    if (!in) throw IoError("cannot open '" + src.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure on '" + src.string() + "'");
    return std::move(buf).str();
}

[[noreturn]] inline void parse_fail(std::size_t line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

inline std::vector<std::string> split_fields(const std::string& row) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : row) {
        if (c == ',') {
            f.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    f.push_back(cur);
    return f;
}

inline long long parse_int(const std::string& s, std::size_t line, const char* field) {
    if (s.empty()) parse_fail(line, std::string("empty ") + field);
    std::size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) parse_fail(line, std::string("bad ") + field + " '" + s + "'");
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            parse_fail(line, std::string("bad ") + field + " '" + s + "'");
    return std::strtoll(s.c_str(), nullptr, 10);
}

inline Count parse_count(const std::string& s, std::size_t line) {
    if (s.empty()) parse_fail(line, "empty count");
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            parse_fail(line, "count '" + s + "' is not a decimal integer");
    return Count(s);
}

inline double parse_estimate_value(const std::string& s, std::size_t line) {
    if (s.empty()) parse_fail(line, "empty estimate");
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !(x > 0.0) || !std::isfinite(x))
        parse_fail(line, "estimate '" + s + "' is not a positive real");
    return x;
}

// Shared row scaffolding for the exact and stochastic payload parsers:
// validates the header, splits rows, and enforces a single (class, d) pair.
template <class RowFn>
inline void parse_rows(const std::string& payload, WalkClass& cls, int& dim, RowFn&& on_row) {
    std::istringstream in(payload);
    std::string row;
    std::size_t line = 0;
    bool have_meta = false;
    while (std::getline(in, row)) {
        ++line;
        if (!row.empty() && row.back() == '\r') row.pop_back();
        if (line == 1) {
            if (row != kTableHeader)
                parse_fail(line, std::string("expected header '") + kTableHeader + "'");
            continue;
        }
        if (row.empty()) {
            if (!in.eof()) parse_fail(line, "blank row inside the payload");
            continue;
        }
        const std::vector<std::string> f = split_fields(row);
        if (f.size() != 6) parse_fail(line, "expected 6 fields, got " + std::to_string(f.size()));
        WalkClass rc;
        try {
            rc = walk_class_from_string(f[0]);
        } catch (const DomainError& e) {
            parse_fail(line, e.what());
        }
        const int rd = static_cast<int>(parse_int(f[1], line, "dimension"));
        if (!have_meta) {
            cls = rc;
            dim = rd;
            have_meta = true;
        } else if (rc != cls || rd != dim) {
            parse_fail(line, "row class/dimension differs from the first row");
        }
        const int n = static_cast<int>(parse_int(f[2], line, "length"));
        const int v = static_cast<int>(parse_int(f[3], line, "visits"));
        const int h = static_cast<int>(parse_int(f[4], line, "height"));
        if (n < 0) parse_fail(line, "negative length");
        on_row(line, n, v, h, f[5]);
    }
    if (!have_meta) throw ParseError("payload has no data rows");
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// payloads

// Delimited text payload: header then one row per cell, (n, v, h) ascending,
// counts as exact decimal integers. Bitwise deterministic.
inline std::string table_payload(const CountTable& t) {
    std::string out = kTableHeader;
    out += '\n';
    const std::string prefix = std::string(to_string(t.walk_class())) + "," +
                               std::to_string(t.dimension()) + ",";
    for (const auto& [k, c] : t.cells()) {
        out += prefix;
        out += std::to_string(k.n);
        out += ',';
        out += std::to_string(k.v);
        out += ',';
        out += std::to_string(k.h);
        out += ',';
        out += c.str();
        out += '\n';
    }
    return out;
}

// Stochastic payload in the same schema; the count column carries the real
// estimate in shortest round-trip form.
inline std::string estimate_payload(const DoSEstimate& e) {
    std::string out = kTableHeader;
    out += '\n';
    const std::string prefix = "positive," + std::to_string(e.dimension()) + ",";
    for (int n = 0; n <= e.n_max(); ++n)
        e.for_level(n, [&](int v, int h, double est) {
            out += prefix;
            out += std::to_string(n);
            out += ',';
            out += std::to_string(v);
            out += ',';
            out += std::to_string(h);
            out += ',';
            out += io_detail::fmt_double(est);
            out += '\n';
        });
    return out;
}

inline CountTable parse_table_payload(const std::string& payload) {
    WalkClass cls = WalkClass::positive;
    int dim = 0;
    struct Row {
        std::size_t line;
        int n, v, h;
        Count c;
    };
    std::vector<Row> rows;
    int n_max = 0;
    io_detail::parse_rows(payload, cls, dim,
                          [&](std::size_t line, int n, int v, int h, const std::string& last) {
                              rows.push_back({line, n, v, h, io_detail::parse_count(last, line)});
                              n_max = std::max(n_max, n);
                          });
    CountTable t(dim, cls, n_max);
    for (const Row& r : rows) {
        if (r.c == 0) io_detail::parse_fail(r.line, "zero count; absent cells are omitted");
        if (t.at(r.n, r.v, r.h) != 0) io_detail::parse_fail(r.line, "duplicate cell");
        t.add(r.n, r.v, r.h, r.c);
    }
    return t;
}

// Sample counts are not persisted; parsed estimates mark every stored cell
// with one sample (present vs absent is the preserved distinction).
inline DoSEstimate parse_estimate_payload(const std::string& payload, std::uint64_t tours,
                                          std::uint64_t seed) {
    WalkClass cls = WalkClass::positive;
    int dim = 0;
    struct Row {
        std::size_t line;
        int n, v, h;
        double est;
    };
    std::vector<Row> rows;
    int n_max = 0;
    io_detail::parse_rows(
        payload, cls, dim, [&](std::size_t line, int n, int v, int h, const std::string& last) {
            rows.push_back({line, n, v, h, io_detail::parse_estimate_value(last, line)});
            n_max = std::max(n_max, n);
        });
    if (cls != WalkClass::positive) throw ParseError("stochastic payloads hold positive walks");
    DoSEstimate e(dim, n_max, tours, seed);
    for (const Row& r : rows) {
        if (e.has(r.n, r.v, r.h)) io_detail::parse_fail(r.line, "duplicate cell");
        try {
            e.set_cell(r.n, r.v, r.h, r.est, 1);
        } catch (const DomainError& err) {
            io_detail::parse_fail(r.line, err.what());
        }
    }
    return e;
}

// ---------------------------------------------------------------------------
// manifests

inline nlohmann::ordered_json manifest_json(const Manifest& m) {
    nlohmann::ordered_json j;
    j["schema_version"] = m.schema_version;
    j["dimension"] = m.dimension;
    j["class"] = to_string(m.cls);
    j["n_max"] = m.n_max;
    j["kind"] = m.stochastic ? "stochastic" : "exact";
    if (m.stochastic) {
        j["seed"] = m.seed.value_or(0);
        j["tours"] = m.tours.value_or(0);
    }
    j["generator"] = m.generator;
    j["wall_time_s"] = m.wall_time_s;
    j["checksum"] = m.checksum;
    return j;
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
    Manifest m;
    try {
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != kSchemaVersion)
            throw ParseError("unrecognized schema_version " + std::to_string(m.schema_version));
        m.dimension = j.at("dimension").get<int>();
        m.cls = walk_class_from_string(j.at("class").get<std::string>());
        m.n_max = j.at("n_max").get<int>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind != "exact" && kind != "stochastic")
            throw ParseError("manifest kind must be exact or stochastic, got '" + kind + "'");
        m.stochastic = kind == "stochastic";
        if (m.stochastic) {
            m.seed = j.at("seed").get<std::uint64_t>();
            m.tours = j.at("tours").get<std::uint64_t>();
        }
        m.generator = j.at("generator").get<std::string>();
        m.wall_time_s = j.at("wall_time_s").get<double>();
        m.checksum = j.at("checksum").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    return m;
}

inline std::filesystem::path manifest_path(const std::filesystem::path& table_path) {
    std::filesystem::path p = table_path;
    p += ".manifest.json";
    return p;
}

// ---------------------------------------------------------------------------
// files

inline Manifest serialize_table(const CountTable& t, const std::filesystem::path& dest,
                                double wall_time_s = 0.0) {
    const std::string payload = table_payload(t);
    Manifest m;
    m.dimension = t.dimension();
    m.cls = t.walk_class();
    m.n_max = t.n_max();
    m.stochastic = false;
    m.wall_time_s = wall_time_s;
    m.checksum = checksum_string(payload);
    io_detail::write_file(dest, payload);
    io_detail::write_file(manifest_path(dest), manifest_json(m).dump(2) + "\n");
    return m;
}

inline Manifest serialize_estimate(const DoSEstimate& e, const std::filesystem::path& dest,
                                   double wall_time_s = 0.0) {
    const std::string payload = estimate_payload(e);
    Manifest m;
    m.dimension = e.dimension();
    m.cls = WalkClass::positive;
    m.n_max = e.n_max();
    m.stochastic = true;
    m.seed = e.seed();
    m.tours = e.tours();
    m.wall_time_s = wall_time_s;
    m.checksum = checksum_string(payload);
    io_detail::write_file(dest, payload);
    io_detail::write_file(manifest_path(dest), manifest_json(m).dump(2) + "\n");
    return m;
}

inline Manifest read_manifest(const std::filesystem::path& table_path) {
    const std::string text = io_detail::read_file(manifest_path(table_path));
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    return manifest_from_json(j);
}

namespace io_detail {

inline std::string verified_payload(const std::filesystem::path& src, const Manifest& m) {
    const std::string payload = read_file(src);
    const std::string sum = checksum_string(payload);
    if (sum != m.checksum)
        throw ChecksumError("payload checksum " + sum + " does not match manifest " + m.checksum +
                            " for '" + src.string() + "'");
    return payload;
}

}  // namespace io_detail

// Parse an exact table with its manifest sidecar, verifying the checksum and
// the manifest's description of the payload.
inline CountTable parse_table(const std::filesystem::path& src) {
    const Manifest m = read_manifest(src);
    if (m.stochastic)
        throw ParseError("'" + src.string() + "' holds a stochastic estimate; parse it as one");
    const CountTable t = parse_table_payload(io_detail::verified_payload(src, m));
    if (t.dimension() != m.dimension || t.walk_class() != m.cls || t.n_max() != m.n_max)
        throw ParseError("manifest does not describe the payload of '" + src.string() + "'");
    return t;
}

inline DoSEstimate parse_estimate(const std::filesystem::path& src) {
    const Manifest m = read_manifest(src);
    if (!m.stochastic)
        throw ParseError("'" + src.string() + "' holds an exact table; parse it as one");
    const DoSEstimate e = parse_estimate_payload(io_detail::verified_payload(src, m),
                                                 m.tours.value_or(0), m.seed.value_or(0));
    if (e.dimension() != m.dimension || e.n_max() != m.n_max)
        throw ParseError("manifest does not describe the payload of '" + src.string() + "'");
    return e;
}

// ---------------------------------------------------------------------------
// log-space grid specs: "lo:step:hi"

struct GridSpec {
    double lo = 0.0;
    double step = 0.1;
    double hi = 0.0;

    std::vector<double> points() const { return log_grid(lo, step, hi); }
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline GridSpec parse_grid_spec(const std::string& s) {
    const auto bad = [&](const std::string& why) {
        throw ParseError("grid spec '" + s + "': " + why);
    };
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3) bad("expected lo:step:hi");
    double vals[3];
    for (int i = 0; i < 3; ++i) {
        if (parts[i].empty()) bad("empty component");
        char* end = nullptr;
        vals[i] = std::strtod(parts[i].c_str(), &end);
        if (end != parts[i].c_str() + parts[i].size() || !std::isfinite(vals[i]))
            bad("component '" + parts[i] + "' is not a finite number");
    }
    GridSpec g{vals[0], vals[1], vals[2]};
    if (!(g.step > 0)) bad("step must be positive");
    if (g.hi < g.lo) bad("hi must be >= lo");
    return g;
}

inline std::string to_string(const GridSpec& g) {
    return io_detail::fmt_double(g.lo) + ":" + io_detail::fmt_double(g.step) + ":" +
           io_detail::fmt_double(g.hi);
}

// ---------------------------------------------------------------------------
// enumeration cache keyed by (dimension, class, n_max, generator version)

struct CacheOptions {
    std::filesystem::path dir;
    bool enabled = true;
};

inline std::filesystem::path cache_path(const std::filesystem::path& dir, int d, WalkClass cls,
                                        int n_max) {
    std::string version = kGeneratorVersion;
    for (char& c : version)
        if (c == '/') c = '_';
    return dir / (std::string(to_string(cls)) + "-d" + std::to_string(d) + "-n" +
                  std::to_string(n_max) + "-" + version + ".csv");
}

// Enumerate through the cache: a verified hit is returned as-is; a miss (or a
// corrupt entry) regenerates and rewrites. Disabled caches always enumerate.
inline CountTable cached_enumerate(int d, int n_max, WalkClass cls, const CacheOptions& cache,
                                   const EnumerateOptions& opt = {}) {
    if (!cache.enabled || cache.dir.empty()) return enumerate(d, n_max, cls, opt);
    const std::filesystem::path path = cache_path(cache.dir, d, cls, n_max);
    if (std::filesystem::exists(path)) {
        try {
            CountTable t = parse_table(path);
            if (t.dimension() == d && t.walk_class() == cls && t.n_max() == n_max) return t;
        } catch (const Error&) {
            // fall through to regeneration
        }
    }
    CountTable t = enumerate(d, n_max, cls, opt);
    std::filesystem::create_directories(cache.dir);
    serialize_table(t, path);
    return t;
}

}  // namespace sawpull
