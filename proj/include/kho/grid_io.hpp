#pragma once

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "kho/grid.hpp"

namespace kho {

static_assert(std::endian::native == std::endian::little,
              "grid files are little-endian; big-endian hosts are unsupported");

struct GridIoError : Error {
    using Error::Error;
};
struct BadMagicError : GridIoError {
    using GridIoError::GridIoError;
};
struct MalformedHeaderError : GridIoError {
    using GridIoError::GridIoError;
};
struct DimensionMismatchError : GridIoError {
    using GridIoError::GridIoError;
};
struct TruncatedPayloadError : GridIoError {
    using GridIoError::GridIoError;
};

struct GridHeader {
    std::string magic;  // "CHORD1" or "WIGNR1"
    int nk = 0, ns = 0;
    double k_max = 0.0, s_max = 0.0;
    double tau = 0.0;
    long n_kicks = 0;
};

namespace detail {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_header(std::ostream& os, const GridHeader& h) {
    os << h.magic << '\n'
       << h.nk << ' ' << h.ns << '\n'
       << fmt_g17(h.k_max) << ' ' << fmt_g17(h.s_max) << '\n'
       << fmt_g17(h.tau) << ' ' << h.n_kicks << '\n'
       << "---\n";
}

inline GridHeader parse_header(std::istream& is, const std::string& path) {
    GridHeader h;
    std::string line;
    if (!std::getline(is, line)) throw MalformedHeaderError(path + ": empty file");
    if (line != "CHORD1" && line != "WIGNR1")
        throw BadMagicError(path + ": bad magic '" + line + "'");
    h.magic = line;
    if (!std::getline(is, line) ||
        std::sscanf(line.c_str(), "%d %d", &h.nk, &h.ns) != 2)
        throw MalformedHeaderError(path + ": unparseable dimension line");
    if (!std::getline(is, line) ||
        std::sscanf(line.c_str(), "%lf %lf", &h.k_max, &h.s_max) != 2)
        throw MalformedHeaderError(path + ": unparseable extent line");
    if (!std::getline(is, line) ||
        std::sscanf(line.c_str(), "%lf %ld", &h.tau, &h.n_kicks) != 2)
        throw MalformedHeaderError(path + ": unparseable time line");
    if (!std::getline(is, line) || line != "---")
        throw MalformedHeaderError(path + ": missing '---' separator");
    if (h.nk < 17 || h.ns < 17 || h.nk % 2 == 0 || h.ns % 2 == 0 ||
        !(h.k_max > 0.0) || !(h.s_max > 0.0))
        throw DimensionMismatchError(path + ": header declares an invalid grid (" +
                                     std::to_string(h.nk) + " x " + std::to_string(h.ns) + ")");
    return h;
}

}  // namespace detail

// CHORD1 container: five ASCII header lines, then little-endian binary64
// (re, im) pairs, row-major with the k index fastest. Lossless round-trip.
inline void write_grid(const ChordState& st, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw GridIoError("cannot open for writing: " + path);
    detail::write_header(os, {"CHORD1", st.grid.nk, st.grid.ns, st.grid.k_max,
                              st.grid.s_max, st.tau, st.n_kicks});
    os.write(reinterpret_cast<const char*>(st.values.data()),
             std::streamsize(st.values.size() * sizeof(cd)));
    if (!os) throw GridIoError("write failed: " + path);
}

inline GridHeader read_grid_header(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw GridIoError("cannot open: " + path);
    return detail::parse_header(is, path);
}

inline ChordState read_grid(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw GridIoError("cannot open: " + path);
    const GridHeader h = detail::parse_header(is, path);
    if (h.magic != "CHORD1")
        throw BadMagicError(path + ": expected CHORD1, found " + h.magic);
    ChordState st{GridSpec::make(h.nk, h.ns, h.k_max, h.s_max),
                  std::vector<cd>(std::size_t(h.nk) * h.ns), h.tau, h.n_kicks, 0};
    is.read(reinterpret_cast<char*>(st.values.data()),
            std::streamsize(st.values.size() * sizeof(cd)));
    if (std::size_t(is.gcount()) != st.values.size() * sizeof(cd))
        throw TruncatedPayloadError(path + ": payload holds " + std::to_string(is.gcount()) +
                                    " bytes, expected " +
                                    std::to_string(st.values.size() * sizeof(cd)));
    return st;
}

}  // namespace kho
