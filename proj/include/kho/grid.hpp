#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "kho/common.hpp"

namespace kho {

// Uniform grid over [-k_max, k_max] x [-s_max, s_max]. Point counts are odd
// so the origin and both axes land exactly on nodes; that makes the trace
// node, Hermitian-symmetry checks, and the s = 0 kick invariance exact.
struct GridSpec {
    int nk = 0, ns = 0;
    double k_max = 0.0, s_max = 0.0;
    // True when sqrt(2)*eta is an exact integer multiple of dk, so kick
    // displacements are whole node strides.
    bool commensurate_mode = false;

    double dk() const { return 2.0 * k_max / (nk - 1); }
    double ds() const { return 2.0 * s_max / (ns - 1); }
    int ck() const { return (nk - 1) / 2; }  // index of k = 0
    int cs() const { return (ns - 1) / 2; }  // index of s = 0
    double k_at(int i) const { return (i - ck()) * dk(); }
    double s_at(int j) const { return (j - cs()) * ds(); }
    std::size_t size() const { return std::size_t(nk) * std::size_t(ns); }

    bool square() const { return nk == ns && k_max == s_max; }

    static GridSpec make(int nk, int ns, double k_max, double s_max) {
        if (nk < 17 || ns < 17) throw ValidationError("grid: nk, ns must be >= 17");
        if (nk % 2 == 0 || ns % 2 == 0)
            throw ValidationError("grid: nk, ns must be odd so the origin is a node");
        if (!(k_max > 0.0) || !(s_max > 0.0))
            throw ValidationError("grid: extents must be positive");
        return GridSpec{nk, ns, k_max, s_max, false};
    }
    static GridSpec square_grid(int n, double half) { return make(n, n, half, half); }
};

inline bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.nk == b.nk && a.ns == b.ns && a.k_max == b.k_max && a.s_max == b.s_max;
}

// Nudges a requested half-extent so sqrt(2)*eta = node_stride * dk exactly.
// Returns the adjusted square grid; stride is recoverable as
// round(sqrt(2)*eta/dk).
inline GridSpec commensurate_square(int n, double k_max_request, double eta) {
    const double lam = std::sqrt(2.0) * eta;
    const double dk0 = 2.0 * k_max_request / (n - 1);
    const long m = std::max(1L, std::lround(lam / dk0));
    const double dk = lam / double(m);
    GridSpec g = GridSpec::square_grid(n, dk * (n - 1) / 2.0);
    g.commensurate_mode = true;
    return g;
}

// Chord function w(k,s) sampled on the grid. Values are row-major with the
// k index fastest. boundary_leak counts out-of-domain interpolated reads
// (bilinear sample and the non-commensurate kick path); the spectral
// propagator and the commensurate kick perform none.
struct ChordState {
    GridSpec grid;
    std::vector<cd> values;
    double tau = 0.0;
    long n_kicks = 0;
    std::uint64_t boundary_leak = 0;

    cd& at(int j, int i) { return values[std::size_t(j) * grid.nk + i]; }
    const cd& at(int j, int i) const { return values[std::size_t(j) * grid.nk + i]; }
    // Trace node w(0,0) = Tr rho.
    cd trace() const { return at(grid.cs(), grid.ck()); }
};

// w(k,s) = exp(i x0 k + i p0 s - (k^2+s^2)/4); w(0,0) = 1.
inline ChordState coherent_state(const GridSpec& g, double x0, double p0) {
    ChordState st{g, std::vector<cd>(g.size()), 0.0, 0, 0};
    for (int j = 0; j < g.ns; ++j) {
        const double s = g.s_at(j);
        for (int i = 0; i < g.nk; ++i) {
            const double k = g.k_at(i);
            st.at(j, i) = std::exp(-(k * k + s * s) / 4.0) *
                          std::polar(1.0, x0 * k + p0 * s);
        }
    }
    return st;
}

// Stationary chord function of the damped oscillator: exp(-D (k^2+s^2)/2).
inline ChordState stationary_chord(const GridSpec& g, double D) {
    if (!(D > 0.0)) throw ValidationError("stationary_chord: D must be positive");
    ChordState st{g, std::vector<cd>(g.size()), 0.0, 0, 0};
    for (int j = 0; j < g.ns; ++j) {
        const double s = g.s_at(j);
        for (int i = 0; i < g.nk; ++i) {
            const double k = g.k_at(i);
            st.at(j, i) = std::exp(-D * (k * k + s * s) / 2.0);
        }
    }
    return st;
}

namespace detail {

// Bilinear read of the raw value array; counts out-of-domain reads in *leak
// and returns 0 for them. Exact on nodes.
inline cd bilinear_sample(const GridSpec& g, const cd* v, double k, double s,
                          std::uint64_t* leak) {
    if (k < -g.k_max || k > g.k_max || s < -g.s_max || s > g.s_max ||
        std::isnan(k) || std::isnan(s)) {
        if (leak) ++(*leak);
        return cd(0.0, 0.0);
    }
    const double fx = (k + g.k_max) / g.dk();
    const double fy = (s + g.s_max) / g.ds();
    int i0 = int(fx), j0 = int(fy);
    if (i0 > g.nk - 2) i0 = g.nk - 2;  // k == +k_max: weight of node i0+1 is 1
    if (j0 > g.ns - 2) j0 = g.ns - 2;
    const double tx = fx - i0, ty = fy - j0;
    const cd* r0 = v + std::size_t(j0) * g.nk + i0;
    const cd* r1 = r0 + g.nk;
    return (1 - ty) * ((1 - tx) * r0[0] + tx * r0[1]) +
           ty * ((1 - tx) * r1[0] + tx * r1[1]);
}

}  // namespace detail

// Bilinear interpolation of the four surrounding nodes; out-of-domain reads
// return 0 and increment state.boundary_leak.
inline cd sample(ChordState& st, double k, double s) {
    return detail::bilinear_sample(st.grid, st.values.data(), k, s, &st.boundary_leak);
}

// max over nodes of |w(-k,-s) - conj(w(k,s))|; exact because the grid is
// origin-symmetric.
inline double hermitian_defect(const ChordState& st) {
    const GridSpec& g = st.grid;
    double worst = 0.0;
    for (int j = 0; j < g.ns; ++j)
        for (int i = 0; i < g.nk; ++i) {
            const cd d = st.at(g.ns - 1 - j, g.nk - 1 - i) - std::conj(st.at(j, i));
            worst = std::max(worst, std::abs(d));
        }
    return worst;
}

// Largest |w| on the grid boundary; the run manifest reports it as the
// grid-adequacy diagnostic.
inline double boundary_magnitude(const ChordState& st) {
    const GridSpec& g = st.grid;
    double worst = 0.0;
    for (int i = 0; i < g.nk; ++i) {
        worst = std::max(worst, std::abs(st.at(0, i)));
        worst = std::max(worst, std::abs(st.at(g.ns - 1, i)));
    }
    for (int j = 0; j < g.ns; ++j) {
        worst = std::max(worst, std::abs(st.at(j, 0)));
        worst = std::max(worst, std::abs(st.at(j, g.nk - 1)));
    }
    return worst;
}

}  // namespace kho
