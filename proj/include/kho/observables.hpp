#pragma once

#include <cmath>
#include <fstream>
#include <vector>

#include "kho/fft.hpp"
#include "kho/grid.hpp"
#include "kho/grid_io.hpp"

namespace kho {

// First and symmetrized second moments read off the chord function at the
// origin: w = Tr rho e^{i(k x + s p)}, so d_k w|_0 = i<x>, d_k^2 w|_0 = -<x^2>,
// and the mixed derivative gives -<(xp + px)/2>.
struct MomentSet {
    double mean_x = 0.0, mean_p = 0.0;
    double xx = 0.0, pp = 0.0, xp_sym = 0.0;
    bool under_resolved = false;  // 1/e peak width fell below 8 nodes
    int min_width = 0;            // narrower of the two axis widths, in nodes

    double energy() const { return 0.5 * (xx + pp); }
    double var_x() const { return xx - mean_x * mean_x; }
    double var_p() const { return pp - mean_p * mean_p; }
};

enum class GuardPolicy { abort, warn, off };

namespace detail {

// Contiguous nodes around the center where |w| stays above |w(center)|/e.
inline int width_1e(const cd* vals, int n, long stride) {
    const int c = (n - 1) / 2;
    const double thr = std::abs(vals[std::size_t(c) * stride]) / std::exp(1.0);
    int w = 1;
    for (int d = 1; c + d < n && std::abs(vals[(std::size_t(c) + d) * stride]) >= thr; ++d) ++w;
    for (int d = 1; c - d >= 0 && std::abs(vals[(std::size_t(c) - d) * stride]) >= thr; ++d) ++w;
    return w;
}

}  // namespace detail

// Fourth-order central stencils at the origin. The guard flags a peak
// narrower than 8 nodes in either axis, where the stencil goes blind.
inline MomentSet moments(const ChordState& st, GuardPolicy guard = GuardPolicy::abort) {
    const GridSpec& g = st.grid;
    const int ci = g.ck(), cj = g.cs();
    const auto f = [&](int dj, int di) { return st.at(cj + dj, ci + di); };
    const double hk = g.dk(), hs = g.ds();

    const cd d1k = (-f(0, 2) + 8.0 * f(0, 1) - 8.0 * f(0, -1) + f(0, -2)) / (12.0 * hk);
    const cd d1s = (-f(2, 0) + 8.0 * f(1, 0) - 8.0 * f(-1, 0) + f(-2, 0)) / (12.0 * hs);
    const cd d2k = (-f(0, 2) + 16.0 * f(0, 1) - 30.0 * f(0, 0) + 16.0 * f(0, -1) - f(0, -2)) /
                   (12.0 * hk * hk);
    const cd d2s = (-f(2, 0) + 16.0 * f(1, 0) - 30.0 * f(0, 0) + 16.0 * f(-1, 0) - f(-2, 0)) /
                   (12.0 * hs * hs);

    static constexpr int off[4] = {-2, -1, 1, 2};
    static constexpr double wgt[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
    cd dks(0, 0);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) dks += wgt[a] * wgt[b] * f(off[b], off[a]);
    dks /= hk * hs;

    MomentSet m;
    m.mean_x = d1k.imag();
    m.mean_p = d1s.imag();
    m.xx = -d2k.real();
    m.pp = -d2s.real();
    m.xp_sym = -dks.real();

    if (guard != GuardPolicy::off) {
        const int wk = detail::width_1e(st.values.data() + std::size_t(cj) * g.nk, g.nk, 1);
        const int ws = detail::width_1e(st.values.data() + ci, g.ns, g.nk);
        m.min_width = std::min(wk, ws);
        if (m.min_width < 8) {
            m.under_resolved = true;
            if (guard == GuardPolicy::abort)
                throw UnderResolvedError("moment stencil under-resolved: 1/e peak width " +
                                         std::to_string(m.min_width) + " nodes (need >= 8)");
        }
    }
    return m;
}

// W(z, p) on the conjugate grid of the chord function: inverse Fourier
// transform with centered indexing folded into pre/post phase ramps, so no
// fftshift pass is needed. dz = 2 pi / (nk dk), z_m = (m - c) dz.
struct WignerField {
    int nz = 0, np = 0;
    double z_max = 0.0, p_max = 0.0;
    double dz = 0.0, dp = 0.0;
    double tau = 0.0;
    long n_kicks = 0;
    double normalization = 0.0;  // sum W dz dp, equals w(0,0) up to rounding
    double imag_max = 0.0;       // largest dropped imaginary part
    std::vector<double> values;  // row-major [np][nz], z fastest

    double at(int jp, int iz) const { return values[std::size_t(jp) * nz + iz]; }
    double z_at(int i) const { return -z_max + i * dz; }
    double p_at(int j) const { return -p_max + j * dp; }
    double min_value() const {
        double m = values.empty() ? 0.0 : values[0];
        for (double v : values) m = std::min(m, v);
        return m;
    }
    double max_value() const {
        double m = values.empty() ? 0.0 : values[0];
        for (double v : values) m = std::max(m, v);
        return m;
    }
};

namespace detail {

struct AxisPhases {
    std::vector<cd> pre, post;
};

// pre[i] = e^{+2 pi i c i / n}; post[m] = e^{+2 pi i c m / n} e^{-2 pi i c^2 / n}.
inline AxisPhases wigner_phases(int n) {
    const int c = (n - 1) / 2;
    AxisPhases ph;
    ph.pre.resize(std::size_t(n));
    ph.post.resize(std::size_t(n));
    const long double twopin = 2.0L * std::numbers::pi_v<long double> / (long double)n;
    const long double corr = -twopin * (long double)c * (long double)c;
    for (int i = 0; i < n; ++i) {
        const long double a = twopin * (long double)c * (long double)i;
        ph.pre[i] = cd(double(std::cos(a)), double(std::sin(a)));
        const long double b = a + corr;
        ph.post[i] = cd(double(std::cos(b)), double(std::sin(b)));
    }
    return ph;
}

}  // namespace detail

inline WignerField wigner(const ChordState& st) {
    const GridSpec& g = st.grid;
    const int nk = g.nk, ns = g.ns;
    const auto phk = detail::wigner_phases(nk);
    const auto phs = detail::wigner_phases(ns);
    Fft1d fk(nk), fs(ns);

    std::vector<cd> buf(st.values);
    for (int j = 0; j < ns; ++j) {
        cd* row = buf.data() + std::size_t(j) * nk;
        for (int i = 0; i < nk; ++i) row[i] *= phk.pre[i] * phs.pre[j];
        fk.forward(row);
    }
    std::vector<cd> col(static_cast<std::size_t>(ns));
    for (int i = 0; i < nk; ++i) {
        for (int j = 0; j < ns; ++j) col[j] = buf[std::size_t(j) * nk + i];
        fs.forward(col.data());
        for (int j = 0; j < ns; ++j) buf[std::size_t(j) * nk + i] = col[j];
    }

    WignerField wf;
    wf.nz = nk;
    wf.np = ns;
    wf.dz = 2.0 * pi / (nk * g.dk());
    wf.dp = 2.0 * pi / (ns * g.ds());
    wf.z_max = g.ck() * wf.dz;
    wf.p_max = g.cs() * wf.dp;
    wf.tau = st.tau;
    wf.n_kicks = st.n_kicks;
    wf.values.resize(g.size());
    const double scale = g.dk() * g.ds() / (4.0 * pi * pi);
    double sum = 0.0, imx = 0.0;
    for (int j = 0; j < ns; ++j)
        for (int i = 0; i < nk; ++i) {
            const cd v = scale * phs.post[j] * phk.post[i] * buf[std::size_t(j) * nk + i];
            wf.values[std::size_t(j) * nk + i] = v.real();
            sum += v.real();
            imx = std::max(imx, std::abs(v.imag()));
        }
    wf.normalization = sum * wf.dz * wf.dp;
    wf.imag_max = imx;
    return wf;
}

// Position and momentum distributions from the axis cuts of the chord
// function: P(z) = (1/2 pi) int dk e^{-i z k} w(k, 0), and likewise Q(p)
// from w(0, s).
struct Marginals {
    std::vector<double> pz, qp;
    double dz = 0.0, dp = 0.0;
    double z_max = 0.0, p_max = 0.0;
    double pz_norm = 0.0, qp_norm = 0.0;
};

inline Marginals marginals(const ChordState& st) {
    const GridSpec& g = st.grid;
    Marginals mg;

    const auto line = [](std::vector<cd> buf, double h, std::vector<double>& out,
                         double& norm) {
        const int n = int(buf.size());
        const auto ph = detail::wigner_phases(n);
        Fft1d f(n);
        for (int i = 0; i < n; ++i) buf[std::size_t(i)] *= ph.pre[i];
        f.forward(buf.data());
        out.resize(std::size_t(n));
        const double scale = h / (2.0 * pi);
        double sum = 0.0;
        for (int m = 0; m < n; ++m) {
            out[std::size_t(m)] = (scale * ph.post[m] * buf[std::size_t(m)]).real();
            sum += out[std::size_t(m)];
        }
        const double d = 2.0 * pi / (n * h);
        norm = sum * d;
        return d;
    };

    std::vector<cd> row(std::size_t(g.nk));
    for (int i = 0; i < g.nk; ++i) row[std::size_t(i)] = st.at(g.cs(), i);
    mg.dz = line(std::move(row), g.dk(), mg.pz, mg.pz_norm);
    mg.z_max = g.ck() * mg.dz;

    std::vector<cd> colv(std::size_t(g.ns));
    for (int j = 0; j < g.ns; ++j) colv[std::size_t(j)] = st.at(j, g.ck());
    mg.dp = line(std::move(colv), g.ds(), mg.qp, mg.qp_norm);
    mg.p_max = g.cs() * mg.dp;
    return mg;
}

inline void write_wigner(const std::string& path, const WignerField& wf) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw GridIoError("cannot open for write: " + path);
    GridHeader h;
    h.magic = "WIGNR1";
    h.nk = wf.nz;
    h.ns = wf.np;
    h.k_max = wf.z_max;
    h.s_max = wf.p_max;
    h.tau = wf.tau;
    h.n_kicks = wf.n_kicks;
    detail::write_header(os, h);
    os.write(reinterpret_cast<const char*>(wf.values.data()),
             std::streamsize(wf.values.size() * sizeof(double)));
    if (!os) throw GridIoError("write failed: " + path);
}

// Per-kick energies straddling each kick: E_minus just before, E_plus just
// after. The quasi-stationary energy averages (E_plus + E_minus)/2 over the
// last `window` kicks; the heat flow per period pairs E_plus(n) with
// E_minus(n+1). Convergence compares the two half-window averages.
struct CycleSample {
    double E_minus = 0.0, E_plus = 0.0;
};

struct CycleStats {
    double E_qst = 0.0;
    double heat_rate = 0.0;  // dQ/dtau, positive when the bath absorbs energy
    int window = 0;
    bool converged = false;
    double drift = 0.0;  // relative half-window drift of E_qst
};

inline CycleStats cycle_stats(const std::vector<CycleSample>& series, double q,
                              int window = 0) {
    const int N = int(series.size());
    int w = window > 0 ? window : int(std::max<long>(2, std::lround(q)));
    if (N < w + 1)
        throw ValidationError("cycle_stats: need at least window + 1 = " +
                              std::to_string(w + 1) + " kicks, got " + std::to_string(N));
    CycleStats cs;
    cs.window = w;

    double eq = 0.0;
    for (int n = N - w; n < N; ++n) eq += 0.5 * (series[std::size_t(n)].E_plus +
                                                 series[std::size_t(n)].E_minus);
    cs.E_qst = eq / w;

    double dq = 0.0;
    for (int n = N - w - 1; n < N - 1; ++n)
        dq += series[std::size_t(n)].E_plus - series[std::size_t(n) + 1].E_minus;
    cs.heat_rate = (q / (2.0 * pi)) * (dq / w);

    const int h2 = std::max(w / 2, 1);
    double a = 0.0, b = 0.0;
    for (int n = N - w; n < N - w + h2; ++n)
        a += 0.5 * (series[std::size_t(n)].E_plus + series[std::size_t(n)].E_minus);
    for (int n = N - h2; n < N; ++n)
        b += 0.5 * (series[std::size_t(n)].E_plus + series[std::size_t(n)].E_minus);
    a /= h2;
    b /= h2;
    cs.drift = std::abs(b - a) / std::max(std::abs(b), 1e-300);
    cs.converged = cs.drift < 0.005;
    return cs;
}

}  // namespace kho
