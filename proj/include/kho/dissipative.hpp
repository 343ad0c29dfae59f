#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "kho/fft.hpp"
#include "kho/grid.hpp"
#include "kho/model.hpp"
#include "kho/propagator.hpp"

namespace kho {

enum class InterpScheme { spectral, bilinear };

// One linear pass of the factored back-flow. Pullbacks compose left to
// right: applying [P1, P2, ...] computes w(P1 P2 ... r).
struct Stage {
    enum Kind { shear_k, shear_s, scale_k, scale_s, quarter } kind;
    double par = 0.0;  // shear slope or scale factor

    Mat2 matrix() const {
        switch (kind) {
            case shear_k: return {1, par, 0, 1};
            case shear_s: return {1, 0, par, 1};
            case scale_k: return {par, 0, 0, 1};
            case scale_s: return {1, 0, 0, par};
            case quarter: return {0, -1, 1, 0};
        }
        return {1, 0, 0, 1};
    }
};

namespace detail {

// Factors M(-sigma) = c T (c = e^{-beta sigma/2}, T in SL2) into shears,
// axis scalings, and exact quarter turns: the rotation part as a three-shear
// decomposition plus 90-degree permutations, the O(beta) remainder by LDU.
// Every stage is then exact on trigonometric interpolants.
inline std::vector<Stage> build_pipeline(double beta, double sigma, double* residual) {
    const double om = std::sqrt(1.0 - beta * beta / 4.0);
    const Mat2 Minv = evolution_matrix(beta, -sigma);
    const double c = std::exp(-beta * sigma / 2.0);
    const Mat2 T{Minv.a11 / c, Minv.a12 / c, Minv.a21 / c, Minv.a22 / c};

    const double theta = om * sigma;
    const long nq_full = std::lround(theta / (pi / 2.0));
    const int nq = int(((nq_full % 4) + 4) % 4);
    double theta_r = theta - double(nq_full) * (pi / 2.0);
    if (std::abs(theta_r) < 1e-15) theta_r = 0.0;

    std::vector<Stage> st;
    const double a = -std::tan(theta_r / 2.0), b = std::sin(theta_r);
    if (theta_r != 0.0) {
        st.push_back({Stage::shear_k, a});
        st.push_back({Stage::shear_s, b});
        st.push_back({Stage::shear_k, a});
    }
    for (int i = 0; i < nq; ++i) st.push_back({Stage::quarter, 0.0});

    const Mat2 R{std::cos(theta_r), -std::sin(theta_r), std::sin(theta_r), std::cos(theta_r)};
    Mat2 Qp{1, 0, 0, 1};
    const Mat2 Q{0, -1, 1, 0};
    for (int i = 0; i < nq; ++i) Qp = Qp * Q;
    Mat2 B = (R * Qp).inverse() * T;
    // beta = 0 leaves B = I up to rounding; snap so the pipeline is purely
    // the rotation stages (sub-1e-15 slopes would only add FFT noise).
    if (std::abs(B.a11 - 1) < 1e-14 && std::abs(B.a22 - 1) < 1e-14 &&
        std::abs(B.a12) < 1e-14 && std::abs(B.a21) < 1e-14)
        B = {1, 0, 0, 1};

    const double x = B.a12 / B.a22, y = B.a21 / B.a22;
    const double d1 = c / B.a22, d2 = c * B.a22;
    if (x != 0.0) st.push_back({Stage::shear_k, x});
    if (d1 != 1.0) st.push_back({Stage::scale_k, d1});
    if (d2 != 1.0) st.push_back({Stage::scale_s, d2});
    if (y != 0.0) st.push_back({Stage::shear_s, y});

    if (residual) {
        Mat2 P{1, 0, 0, 1};
        for (const auto& s : st) P = P * s.matrix();
        double r = 0.0;
        r = std::max(r, std::abs(P.a11 - Minv.a11));
        r = std::max(r, std::abs(P.a12 - Minv.a12));
        r = std::max(r, std::abs(P.a21 - Minv.a21));
        r = std::max(r, std::abs(P.a22 - Minv.a22));
        *residual = r;
    }
    return st;
}

}  // namespace detail

// Everything precomputable for one (grid, beta, D, sigma): the stage list,
// chirp-z engines for the scale stages, FFT plans, and the Gaussian damp
// table exp(-D beta r^T A(sigma) r).
class DissipativePlan {
public:
    DissipativePlan(const GridSpec& g, const ModelParams& p, double sigma,
                    InterpScheme scheme = InterpScheme::spectral)
        : grid_(g), beta_(p.beta), D_(p.D), sigma_(sigma), scheme_(scheme),
          mats_(make_propagator(p.beta, sigma)) {
        if (!(sigma >= 0.0)) throw ValidationError("dissipative plan: sigma must be >= 0");
        damp_.resize(g.size());
        const Mat2& A = mats_.A;
        for (int j = 0; j < g.ns; ++j) {
            const double s = g.s_at(j);
            for (int i = 0; i < g.nk; ++i) {
                const double k = g.k_at(i);
                damp_[std::size_t(j) * g.nk + i] =
                    std::exp(-D_ * beta_ * (A.a11 * k * k + 2.0 * A.a12 * k * s + A.a22 * s * s));
            }
        }
        if (scheme_ == InterpScheme::spectral) {
            if (!g.square())
                throw ValidationError("spectral scheme needs a square grid "
                                      "(nk = ns, k_max = s_max); use interp = bilinear");
            stages_ = detail::build_pipeline(beta_, sigma_, &residual_);
            if (residual_ > 1e-12)
                throw Error("spectral factorization residual " + std::to_string(residual_));
            fft_n_ = std::make_unique<Fft1d>(g.nk);
            const int n = g.nk;
            zfreq_.resize(std::size_t(n));
            for (int m = 0; m < n; ++m) {
                const int fm = (m <= (n - 1) / 2) ? m : m - n;
                zfreq_[m] = 2.0 * pi * double(fm) / (double(n) * g.dk());
            }
            for (std::size_t si = 0; si < stages_.size(); ++si) {
                const Stage& s = stages_[si];
                if (s.kind == Stage::scale_k || s.kind == Stage::scale_s)
                    scale_.emplace_back(make_scale_tables(si, s.par));
            }
        }
    }

    const GridSpec& grid() const { return grid_; }
    double sigma() const { return sigma_; }
    InterpScheme scheme() const { return scheme_; }
    const PropagatorMatrices& matrices() const { return mats_; }
    double factorization_residual() const { return residual_; }
    const std::vector<Stage>& stages() const { return stages_; }

    // new w(r) = old w(M(-sigma) r) * exp(-D beta r^T A r); advances tau.
    ChordState apply(const ChordState& in) const {
        if (!(in.grid == grid_)) throw ValidationError("dissipative plan: grid mismatch");
        ChordState out{grid_, in.values, in.tau + sigma_, in.n_kicks, in.boundary_leak};
        if (scheme_ == InterpScheme::spectral)
            apply_spectral(out.values);
        else
            apply_bilinear(in, out);
        const std::size_t total = grid_.size();
        const double* dmp = damp_.data();
        cd* v = out.values.data();
#pragma omp parallel for schedule(static)
        for (long long idx = 0; idx < (long long)total; ++idx) v[idx] *= dmp[idx];
        return out;
    }

private:
    struct ScaleTables {
        std::size_t stage_index;
        std::unique_ptr<Czt> czt;
        std::vector<cd> pre, post;  // fftshift-order phase, recentering phase
    };

    ScaleTables make_scale_tables(std::size_t si, double d) const {
        const int n = grid_.nk;
        const int M = (n - 1) / 2;
        ScaleTables t;
        t.stage_index = si;
        t.czt = std::make_unique<Czt>(n, d);
        t.pre.resize(std::size_t(n));
        t.post.resize(std::size_t(n));
        // alpha re-anchors the interpolant at the left grid edge before the
        // chirp-z evaluates it at d * k_i; post undoes the centered indexing.
        const long double alpha = (long double)(d - 1.0) * (-(long double)grid_.k_max) /
                                  (long double)grid_.dk();
        const long double twopin = 2.0L * std::numbers::pi_v<long double> / (long double)n;
        for (int m = 0; m < n; ++m) {
            const long double ang = twopin * (long double)(m - M) * alpha;
            t.pre[m] = cd(double(std::cos(ang)), double(std::sin(ang)));
        }
        for (int k = 0; k < n; ++k) {
            const long double ang = -twopin * (long double)M * (long double)d * (long double)k;
            t.post[k] = cd(double(std::cos(ang)), double(std::sin(ang)));
        }
        return t;
    }

    const ScaleTables& tables_for(std::size_t si) const {
        for (const auto& t : scale_)
            if (t.stage_index == si) return t;
        throw Error("internal: missing chirp-z tables");
    }

    // Trig-interpolant shear along the fast (k) axis: row j shifts by
    // par * s_j via the FFT shift theorem.
    void pass_shear_k(std::vector<cd>& w, double par) const {
        const int n = grid_.nk;
#pragma omp parallel for schedule(static)
        for (int j = 0; j < grid_.ns; ++j) {
            cd* row = w.data() + std::size_t(j) * n;
            const double delta = par * grid_.s_at(j);
            fft_n_->forward(row);
            for (int m = 0; m < n; ++m) row[m] *= std::polar(1.0, zfreq_[m] * delta);
            fft_n_->backward(row);
            const double inv = 1.0 / n;
            for (int m = 0; m < n; ++m) row[m] *= inv;
        }
    }

    void pass_shear_s(std::vector<cd>& w, double par) const {
        const int n = grid_.nk;
#pragma omp parallel
        {
            std::vector<cd> col(static_cast<std::size_t>(n));
#pragma omp for schedule(static)
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) col[j] = w[std::size_t(j) * n + i];
                const double delta = par * grid_.k_at(i);
                fft_n_->forward(col.data());
                for (int m = 0; m < n; ++m) col[m] *= std::polar(1.0, zfreq_[m] * delta);
                fft_n_->backward(col.data());
                const double inv = 1.0 / n;
                for (int j = 0; j < n; ++j) w[std::size_t(j) * n + i] = col[j] * inv;
            }
        }
    }

    // Evaluate each line's trig interpolant at d * coordinate: forward FFT,
    // shift to centered order, chirp-z at ratio d, recenter, normalize.
    void resample_line(cd* line, std::vector<cd>& tmp, std::vector<cd>& pad,
                       const ScaleTables& t) const {
        const int n = grid_.nk;
        const int M = (n - 1) / 2;
        fft_n_->forward(line);
        for (int m = 0; m < n; ++m) tmp[m] = line[(m + M + 1) % n] * t.pre[m];
        t.czt->apply(tmp.data(), pad.data());
        const double inv = 1.0 / n;
        for (int k = 0; k < n; ++k) line[k] = tmp[k] * t.post[k] * inv;
    }

    void pass_scale_k(std::vector<cd>& w, const ScaleTables& t) const {
        const int n = grid_.nk;
#pragma omp parallel
        {
            std::vector<cd> tmp(static_cast<std::size_t>(n));
            std::vector<cd> pad(static_cast<std::size_t>(t.czt->pad()));
#pragma omp for schedule(static)
            for (int j = 0; j < grid_.ns; ++j)
                resample_line(w.data() + std::size_t(j) * n, tmp, pad, t);
        }
    }

    void pass_scale_s(std::vector<cd>& w, const ScaleTables& t) const {
        const int n = grid_.nk;
#pragma omp parallel
        {
            std::vector<cd> col(static_cast<std::size_t>(n));
            std::vector<cd> tmp(static_cast<std::size_t>(n));
            std::vector<cd> pad(static_cast<std::size_t>(t.czt->pad()));
#pragma omp for schedule(static)
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) col[j] = w[std::size_t(j) * n + i];
                resample_line(col.data(), tmp, pad, t);
                for (int j = 0; j < n; ++j) w[std::size_t(j) * n + i] = col[j];
            }
        }
    }

    // g(k,s) = f(-s, k): exact array permutation (square grid).
    void pass_quarter(std::vector<cd>& w, std::vector<cd>& scratch) const {
        const int n = grid_.nk;
#pragma omp parallel for schedule(static)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                scratch[std::size_t(j) * n + i] = w[std::size_t(i) * n + (n - 1 - j)];
        w.swap(scratch);
    }

    void apply_spectral(std::vector<cd>& w) const {
        std::vector<cd> scratch;
        for (std::size_t si = 0; si < stages_.size(); ++si) {
            const Stage& s = stages_[si];
            switch (s.kind) {
                case Stage::shear_k: pass_shear_k(w, s.par); break;
                case Stage::shear_s: pass_shear_s(w, s.par); break;
                case Stage::scale_k: pass_scale_k(w, tables_for(si)); break;
                case Stage::scale_s: pass_scale_s(w, tables_for(si)); break;
                case Stage::quarter:
                    if (scratch.empty()) scratch.resize(w.size());
                    pass_quarter(w, scratch);
                    break;
            }
        }
    }

    // Literal gather scheme: new w(r) = bilinear sample at M(-sigma) r.
    // Out-of-domain back-traces count into boundary_leak.
    void apply_bilinear(const ChordState& in, ChordState& out) const {
        const GridSpec& g = grid_;
        const Mat2& Mi = mats_.M_inv;
        std::vector<std::uint64_t> row_leaks(std::size_t(g.ns), 0);
#pragma omp parallel for schedule(static)
        for (int j = 0; j < g.ns; ++j) {
            const double s = g.s_at(j);
            std::uint64_t leaks = 0;
            for (int i = 0; i < g.nk; ++i) {
                const double k = g.k_at(i);
                const double kb = Mi.a11 * k + Mi.a12 * s;
                const double sb = Mi.a21 * k + Mi.a22 * s;
                out.at(j, i) = detail::bilinear_sample(g, in.values.data(), kb, sb, &leaks);
            }
            row_leaks[j] = leaks;
        }
        for (auto l : row_leaks) out.boundary_leak += l;
    }

    GridSpec grid_;
    double beta_, D_, sigma_;
    InterpScheme scheme_;
    PropagatorMatrices mats_;
    std::vector<Stage> stages_;
    double residual_ = 0.0;
    std::vector<double> damp_;
    std::unique_ptr<Fft1d> fft_n_;
    std::vector<double> zfreq_;
    std::vector<ScaleTables> scale_;
};

// One-shot convenience matching the op contract; scenario runs reuse a plan.
inline ChordState apply_dissipative(const ChordState& st, double sigma, const ModelParams& p,
                                    InterpScheme scheme = InterpScheme::spectral) {
    DissipativePlan plan(st.grid, p, sigma, scheme);
    return plan.apply(st);
}

}  // namespace kho
