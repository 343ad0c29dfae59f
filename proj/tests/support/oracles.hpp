#pragma once

// Independent reference implementations used only by tests: brute-force
// series, quadrature, and ODE integration that share no code path with the
// library algorithms they check.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracles {

// J_l(x) by the ascending power series in long double; accurate to ~1e-15
// for |x| <= 25, far beyond every argument exercised here.
inline double bessel_series(int l, double x) {
    const int la = l < 0 ? -l : l;
    const long double half = 0.5L * (long double)std::abs(x);
    long double term = 1.0L;
    for (int i = 1; i <= la; ++i) term *= half / i;
    long double sum = term;
    const long double h2 = half * half;
    for (int m = 1; m < 400; ++m) {
        term *= -h2 / ((long double)m * (long double)(m + la));
        sum += term;
        if (std::abs(term) < 1e-25L * (std::abs(sum) + 1e-30L)) break;
    }
    double v = double(sum);
    if (x < 0.0 && la % 2 != 0) v = -v;
    if (l < 0 && la % 2 != 0) v = -v;
    return v;
}

// Phase-space characteristics dk/dt = s, ds/dt = beta s - k integrated with
// fixed-step RK4; exp(t F) columns recover the evolution matrix.
struct Char2 {
    double k, s;
};

inline Char2 characteristic_flow(double beta, double t, Char2 r0, int steps = 20000) {
    const double dt = t / steps;
    const auto f = [beta](Char2 r) { return Char2{r.s, beta * r.s - r.k}; };
    Char2 r = r0;
    for (int i = 0; i < steps; ++i) {
        const Char2 k1 = f(r);
        const Char2 k2 = f({r.k + 0.5 * dt * k1.k, r.s + 0.5 * dt * k1.s});
        const Char2 k3 = f({r.k + 0.5 * dt * k2.k, r.s + 0.5 * dt * k2.s});
        const Char2 k4 = f({r.k + dt * k3.k, r.s + dt * k3.s});
        r.k += (dt / 6.0) * (k1.k + 2.0 * k2.k + 2.0 * k3.k + k4.k);
        r.s += (dt / 6.0) * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
    }
    return r;
}

// Second-moment closure of the damped oscillator with diffusion:
//   d<x>   = <p>            d<p>   = -<x> - beta <p>
//   d<x2>  = C              dC     = 2<p2> - 2<x2> - beta C
//   d<p2>  = -C - 2 beta <p2> + 2 beta D        (C = <xp + px>)
struct MomentOde {
    double mean_x = 0.0, mean_p = 0.0;
    double xx = 0.5, pp = 0.5, C = 0.0;

    double energy() const { return 0.5 * (xx + pp); }
    double xp_sym() const { return 0.5 * C; }
};

inline MomentOde moment_ode_flow(MomentOde m, double beta, double D, double t,
                                 int steps_per_unit = 4000) {
    const int steps = std::max(1, int(std::ceil(std::abs(t) * steps_per_unit)));
    const double dt = t / steps;
    const auto f = [beta, D](const MomentOde& u) {
        MomentOde d;
        d.mean_x = u.mean_p;
        d.mean_p = -u.mean_x - beta * u.mean_p;
        d.xx = u.C;
        d.C = 2.0 * u.pp - 2.0 * u.xx - beta * u.C;
        d.pp = -u.C - 2.0 * beta * u.pp + 2.0 * beta * D;
        return d;
    };
    const auto axpy = [](const MomentOde& u, double a, const MomentOde& v) {
        MomentOde r;
        r.mean_x = u.mean_x + a * v.mean_x;
        r.mean_p = u.mean_p + a * v.mean_p;
        r.xx = u.xx + a * v.xx;
        r.pp = u.pp + a * v.pp;
        r.C = u.C + a * v.C;
        return r;
    };
    for (int i = 0; i < steps; ++i) {
        const MomentOde k1 = f(m);
        const MomentOde k2 = f(axpy(m, 0.5 * dt, k1));
        const MomentOde k3 = f(axpy(m, 0.5 * dt, k2));
        const MomentOde k4 = f(axpy(m, dt, k3));
        m = axpy(m, dt / 6.0, k1);
        m = axpy(m, dt / 3.0, k2);
        m = axpy(m, dt / 3.0, k3);
        m = axpy(m, dt / 6.0, k4);
    }
    return m;
}

// Least squares y = a x + b with coefficient of determination.
struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    const double den = double(n) * sxx - sx * sx;
    f.slope = (double(n) * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / double(n);
    double ss_res = 0, ss_tot = 0;
    const double ym = sy / double(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double fit = f.slope * x[i] + f.intercept;
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - ym) * (y[i] - ym);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace oracles
