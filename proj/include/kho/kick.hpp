#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kho/bessel.hpp"
#include "kho/grid.hpp"
#include "kho/model.hpp"

namespace kho {

// Bessel argument of the kick at chord coordinate s.
inline double kick_argument(const ModelParams& p, double s) {
    return 2.0 * p.kick_amplitude() * std::sin(p.eta * s / std::sqrt(2.0));
}

// Weight of the l-th sideband: (-1)^l J_l(Z(s)).
inline double kick_coefficient(const ModelParams& p, int l, double s) {
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    return sign * bessel_j(l, kick_argument(p, s));
}

// Smallest L with 1 - sum_{|l|<=L} J_l(z_max)^2 < tol: the worst-case weight
// left outside the retained sidebands.
inline int truncation_order(double z_max, double tol) {
    if (!(tol > 0.0)) throw ValidationError("truncation_order: tol must be > 0");
    const double az = std::abs(z_max);
    const int cap = 40 + int(std::ceil(1.5 * az));
    const std::vector<double> jn = bessel_jn(cap, az);
    double sum = jn[0] * jn[0];
    if (1.0 - sum < tol) return 0;
    for (int L = 1; L <= cap; ++L) {
        sum += 2.0 * jn[std::size_t(L)] * jn[std::size_t(L)];
        if (1.0 - sum < tol) return L;
    }
    throw TruncationError("kick truncation: tail stays above tol at order " +
                          std::to_string(cap));
}

inline int truncation_order(const ModelParams& p, double tol) {
    return truncation_order(p.bessel_scale(), tol);
}

// Precomputed kick: per-row coefficient table plus the sideband shifts.
// coeff_table is row-major [ns][2L+1], entry (j, L+l) = (-1)^l J_l(Z(s_j)).
struct KickPlan {
    GridSpec grid;
    double kappa = 0.0, eta = 1.0;
    double tol_tail = 1e-14;
    int L = 0;
    bool commensurate = false;
    long node_shift = 0;          // sqrt(2) eta = node_shift * dk when commensurate
    std::vector<double> shifts;   // sqrt(2) eta l for l = -L..L
    std::vector<double> coeff_table;

    double coeff(int j, int l) const {
        return coeff_table[std::size_t(j) * (2 * std::size_t(L) + 1) + std::size_t(L + l)];
    }
};

inline KickPlan make_kick_plan(const GridSpec& g, const ModelParams& p,
                               double tol_tail = 1e-14) {
    KickPlan plan;
    plan.grid = g;
    plan.kappa = p.kappa;
    plan.eta = p.eta;
    plan.tol_tail = tol_tail;
    plan.L = truncation_order(p, tol_tail);

    const double step = std::sqrt(2.0) * p.eta;
    const double ratio = step / g.dk();
    plan.node_shift = std::lround(ratio);
    plan.commensurate = std::abs(ratio - double(plan.node_shift)) < 1e-9;

    plan.shifts.resize(2 * std::size_t(plan.L) + 1);
    for (int l = -plan.L; l <= plan.L; ++l)
        plan.shifts[std::size_t(plan.L + l)] = step * l;

    plan.coeff_table.resize(std::size_t(g.ns) * (2 * std::size_t(plan.L) + 1));
    for (int j = 0; j < g.ns; ++j) {
        const double z = kick_argument(p, g.s_at(j));
        const std::vector<double> jn = bessel_jn(plan.L, z);
        for (int l = -plan.L; l <= plan.L; ++l) {
            const int a = l < 0 ? -l : l;
            double v = jn[std::size_t(a)];
            if (l < 0 && a % 2 != 0) v = -v;       // J_{-l} = (-1)^l J_l
            if (a % 2 != 0) v = -v;                // the (-1)^l weight
            plan.coeff_table[std::size_t(j) * (2 * std::size_t(plan.L) + 1) +
                             std::size_t(plan.L + l)] = v;
        }
    }
    return plan;
}

// w'(k, s) = sum_l (-1)^l J_l(Z(s)) w(k - sqrt(2) eta l, s), summed in the
// order l = 0, +1, -1, +2, -2, ... for run-to-run reproducibility. Reads
// past the k edge contribute zero. When sqrt(2) eta is a whole number of
// grid steps the shifts are exact node moves; otherwise each sideband is
// linearly interpolated in k and off-domain reads count into boundary_leak.
inline void apply_kick(ChordState& st, const KickPlan& plan) {
    const GridSpec& g = plan.grid;
    if (!(st.grid == g)) throw ValidationError("kick plan: grid mismatch");
    const int nk = g.nk, L = plan.L;
    const long m = plan.node_shift;
    std::vector<std::uint64_t> row_leaks(std::size_t(g.ns), 0);

#pragma omp parallel
    {
        std::vector<cd> src(static_cast<std::size_t>(nk));
        std::vector<cd> acc(static_cast<std::size_t>(nk));
#pragma omp for schedule(static)
        for (int j = 0; j < g.ns; ++j) {
            cd* row = st.values.data() + std::size_t(j) * nk;
            std::copy(row, row + nk, src.begin());
            std::fill(acc.begin(), acc.end(), cd(0, 0));
            std::uint64_t leaks = 0;
            bool first = true;  // first live sideband assigns, so a lone
                                // coefficient of 1 reproduces the row bitwise
            for (int t = 0; t <= 2 * L; ++t) {
                // t = 0, 1, 2, 3, ... encodes l = 0, +1, -1, +2, ...
                const int l = (t % 2 == 1) ? (t + 1) / 2 : -(t / 2);
                const double c = plan.coeff(j, l);
                if (c == 0.0) continue;
                if (plan.commensurate) {
                    const long off = m * l;
                    if (first) {
                        for (int i = 0; i < nk; ++i) {
                            const long is = i - off;
                            acc[std::size_t(i)] = (is >= 0 && is < nk)
                                                      ? c * src[std::size_t(is)]
                                                      : cd(0, 0);
                        }
                    } else {
                        for (int i = 0; i < nk; ++i) {
                            const long is = i - off;
                            if (is >= 0 && is < nk)
                                acc[std::size_t(i)] += c * src[std::size_t(is)];
                        }
                    }
                    first = false;
                } else {
                    const double off = plan.shifts[std::size_t(L + l)] / g.dk();
                    for (int i = 0; i < nk; ++i) {
                        const double pos = double(i) - off;
                        const double fl = std::floor(pos);
                        const long i0 = long(fl);
                        const double f = pos - fl;
                        cd v(0, 0);
                        bool oob = false;
                        if (i0 >= 0 && i0 < nk)
                            v += (1.0 - f) * src[std::size_t(i0)];
                        else if (f < 1.0)
                            oob = true;
                        if (i0 + 1 >= 0 && i0 + 1 < nk)
                            v += f * src[std::size_t(i0 + 1)];
                        else if (f > 0.0)
                            oob = true;
                        if (oob) ++leaks;
                        if (first)
                            acc[std::size_t(i)] = c * v;
                        else
                            acc[std::size_t(i)] += c * v;
                    }
                    first = false;
                }
            }
            std::copy(acc.begin(), acc.end(), row);
            row_leaks[std::size_t(j)] = leaks;
        }
    }
    for (auto l : row_leaks) st.boundary_leak += l;
    st.n_kicks += 1;
}

inline void apply_kick(ChordState& st, const ModelParams& p, double tol_tail = 1e-14) {
    const KickPlan plan = make_kick_plan(st.grid, p, tol_tail);
    apply_kick(st, plan);
}

}  // namespace kho
