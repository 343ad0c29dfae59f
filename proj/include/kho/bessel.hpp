#pragma once

#include <cmath>
#include <vector>

#include "kho/common.hpp"

namespace kho {

// J_0(x) .. J_lmax(x) by Miller's downward recurrence: start well above
// lmax, recur down with arbitrary seed, then normalize with
// J_0 + 2 (J_2 + J_4 + ...) = 1. One pass yields every order needed for a
// kick row, uniformly accurate where upward recurrence would blow up.
inline std::vector<double> bessel_jn(int lmax, double x) {
    if (lmax < 0) throw ValidationError("bessel_jn: lmax must be >= 0");
    std::vector<double> out(std::size_t(lmax) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const double ax = std::abs(x);
    const int start = lmax + std::max(20, int(std::ceil(1.5 * ax))) + 15;

    double jp1 = 0.0, jc = 1e-30, sum = 0.0;
    for (int n = start; n >= 0; --n) {
        const double jm1 = (2.0 * (n + 1) / ax) * jc - jp1;
        jp1 = jc;
        jc = jm1;
        // jc now holds J_n (unnormalized)
        if (n <= lmax) out[n] = jc;
        if (n > 0 && n % 2 == 0) sum += 2.0 * jc;
        if (std::abs(jc) > 1e250) {
            const double r = 1e-250;
            jp1 *= r;
            jc *= r;
            sum *= r;
            for (auto& v : out) v *= r;
        }
    }
    sum += jc;  // the n = 0 term
    const double scale = 1.0 / sum;
    for (auto& v : out) v *= scale;
    if (x < 0.0)
        for (int l = 1; l <= lmax; l += 2) out[l] = -out[l];
    return out;
}

// Integer-order value with the reflection J_{-l} = (-1)^l J_l built in.
inline double bessel_j(int l, double x) {
    const int la = l < 0 ? -l : l;
    const double v = bessel_jn(la, x)[std::size_t(la)];
    return (l < 0 && (la % 2 != 0)) ? -v : v;
}

}  // namespace kho
