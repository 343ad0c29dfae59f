#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "kho/common.hpp"

namespace kho {

struct Mat2 {
    // row-major: [[a11, a12], [a21, a22]]
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

    double det() const { return a11 * a22 - a12 * a21; }
    Mat2 transpose() const { return {a11, a21, a12, a22}; }
    Mat2 inverse() const {
        const double d = det();
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }
    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.a11 * y.a11 + x.a12 * y.a21, x.a11 * y.a12 + x.a12 * y.a22,
                x.a21 * y.a11 + x.a22 * y.a21, x.a21 * y.a12 + x.a22 * y.a22};
    }
    friend Mat2 operator*(double c, const Mat2& x) {
        return {c * x.a11, c * x.a12, c * x.a21, c * x.a22};
    }
    friend Mat2 operator+(const Mat2& x, const Mat2& y) {
        return {x.a11 + y.a11, x.a12 + y.a12, x.a21 + y.a21, x.a22 + y.a22};
    }
    friend Mat2 operator-(const Mat2& x, const Mat2& y) {
        return {x.a11 - y.a11, x.a12 - y.a12, x.a21 - y.a21, x.a22 - y.a22};
    }
};

inline void check_beta(double beta) {
    if (!(beta >= 0.0) || !(beta < 2.0))
        throw ValidationError("propagator: beta must satisfy 0 <= beta < 2");
}

// Characteristic flow on chord coordinates r = (k, s):
// M(sigma) = e^{beta sigma/2} [[cos ws - (b/2w) sin ws, (1/w) sin ws],
//                              [-(1/w) sin ws, cos ws + (b/2w) sin ws]],
// w = sqrt(1 - beta^2/4). Satisfies M(0) = I, det M = e^{beta sigma}.
inline Mat2 evolution_matrix(double beta, double sigma) {
    check_beta(beta);
    const double om = std::sqrt(1.0 - beta * beta / 4.0);
    const double c = std::cos(om * sigma), s = std::sin(om * sigma);
    const double b2 = beta / (2.0 * om);
    const double e = std::exp(beta * sigma / 2.0);
    return {e * (c - b2 * s), e * (s / om), e * (-s / om), e * (c + b2 * s)};
}

// Diffusion quadratic form A(sigma) = int_0^sigma e^{-beta u} phi(u) phi(u)^T du
// with phi(u) = ((1/w) sin wu, cos wu - (b/2w) sin wu), i.e. the trig parts of
// M evaluated at -u. This orientation is fixed by the exact stationary state:
// A(inf) = (1/2 beta) I and M(-s)^T M(-s) + 2 beta A(s) = I hold identically.
// Closed form via antiderivatives of e^{-bu} {sin^2, sin cos, cos^2}(wu).
inline Mat2 diffusion_matrix(double beta, double sigma) {
    check_beta(beta);
    if (!(sigma >= 0.0)) throw ValidationError("diffusion_matrix: sigma must be >= 0");
    const double om = std::sqrt(1.0 - beta * beta / 4.0);
    const double b = beta;
    const double E0 = (b == 0.0) ? sigma : -std::expm1(-b * sigma) / b;
    const double c2 = std::cos(2.0 * om * sigma), s2 = std::sin(2.0 * om * sigma);
    const double e = std::exp(-b * sigma);
    const double den = b * b + 4.0 * om * om;
    const double C2 = (b - e * (b * c2 - 2.0 * om * s2)) / den;
    const double S2 = (2.0 * om - e * (b * s2 + 2.0 * om * c2)) / den;
    const double A1 = (E0 - C2) / (2.0 * om * om);
    const double A2 = S2 / (2.0 * om) - b * (E0 - C2) / (4.0 * om * om);
    const double A3 = (E0 + C2) / 2.0 - b / (2.0 * om) * S2 +
                      b * b / (8.0 * om * om) * (E0 - C2);
    return {A1, A2, A2, A3};
}

// Adaptive-Simpson fallback for the same integral; closed form and quadrature
// must agree (checked in tests and available behind the oracle flag).
inline Mat2 diffusion_matrix_quadrature(double beta, double sigma, double tol = 1e-12) {
    check_beta(beta);
    const double om = std::sqrt(1.0 - beta * beta / 4.0);
    auto integrand = [&](double u, int which) {
        const double f1 = std::sin(om * u) / om;
        const double f2 = std::cos(om * u) - beta / (2.0 * om) * std::sin(om * u);
        const double e = std::exp(-beta * u);
        return which == 0 ? e * f1 * f1 : which == 1 ? e * f1 * f2 : e * f2 * f2;
    };
    auto simpson = [&](double a, double b, int which) {
        struct Rec {
            double a, b, fa, fm, fb, whole;
        };
        auto s = [&](double a, double b, double fa, double fm, double fb) {
            return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        };
        const double m0 = 0.5 * (a + b);
        double fa = integrand(a, which), fm = integrand(m0, which), fb = integrand(b, which);
        double total = 0.0;
        std::vector<std::pair<Rec, double>> stack{{{a, b, fa, fm, fb, s(a, b, fa, fm, fb)}, tol}};
        while (!stack.empty()) {
            auto [r, eps] = stack.back();
            stack.pop_back();
            const double m = 0.5 * (r.a + r.b);
            const double lm = 0.5 * (r.a + m), rm = 0.5 * (m + r.b);
            const double flm = integrand(lm, which), frm = integrand(rm, which);
            const double left = s(r.a, m, r.fa, flm, r.fm);
            const double right = s(m, r.b, r.fm, frm, r.fb);
            if (std::abs(left + right - r.whole) <= 15.0 * eps || (r.b - r.a) < 1e-12) {
                total += left + right + (left + right - r.whole) / 15.0;
            } else {
                stack.push_back({{r.a, m, r.fa, flm, r.fm, left}, eps / 2.0});
                stack.push_back({{m, r.b, r.fm, frm, r.fb, right}, eps / 2.0});
            }
        }
        return total;
    };
    const double A1 = simpson(0.0, sigma, 0);
    const double A2 = simpson(0.0, sigma, 1);
    const double A3 = simpson(0.0, sigma, 2);
    return {A1, A2, A2, A3};
}

// Per-period bundle: M(sigma), its inverse M(-sigma), and A(sigma). Entry
// accessors follow the m1..m4 / A1..A3 naming of the characteristic solution.
struct PropagatorMatrices {
    double sigma = 0.0;
    Mat2 M, M_inv, A;

    double m1() const { return M.a11; }
    double m2() const { return M.a12; }
    double m3() const { return M.a21; }
    double m4() const { return M.a22; }
    double A1() const { return A.a11; }
    double A2() const { return A.a12; }
    double A3() const { return A.a22; }
};

inline PropagatorMatrices make_propagator(double beta, double sigma) {
    return {sigma, evolution_matrix(beta, sigma), evolution_matrix(beta, -sigma),
            diffusion_matrix(beta, sigma)};
}

}  // namespace kho
