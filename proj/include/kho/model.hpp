#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kho/common.hpp"

namespace kho {

// Dimensionful inputs. Only used by from_physical; the rest of the library
// works in the dimensionless parameter set below.
struct PhysicalParams {
    double m = 1.0;       // mass
    double omega0 = 1.0;  // oscillator angular frequency
    double gamma = 0.0;   // damping constant
    double T = 0.0;       // bath temperature
    double K = 0.0;       // kick strength (energy * time)
    double mu = 1.0;      // kick wave number
    double Tk = 1.0;      // kick period
    double hbar = 1.0;
    double kB = 1.0;
};

// Dimensionless model parameters. Derived quantities are always recomputed
// from the primaries so they can never go stale.
struct ModelParams {
    double beta = 0.0;   // energy decay rate, 0 <= beta < 2 (underdamped)
    double D = 0.0;      // diffusion constant (thermal energy / quantum)
    double kappa = 0.0;  // kick strength
    double eta = 1.0;    // Lamb-Dicke parameter, > 0
    double q = 4.0;      // kicks per oscillator period, > 0

    double sigma_k() const { return 2.0 * pi / q; }
    double kick_amplitude() const { return kappa / (std::sqrt(2.0) * eta * eta); }
    // Largest Bessel argument reached by the kick coefficients.
    double bessel_scale() const { return std::sqrt(2.0) * std::abs(kappa) / (eta * eta); }
    double omega_eff() const { return std::sqrt(1.0 - beta * beta / 4.0); }

    double eta2() const { return eta * eta; }
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
};

// Names every violated invariant; ok iff none. beta in [1,2) is legal but
// flagged: the source analysis only discusses beta < 1.
inline ValidationReport validate(const ModelParams& p) {
    ValidationReport r;
    auto fail = [&](const std::string& s) {
        r.ok = false;
        r.violations.push_back(s);
    };
    if (!(p.beta >= 0.0) || !(p.beta < 2.0))
        fail("beta must satisfy 0 <= beta < 2 (underdamped regime, omega_eff real); got " +
             std::to_string(p.beta));
    if (!(p.D >= 0.0)) fail("D must be non-negative; got " + std::to_string(p.D));
    if (!(p.eta > 0.0))
        fail("eta must be positive (kick_amplitude divides by eta^2); got " +
             std::to_string(p.eta));
    if (!(p.q > 0.0)) fail("q must be positive; got " + std::to_string(p.q));
    if (r.ok && p.beta >= 1.0)
        r.warnings.push_back("beta in [1,2): formulas remain valid but outside the regime "
                             "discussed by the source analysis (beta < 1)");
    return r;
}

inline ValidationReport validate(const PhysicalParams& p) {
    ValidationReport r;
    auto fail = [&](const std::string& s) {
        r.ok = false;
        r.violations.push_back(s);
    };
    if (!(p.m > 0.0)) fail("m must be positive");
    if (!(p.omega0 > 0.0)) fail("omega0 must be positive");
    if (!(p.Tk > 0.0)) fail("Tk must be positive");
    if (!(p.hbar > 0.0)) fail("hbar must be positive");
    if (!(p.kB > 0.0)) fail("kB must be positive");
    if (!(p.gamma >= 0.0)) fail("gamma must be non-negative");
    if (!(p.T >= 0.0)) fail("T must be non-negative");
    if (!(p.mu >= 0.0)) fail("mu must be non-negative");
    return r;
}

// beta = 2 gamma / omega0, D = kB T / (hbar omega0), eta = mu sqrt(hbar / (2 m omega0)),
// kappa = K mu^2 / (sqrt(2) m omega0), q = 2 pi / (omega0 Tk).
inline ModelParams from_physical(const PhysicalParams& p) {
    auto pr = validate(p);
    if (!pr.ok) throw ValidationError("from_physical: " + pr.violations.front());
    ModelParams mp;
    mp.beta = 2.0 * p.gamma / p.omega0;
    mp.D = p.kB * p.T / (p.hbar * p.omega0);
    mp.eta = p.mu * std::sqrt(p.hbar / (2.0 * p.m * p.omega0));
    mp.kappa = p.K * p.mu * p.mu / (std::sqrt(2.0) * p.m * p.omega0);
    mp.q = 2.0 * pi / (p.omega0 * p.Tk);
    if (mp.beta >= 2.0)
        throw ValidationError("from_physical: overdamped (beta = " + std::to_string(mp.beta) +
                              " >= 2) is outside the implemented solution branch");
    return mp;
}

}  // namespace kho
