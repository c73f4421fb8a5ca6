// params.hpp — Static physical parameters of the two-emitter + cavity system
//
// Every rate and frequency is an angular frequency in rad/ns; times are in ns.
// Frequencies are measured in the frame rotating at the reference emitter
// frequency omega0_ref, so omega_c is the cavity offset ω_c − ω₀.

#pragma once

#include <cmath>
#include <string>

#include "duoatom/error.hpp"
#include "duoatom/units.hpp"

namespace duoatom {

struct PhysicalParams {
    double g{0.0};          // emitter–cavity coupling (per emitter)
    double kappa{0.0};      // cavity energy decay rate
    double gamma{0.0};      // single-emitter leaky decay rate
    double gamma12{0.0};    // cross damping
    double omega12{0.0};    // dipole–dipole coupling
    double omega0_ref{0.0}; // absolute reference emitter frequency (informational)
    double omega_c{0.0};    // cavity frequency offset ω_c − ω₀_ref

    double gamma_plus() const { return gamma + gamma12; }
    double gamma_minus() const { return gamma - gamma12; }
};

inline void validate(const PhysicalParams& p) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(p.g) || !finite(p.kappa) || !finite(p.gamma) || !finite(p.gamma12) ||
        !finite(p.omega12) || !finite(p.omega_c) || !finite(p.omega0_ref))
        throw ValidationError("physical parameters must be finite");
    if (p.g < 0 || p.kappa < 0 || p.gamma < 0 || p.gamma12 < 0 || p.omega12 < 0)
        throw ValidationError("rates g, kappa, gamma, gamma12, omega12 must be non-negative");
    if (p.gamma12 > p.gamma)
        throw ValidationError("gamma12 exceeds gamma (cross damping is bounded by the single-emitter rate)");
}

/// Build parameters from μeV values. `omega_c_offset_ueV` is ω_c − ω₀.
inline PhysicalParams params_from_ueV(double g_ueV, double kappa_ueV, double gamma_ueV,
                                      double omega12_ueV, double gamma12_over_gamma,
                                      double omega_c_offset_ueV) {
    PhysicalParams p;
    p.g = units::ueV(g_ueV);
    p.kappa = units::ueV(kappa_ueV);
    p.gamma = units::ueV(gamma_ueV);
    p.gamma12 = gamma12_over_gamma * p.gamma;
    p.omega12 = units::ueV(omega12_ueV);
    p.omega_c = units::ueV(omega_c_offset_ueV);
    validate(p);
    return p;
}

/// Quantum-dot micropillar set: {g, κ, γ} = {20, 400, 0.6} μeV, Ω₁₂ = 31 μeV,
/// γ₁₂ = 0.99 γ, cavity on the bare subradiant state (ω_c = ω₀ − Ω₁₂).
inline PhysicalParams reference_params() {
    return params_from_ueV(20.0, 400.0, 0.6, 31.0, 0.99, -31.0);
}

struct DipoleGeometry {
    double d_nm{10.0};
    double wavelength_nm{925.0};
    double refractive_index{3.46};

    double kd() const { return 2.0 * units::pi * refractive_index * d_nm / wavelength_nm; }
};

struct DipoleRates {
    double omega12{0.0};
    double gamma12{0.0};
};

// Near-field parallel-dipole couplings. Valid only for kd < 1.
inline DipoleRates dipole_rates(const DipoleGeometry& geom, double gamma) {
    if (!(geom.d_nm > 0) || !(geom.wavelength_nm > 0) || !(geom.refractive_index > 0))
        throw ValidationError("dipole geometry requires d, wavelength and refractive index > 0");
    if (!(gamma >= 0) || !std::isfinite(gamma))
        throw ValidationError("gamma must be finite and non-negative");
    const double kd = geom.kd();
    if (kd >= 1.0)
        throw ValidationError("kd = " + std::to_string(kd) +
                              " >= 1: near-field dipole formulas do not apply");
    return {gamma * 3.0 / (4.0 * kd * kd * kd), gamma * (1.0 - kd * kd / 5.0)};
}

/// F_p = 4g²/(κγ).
inline double purcell_factor(const PhysicalParams& p) {
    if (!(p.kappa > 0) || !(p.gamma > 0))
        throw ValidationError("Purcell factor needs kappa > 0 and gamma > 0");
    return 4.0 * p.g * p.g / (p.kappa * p.gamma);
}

} // namespace duoatom
