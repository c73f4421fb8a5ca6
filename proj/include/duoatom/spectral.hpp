// spectral.hpp — Hybridized |∓⟩_eff eigenstates and their closed-form emission rates
//
// In the single-excitation atomic block {|−⟩, |+⟩} the detuning Δ₁₂ mixes the
// dark and bright collective states. With the sign convention of the model
// Hamiltonian the lower state is |−⟩_eff = ν|−⟩ − μ|+⟩ and the upper one is
// |+⟩_eff = μ|−⟩ + ν|+⟩; only μ² enters the rates.

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "duoatom/error.hpp"
#include "duoatom/params.hpp"

namespace duoatom {

struct MuNu {
    double mu{0.0};
    double nu{1.0};
};

/// Bright (μ) and dark (ν) weights of |−⟩_eff for reduced detuning δ = Δ₁₂/Ω₁₂.
inline MuNu mu_nu(double delta) {
    if (std::isinf(delta)) return {std::copysign(1.0 / std::sqrt(2.0), delta), 1.0 / std::sqrt(2.0)};
    const double root = std::hypot(1.0, delta);
    const double norm = std::hypot(delta, 1.0 + root);
    return {delta / norm, (1.0 + root) / norm};
}

struct HybridEigenstates {
    double mu{0.0};
    double nu{1.0};
    double delta{0.0};
    double omega_minus_eff{0.0}; // relative to ω₀
    double omega_plus_eff{0.0};
};

inline double reduced_detuning(const PhysicalParams& p, double delta12) {
    if (p.omega12 > 0) return delta12 / p.omega12;
    if (delta12 == 0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), delta12);
}

inline HybridEigenstates hybrid_eigenstates(const PhysicalParams& p, double delta12) {
    HybridEigenstates h;
    h.delta = reduced_detuning(p, delta12);
    const auto [mu, nu] = mu_nu(h.delta);
    h.mu = mu;
    h.nu = nu;
    const double split = std::hypot(delta12, p.omega12);
    h.omega_minus_eff = -split;
    h.omega_plus_eff = split;
    return h;
}

struct EffectiveRates {
    double Gamma_minus_eff{0.0}; // into the cavity mode
    double gamma_minus_eff{0.0}; // into the leaky modes
    double beta{0.0};
    double Delta_c{0.0};         // ω₍₋₎eff − ω_c
    double Gamma0{0.0};          // 4g²/κ
    bool dark{false};            // β indeterminate (no emission at all); reported as 0

    double total() const { return Gamma_minus_eff + gamma_minus_eff; }
};

inline double lorentzian(double detuning, double kappa) {
    const double x = 2.0 * detuning / kappa;
    return 1.0 / (1.0 + x * x);
}

/// Fermi-golden-rule rates of |−⟩_eff. `omega0_shift` moves both emitters
/// together relative to the (fixed) cavity.
inline EffectiveRates effective_rates(const PhysicalParams& p, double delta12, double omega0_shift = 0.0) {
    if (!(p.kappa > 0)) throw ValidationError("effective rates need kappa > 0");
    const auto h = hybrid_eigenstates(p, delta12);
    EffectiveRates r;
    r.Gamma0 = 4.0 * p.g * p.g / p.kappa;
    r.Delta_c = h.omega_minus_eff + omega0_shift - p.omega_c;
    const double mu2 = h.mu * h.mu;
    r.Gamma_minus_eff = 8.0 * mu2 * p.g * p.g / p.kappa * lorentzian(r.Delta_c, p.kappa);
    r.gamma_minus_eff = mu2 * p.gamma_plus();
    const double sum = r.Gamma_minus_eff + r.gamma_minus_eff;
    if (sum > 0) {
        r.beta = r.Gamma_minus_eff / sum;
    } else {
        r.dark = true;
        r.beta = 0.0;
    }
    return r;
}

/// Same golden-rule estimate for the upper state |+⟩_eff (bright weight ν).
/// Its leaky rate includes the small dark-component term μ²γ₋.
inline EffectiveRates effective_rates_plus(const PhysicalParams& p, double delta12, double omega0_shift = 0.0) {
    if (!(p.kappa > 0)) throw ValidationError("effective rates need kappa > 0");
    const auto h = hybrid_eigenstates(p, delta12);
    EffectiveRates r;
    r.Gamma0 = 4.0 * p.g * p.g / p.kappa;
    r.Delta_c = h.omega_plus_eff + omega0_shift - p.omega_c;
    const double nu2 = h.nu * h.nu;
    r.Gamma_minus_eff = 8.0 * nu2 * p.g * p.g / p.kappa * lorentzian(r.Delta_c, p.kappa);
    r.gamma_minus_eff = nu2 * p.gamma_plus() + h.mu * h.mu * p.gamma_minus();
    const double sum = r.Gamma_minus_eff + r.gamma_minus_eff;
    r.dark = !(sum > 0);
    r.beta = r.dark ? 0.0 : r.Gamma_minus_eff / sum;
    return r;
}

struct SpectralRow {
    double delta12_over_kappa{0.0};
    double mu{0.0};
    double nu{1.0};
    double Gamma_over_Gamma0{0.0};
    double beta{0.0};
    bool dark{false};
};

inline std::vector<SpectralRow> spectral_scan(const PhysicalParams& p, std::span<const double> delta12_grid) {
    validate(p);
    for (std::size_t i = 0; i < delta12_grid.size(); ++i) {
        if (!(delta12_grid[i] >= 0)) throw ValidationError("detuning grid must be non-negative");
        if (i > 0 && delta12_grid[i] < delta12_grid[i - 1])
            throw ValidationError("detuning grid must be sorted");
    }
    std::vector<SpectralRow> rows;
    rows.reserve(delta12_grid.size());
    for (double d : delta12_grid) {
        const auto h = hybrid_eigenstates(p, d);
        const auto r = effective_rates(p, d);
        rows.push_back({d / p.kappa, h.mu, h.nu, r.Gamma0 > 0 ? r.Gamma_minus_eff / r.Gamma0 : 0.0,
                        r.beta, r.dark});
    }
    return rows;
}

} // namespace duoatom
