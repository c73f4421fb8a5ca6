// units.hpp — Unit bridge between the config world (μeV, ps) and the internal one (rad/ns, ns)

#pragma once

#include <numbers>

namespace duoatom::units {

// Reduced Planck constant in μeV·ns.
inline constexpr double hbar_ueV_ns = 0.6582119569;

inline constexpr double pi = std::numbers::pi;

/// Energy in μeV to angular frequency in rad/ns.
constexpr double energy_to_angular(double value_ueV) { return value_ueV / hbar_ueV_ns; }

/// Angular frequency in rad/ns to energy in μeV.
constexpr double angular_to_energy(double value_rad_ns) { return value_rad_ns * hbar_ueV_ns; }

constexpr double ueV(double value) { return energy_to_angular(value); }

constexpr double ps_to_ns(double value_ps) { return value_ps * 1e-3; }
constexpr double ns_to_ps(double value_ns) { return value_ns * 1e3; }

// FWHM of a Gaussian intensity profile to its standard deviation.
constexpr double fwhm_to_sigma(double fwhm) { return fwhm / 2.3548200450309493; }

} // namespace duoatom::units
