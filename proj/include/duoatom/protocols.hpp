// protocols.hpp — Scenario layer: shaped emission, multi-pulse wavepackets, absorb/store/release memory

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "duoatom/dynamics.hpp"
#include "duoatom/error.hpp"
#include "duoatom/params.hpp"
#include "duoatom/schedule.hpp"
#include "duoatom/signal.hpp"
#include "duoatom/spectral.hpp"

namespace duoatom {

// ---------------------------------------------------------------------------
// helpers

/// Least-squares slope of ln y over samples with t in [t0, t1]; returns the decay rate −slope.
inline double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 || t[i] > t1 || !(y[i] > 0)) continue;
        const double ly = std::log(y[i]);
        sx += t[i];
        sy += ly;
        sxx += t[i] * t[i];
        sxy += t[i] * ly;
        ++n;
    }
    if (n < 3) throw ValidationError("decay fit needs at least three positive samples in the window");
    const double den = static_cast<double>(n) * sxx - sx * sx;
    return -(static_cast<double>(n) * sxy - sx * sy) / den;
}

/// First time after `from` where y drops to `level`, linearly interpolated; NaN if never.
inline double crossing_time(const std::vector<double>& t, const std::vector<double>& y, double level, double from = 0.0) {
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i] < from) continue;
        if (y[i - 1] > level && y[i] <= level) return t[i - 1] + (y[i - 1] - level) / (y[i - 1] - y[i]) * (t[i] - t[i - 1]);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// Peak of y restricted to t in [t0, t1): (value, time).
inline std::pair<double, double> window_max(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
    double best = -std::numeric_limits<double>::infinity(), at = t0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t0 && t[i] < t1 && y[i] > best) {
            best = y[i];
            at = t[i];
        }
    return {best, at};
}

// ---------------------------------------------------------------------------
// emission

struct EmissionOutputs {
    bool kernel{false};
    bool wigner{false};
    bool spectrum{false};
    WignerOptions wigner_options{};
    std::vector<double> spectrum_grid; // empty: the kernel's conjugate grid
};

struct EmissionScenario {
    std::string name{"custom"};
    PhysicalParams params{reference_params()};
    ControlSchedule schedule;
    SingleExcitationState initial{SingleExcitationState::dark()};
    IntegratorSettings integrator{1e-9, 1e-12, 0.01, 1};
    double adiabatic_threshold{0.1};
    bool allow_nonadiabatic{false}; // run anyway, recording a warning
    double max_plus_eff_fraction{0.05};
    EmissionOutputs outputs;
};

struct EmissionResult {
    Trajectory trajectory;
    AdiabaticityReport adiabaticity;
    double emitted{0.0};           // quanta through the cavity
    double plus_eff_emission{0.0}; // quanta decaying out of |+⟩_eff (golden-rule estimate)
    std::vector<std::string> warnings;
    std::optional<CorrelationKernel> kernel;
    std::optional<TimeFrequencyMap> wigner;
    std::optional<Spectrum> spectrum;
};

/// ∫(Γ₊ + γ₊)(t)·p₊(t) dt along a trajectory, with the rates of |+⟩_eff at the instantaneous controls.
inline double plus_eff_emission(const PhysicalParams& p, const ControlSchedule& ctrl, const Trajectory& tr) {
    double acc = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.t[i];
        const auto r = effective_rates_plus(p, ctrl.delta12.value(t), ctrl.omega0_at(t));
        const double f = r.total() * tr.pop_plus_eff[i];
        if (i > 0) acc += 0.5 * (f + prev) * (t - tr.t[i - 1]);
        prev = f;
    }
    return acc;
}

inline EmissionResult run_emission(const EmissionScenario& s) {
    validate(s.params);
    s.schedule.validate();
    EmissionResult r;
    r.adiabaticity = adiabaticity_check(s.schedule, s.params, s.adiabatic_threshold);
    if (!r.adiabaticity.pass) {
        std::ostringstream os;
        os << "schedule '" << s.name << "' is not adiabatic: max |dΔ₁₂/dt|/Ω₁₂² = " << r.adiabaticity.max_ratio
           << " at t = " << r.adiabaticity.at_time << " ns exceeds " << s.adiabatic_threshold;
        if (!s.allow_nonadiabatic) throw AdiabaticityError(os.str());
        r.warnings.push_back(os.str());
    }

    r.trajectory = integrate_amplitudes(s.params, s.schedule, s.initial, s.integrator);
    r.emitted = r.trajectory.emitted_cavity.back();
    r.plus_eff_emission = plus_eff_emission(s.params, s.schedule, r.trajectory);
    if (s.schedule.delta12.pulses().size() >= 2 && r.plus_eff_emission > s.max_plus_eff_fraction * r.emitted) {
        std::ostringstream os;
        os << "|+⟩_eff carries " << r.plus_eff_emission / std::max(r.emitted, 1e-300)
           << " of the emitted quanta (limit " << s.max_plus_eff_fraction << "); slow the detuning pulses";
        if (!s.allow_nonadiabatic) throw AdiabaticityError(os.str());
        r.warnings.push_back(os.str());
    }

    const bool need_kernel = s.outputs.kernel || s.outputs.wigner || s.outputs.spectrum;
    if (need_kernel) {
        CorrelationKernel k = correlation_single_excitation(r.trajectory);
        if (s.outputs.wigner) r.wigner = wigner_ville(k, s.outputs.wigner_options);
        if (s.outputs.spectrum) r.spectrum = spectral_density(k, s.outputs.spectrum_grid);
        if (s.outputs.kernel) r.kernel = std::move(k);
    }
    return r;
}

struct EqualizeResult {
    ControlSchedule schedule;
    std::vector<double> peak_powers; // emitted-power peak per pulse, in pulse order
    std::vector<double> amplitudes;  // Δ₁₂ peak per pulse, rad/ns
    bool reached{true};
    std::string note;
};

/// Raises every later Δ₁₂ Gaussian pulse by bisection until its emitted-power peak
/// matches the first one within `tolerance`. Pulses are matched to power peaks by
/// splitting time at the midpoints between pulse centres.
inline EqualizeResult equalize_pulses(const EmissionScenario& base, double tolerance = 0.02,
                                      double max_amplitude = std::numeric_limits<double>::quiet_NaN()) {
    EqualizeResult out;
    out.schedule = base.schedule;
    auto& pulses = out.schedule.delta12.pulses();
    std::sort(pulses.begin(), pulses.end(), [](const Gauss& a, const Gauss& b) { return a.center < b.center; });
    for (const auto& g : pulses) out.amplitudes.push_back(g.peak);
    if (pulses.size() < 2) return out;
    if (std::isnan(max_amplitude)) max_amplitude = 0.5 * base.params.kappa;

    const std::size_t n = pulses.size();
    std::vector<double> edges(n + 1);
    edges[0] = 0.0;
    for (std::size_t k = 1; k < n; ++k) edges[k] = 0.5 * (pulses[k - 1].center + pulses[k].center);
    edges[n] = base.schedule.t_end;

    auto peak_of = [&](std::size_t k) {
        ControlSchedule s = out.schedule;
        s.t_end = edges[k + 1];
        const auto tr = integrate_amplitudes(base.params, s, base.initial, base.integrator);
        return window_max(tr.t, tr.power, edges[k], edges[k + 1] + 0.5 * base.integrator.sample_dt).first;
    };

    const double target = peak_of(0);
    out.peak_powers.push_back(target);
    if (!(target > 0)) throw ValidationError("first pulse emits nothing; cannot equalize");

    for (std::size_t k = 1; k < n; ++k) {
        auto& g = pulses[k];
        const double sign = g.peak < 0 ? -1.0 : 1.0;
        double lo = 0.0, hi = std::max(std::abs(g.peak), 1e-3);
        g.peak = sign * hi;
        double p_hi = peak_of(k);
        while (p_hi < target && hi < max_amplitude) {
            lo = hi;
            hi = std::min(2.0 * hi, max_amplitude);
            g.peak = sign * hi;
            p_hi = peak_of(k);
        }
        if (p_hi < target * (1.0 - tolerance)) {
            out.reached = false;
            std::ostringstream os;
            os << "pulse " << k + 1 << " reaches at most " << p_hi / target
               << " of the first power peak at Δ₁₂ = " << units::angular_to_energy(hi) << " μeV";
            out.note = os.str();
            out.peak_powers.push_back(p_hi);
            out.amplitudes[k] = g.peak;
            continue;
        }
        double p = p_hi;
        for (int it = 0; it < 60 && std::abs(p / target - 1.0) > 0.5 * tolerance; ++it) {
            const double mid = 0.5 * (lo + hi);
            g.peak = sign * mid;
            p = peak_of(k);
            (p < target ? lo : hi) = mid;
        }
        if (std::abs(p / target - 1.0) > 0.5 * tolerance) {
            g.peak = sign * hi;
            p = peak_of(k);
        }
        out.peak_powers.push_back(p);
        out.amplitudes[k] = g.peak;
    }
    return out;
}

/// 1/e time of the atomic population when |−⟩_eff is prepared at a constant detuning with
/// the cavity resonant to it.
inline double emission_time(PhysicalParams p, double delta12, const IntegratorSettings& base = {}) {
    p.omega_c = hybrid_eigenstates(p, delta12).omega_minus_eff;
    validate(p);
    const auto r = effective_rates(p, delta12);
    const double rate = r.total() + std::pow(hybrid_eigenstates(p, delta12).nu, 2) * p.gamma_minus();
    if (!(rate > 0)) return std::numeric_limits<double>::infinity();
    const double estimate = 1.0 / rate;
    ControlSchedule s;
    s.delta12.add(Level{0.0, delta12});
    s.t_end = 4.0 * estimate + 0.5;
    IntegratorSettings set = base;
    set.sample_dt = std::min(base.sample_dt, estimate / 400.0);
    const auto tr = integrate_amplitudes(p, s, SingleExcitationState::minus_eff(p, delta12), set);
    std::vector<double> atomic(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) atomic[i] = tr.atomic(i);
    return crossing_time(tr.t, atomic, std::exp(-1.0) * atomic.front());
}

// ---------------------------------------------------------------------------
// memory

struct MemoryScenario {
    std::string name{"custom"};
    PhysicalParams params{reference_params()};
    double pulse_center{1.5};          // ns
    double pulse_fwhm{0.55};           // ns, intensity FWHM of the input
    double mean_photons{0.01};
    double delta_absorb{units::ueV(40.0)};
    double store_duration{0.2};        // ns, raised-cosine Δ₁₂ → 0
    double store_offset{0.0};          // ns, relative to the input's trailing half-maximum
    double release_time{35.0};         // ns
    double release_duration{0.28};     // ns
    double delta_release{units::ueV(40.0)};
    double t_end{40.0};                // ns
    bool release{true};                // false: stop shortly after the store ramp
    IntegratorSettings integrator{1e-8, 1e-12, 0.01, 2};
    double adiabatic_threshold{0.25};
    bool allow_nonadiabatic{false};

    double store_start() const { return pulse_center + 0.5 * pulse_fwhm + store_offset; }
    double store_end() const { return store_start() + store_duration; }
    // time by which 99% of the input energy has arrived
    double input_passed() const { return pulse_center + 2.3263478740408408 * units::fwhm_to_sigma(pulse_fwhm); }
    double carrier() const { return hybrid_eigenstates(params, delta_absorb).omega_minus_eff; }
    double horizon() const { return release ? t_end : store_end() + 0.5; }
    // state time 1/(Γ₍₋₎eff + γ₍₋₎eff) of the absorbing state, ns
    double state_time() const { return 1.0 / effective_rates(params, delta_absorb).total(); }

    void validate_scenario() const {
        validate(params);
        if (!(pulse_fwhm > 0) || !(mean_photons >= 0) || !(store_duration >= 0))
            throw ValidationError("memory pulse needs FWHM > 0, ⟨n⟩ >= 0 and a non-negative store ramp");
        if (store_start() <= 0) throw ValidationError("store ramp must start after t = 0");
        if (release && !(release_time > store_end() && t_end > release_time + release_duration))
            throw ValidationError("release must follow the store ramp and end before t_end");
    }

    ControlSchedule schedule() const {
        ControlSchedule s;
        s.delta12.add(Level{0.0, delta_absorb});
        s.delta12.add(Ramp{store_start(), store_duration, delta_absorb, 0.0});
        if (release) s.delta12.add(Ramp{release_time, release_duration, 0.0, delta_release});
        if (mean_photons > 0) s.drive.add(coherent_pulse(params.kappa, pulse_center, pulse_fwhm, mean_photons));
        s.drive_carrier = carrier();
        s.t_end = horizon();
        return s;
    }
};

struct MemoryResult {
    double efficiency{0.0};          // η
    double efficiency_time{0.0};
    double storage_decay_rate{std::numeric_limits<double>::quiet_NaN()}; // 1/ns
    double input{0.0};               // quanta sent in
    double output{0.0};              // reflected/transmitted quanta
    double leaked{0.0};
    double remaining{0.0};           // excitation left in the system at the end
    double flux_residual{0.0};       // |input − output − leaked − remaining| / ⟨n⟩
    double released{0.0};            // output quanta after the release time, per ⟨n⟩
    double hold_time{0.0};           // time of `stored_state`
    Trajectory trajectory;
    DensityMatrix stored_state;      // state just before release (release runs only)
    AdiabaticityReport adiabaticity;
    std::vector<std::string> warnings;
};

namespace detail {

inline void append_trajectory(Trajectory& a, const Trajectory& b, double t0) {
    const double cav = a.emitted_cavity.back(), leak = a.leaked.back(), in = a.input.back(), out = a.output.back();
    for (std::size_t i = 1; i < b.size(); ++i) {
        a.t.push_back(t0 + b.t[i]);
        a.pop_s.push_back(b.pop_s[i]);
        a.pop_a.push_back(b.pop_a[i]);
        a.pop_cavity.push_back(b.pop_cavity[i]);
        a.pop_minus_eff.push_back(b.pop_minus_eff[i]);
        a.pop_plus_eff.push_back(b.pop_plus_eff[i]);
        a.power.push_back(b.power[i]);
        a.field.push_back(b.field[i]);
        a.emitted_cavity.push_back(cav + b.emitted_cavity[i]);
        a.leaked.push_back(leak + b.leaked[i]);
        a.input.push_back(in + b.input[i]);
        a.output.push_back(out + b.output[i]);
    }
    a.stats.accepted += b.stats.accepted;
    a.stats.rejected += b.stats.rejected;
    a.stats.evaluations += b.stats.evaluations;
}

} // namespace detail

inline MemoryResult run_memory(const MemoryScenario& m) {
    m.validate_scenario();
    MemoryResult res;
    const ControlSchedule ctrl = m.schedule();
    res.adiabaticity = adiabaticity_check(ctrl, m.params, m.adiabatic_threshold);
    if (!res.adiabaticity.pass) {
        std::ostringstream os;
        os << "store/release ramps are not adiabatic: max |dΔ₁₂/dt|/Ω₁₂² = " << res.adiabaticity.max_ratio
           << " at t = " << res.adiabaticity.at_time << " ns exceeds " << m.adiabatic_threshold;
        if (!m.allow_nonadiabatic) throw AdiabaticityError(os.str());
        res.warnings.push_back(os.str());
    }

    const auto init = DensityMatrix::ground(m.integrator.n_max);
    if (m.release) {
        // split just before the release so the stored state is available
        const double dt = m.integrator.sample_dt;
        res.hold_time = dt * std::floor((m.release_time - 0.5) / dt + 1e-9);
        ControlSchedule first = ctrl;
        first.t_end = res.hold_time;
        auto a = integrate_master(m.params, first, init, m.integrator);
        res.stored_state = a.final_state;
        const ControlSchedule second = ctrl.shifted(-res.hold_time);
        auto b = integrate_master(m.params, second, a.final_state, m.integrator);
        res.trajectory = std::move(a.trajectory);
        detail::append_trajectory(res.trajectory, b.trajectory, res.hold_time);
    } else {
        auto a = integrate_master(m.params, ctrl, init, m.integrator);
        res.trajectory = std::move(a.trajectory);
        res.stored_state = a.final_state;
        res.hold_time = ctrl.t_end;
    }

    const Trajectory& tr = res.trajectory;
    std::vector<double> atomic(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) atomic[i] = tr.atomic(i);
    const double from = std::max(m.store_end(), m.input_passed());
    const double until = m.release ? m.release_time : tr.t.back() + 1.0;
    const auto [peak, at] = window_max(tr.t, atomic, from, until);
    res.efficiency = m.mean_photons > 0 ? std::max(peak, 0.0) / m.mean_photons : 0.0;
    res.efficiency_time = at;

    if (m.release && m.release_time - 1.0 > m.store_end() + 2.0 && m.mean_photons > 0)
        res.storage_decay_rate = fit_decay_rate(tr.t, atomic, m.store_end() + 2.0, m.release_time - 1.0);

    res.input = tr.input.back();
    res.output = tr.output.back();
    res.leaked = tr.leaked.back();
    res.remaining = tr.excitation(tr.size() - 1);
    res.flux_residual = m.mean_photons > 0
                            ? std::abs(res.input - res.output - res.leaked - res.remaining) / m.mean_photons
                            : std::abs(res.input - res.output - res.leaked - res.remaining);
    if (m.release && m.mean_photons > 0) {
        const auto it = std::lower_bound(tr.t.begin(), tr.t.end(), m.release_time);
        const auto i = static_cast<std::size_t>(it - tr.t.begin());
        res.released = (tr.output.back() - tr.output[std::min(i, tr.size() - 1)]) / m.mean_photons;
    }
    return res;
}

/// Single-excitation amplitudes ⟨σ_a⟩, ⟨σ_s⟩, ⟨a⟩ of a weakly driven state; to first
/// order in the drive they carry the full one-excitation response.
inline SingleExcitationState linear_amplitudes(const DensityMatrix& d) {
    const HilbertSpace hs(d.n_max);
    const auto tr = [&](const Eigen::MatrixXcd& op) { return (op * d.rho).trace(); };
    return {tr(hs.sigma_a()), tr(hs.sigma_s()), tr(hs.cavity())};
}

struct WeightedAmplitudes {
    double weight{0.0};
    SingleExcitationState state; // unit norm
};

/// Eigen-decomposition of the one-excitation block of ρ in the (|−,0⟩, |+,0⟩, |gg,1⟩) basis.
/// Without drive this block evolves as U ρ₁ U† under the amplitude equations, fed only
/// by decay out of the two-excitation manifold.
inline std::vector<WeightedAmplitudes> single_excitation_components(const DensityMatrix& d) {
    const HilbertSpace hs(d.n_max);
    const std::array<int, 3> idx{hs.index(1, 0, 0), hs.index(0, 1, 0), hs.index(0, 0, 1)};
    Eigen::Matrix3cd block;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) block(i, j) = d.rho(idx[i], idx[j]);
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::Matrix3cd to_as;
    to_as << r, -r, 0, r, r, 0, 0, 0, 1;
    const Eigen::Matrix3cd rho1 = to_as * block * to_as.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(0.5 * (rho1 + rho1.adjoint()));
    std::vector<WeightedAmplitudes> out;
    for (int k = 2; k >= 0; --k) {
        const double w = es.eigenvalues()[k];
        if (!(w > 0)) continue;
        const Eigen::Vector3cd v = es.eigenvectors().col(k);
        out.push_back({w, {v[0], v[1], v[2]}});
    }
    return out;
}

struct ReleaseComparison {
    double memory_released{0.0};   // output quanta after the hold time (master equation)
    double emission_released{0.0}; // cavity quanta from the amplitude runs
    double relative_difference{0.0}; // |emission − memory| / memory
    double max_curve_deviation{0.0}; // max |ΔN(t)| / total over the release window
};

/// Re-runs the release phase with the amplitude integrator, starting from each
/// eigencomponent of the stored one-excitation block, and compares the emitted flux.
inline ReleaseComparison compare_release(const MemoryScenario& m, const MemoryResult& r) {
    if (!m.release) throw ValidationError("scenario has no release phase");
    EmissionScenario e;
    e.params = m.params;
    e.schedule = m.schedule().shifted(-r.hold_time);
    e.schedule.drive = Channel{};
    e.integrator = m.integrator;
    e.integrator.rtol = std::min(m.integrator.rtol, 1e-9);
    e.adiabatic_threshold = m.adiabatic_threshold;
    e.allow_nonadiabatic = true;

    std::vector<double> curve;
    for (const auto& comp : single_excitation_components(r.stored_state)) {
        e.initial = comp.state;
        const auto em = run_emission(e);
        if (curve.empty()) curve.assign(em.trajectory.size(), 0.0);
        for (std::size_t j = 0; j < curve.size() && j < em.trajectory.size(); ++j)
            curve[j] += comp.weight * em.trajectory.emitted_cavity[j];
    }

    ReleaseComparison c;
    const Trajectory& tr = r.trajectory;
    const auto it = std::lower_bound(tr.t.begin(), tr.t.end(), r.hold_time - 1e-9);
    const auto i0 = static_cast<std::size_t>(it - tr.t.begin());
    c.memory_released = tr.output.back() - tr.output[i0];
    c.emission_released = curve.empty() ? 0.0 : curve.back();
    const double total = std::max(c.memory_released, 1e-300);
    c.relative_difference = std::abs(c.emission_released - c.memory_released) / total;
    for (std::size_t j = 0; j < curve.size() && i0 + j < tr.size(); ++j) {
        const double a = tr.output[i0 + j] - tr.output[i0];
        c.max_curve_deviation = std::max(c.max_curve_deviation, std::abs(a - curve[j]) / total);
    }
    return c;
}

struct BandwidthRow {
    double delta12{0.0};    // absorb-phase Δ₁₂, rad/ns
    double efficiency{0.0};
    double state_time{0.0}; // 1/(Γ₍₋₎eff + γ₍₋₎eff), ns
    double ratio{0.0};      // state_time / pulse FWHM
};

struct BandwidthScan {
    std::vector<BandwidthRow> rows;
    double optimum_delta{0.0};
    double optimum_efficiency{0.0};
    double optimum_ratio{0.0};
    std::size_t optimum_index{0};
};

/// Runs the store step for each absorb-phase detuning and locates the most efficient one.
inline BandwidthScan bandwidth_optimum_scan(const MemoryScenario& tmpl, const std::vector<double>& delta12_grid,
                                            unsigned workers = 1) {
    if (delta12_grid.empty()) throw ValidationError("bandwidth scan needs a non-empty detuning grid");
    BandwidthScan scan;
    scan.rows.resize(delta12_grid.size());
    parallel_for(delta12_grid.size(), workers, [&](std::size_t i) {
        MemoryScenario m = tmpl;
        m.delta_absorb = delta12_grid[i];
        m.release = false;
        m.allow_nonadiabatic = true;
        BandwidthRow row;
        row.delta12 = m.delta_absorb;
        row.efficiency = m.delta_absorb > 0 ? run_memory(m).efficiency : 0.0;
        row.state_time = m.delta_absorb > 0 ? m.state_time() : std::numeric_limits<double>::infinity();
        row.ratio = row.state_time / m.pulse_fwhm;
        scan.rows[i] = row;
    });
    std::vector<double> x, y;
    for (const auto& r : scan.rows) {
        x.push_back(r.delta12);
        y.push_back(r.efficiency);
    }
    const auto best = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    scan.optimum_index = best;
    double delta = x[best];
    double eta = y[best];
    if (best > 0 && best + 1 < x.size()) {
        // vertex of the parabola through the three points around the maximum
        const double x0 = x[best - 1], x1 = x[best], x2 = x[best + 1];
        const double y0 = y[best - 1], y1 = y[best], y2 = y[best + 1];
        const double d1 = (y1 - y0) / (x1 - x0), d2 = (y2 - y1) / (x2 - x1);
        const double a = (d2 - d1) / (x2 - x0);
        if (a < 0) {
            delta = 0.5 * (x0 + x1) - d1 / (2.0 * a);
            eta = y1 + (delta - x1) * (d1 + a * (delta - x0)) ;
            delta = std::clamp(delta, x0, x2);
        }
    }
    MemoryScenario m = tmpl;
    m.delta_absorb = delta;
    scan.optimum_delta = delta;
    scan.optimum_efficiency = eta;
    scan.optimum_ratio = m.state_time() / m.pulse_fwhm;
    return scan;
}

struct TimingRow {
    double offset{0.0};     // ns
    double efficiency{0.0};
    double relative{0.0};   // η / η(offset 0)
};

/// Shifts the store-ramp start by each offset and reports η against the unshifted run.
inline std::vector<TimingRow> timing_sensitivity(const MemoryScenario& tmpl, const std::vector<double>& offsets,
                                                 unsigned workers = 1) {
    for (double o : offsets)
        if (std::abs(o) > tmpl.pulse_fwhm) throw ValidationError("timing offsets must lie within ±pulse FWHM");
    std::vector<double> all = offsets;
    all.push_back(0.0);
    std::vector<double> eta(all.size());
    parallel_for(all.size(), workers, [&](std::size_t i) {
        MemoryScenario m = tmpl;
        m.store_offset = tmpl.store_offset + all[i];
        m.release = false;
        eta[i] = run_memory(m).efficiency;
    });
    const double ref = eta.back();
    std::vector<TimingRow> rows;
    for (std::size_t i = 0; i < offsets.size(); ++i)
        rows.push_back({offsets[i], eta[i], ref > 0 ? eta[i] / ref : 0.0});
    return rows;
}

} // namespace duoatom
