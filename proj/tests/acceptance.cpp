// acceptance.cpp — One PASS/FAIL line per acceptance criterion; exit status 1 if any fails

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "duoatom/scenarios.hpp"

using namespace duoatom;

namespace {

struct Verdict {
    bool pass{true};
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double to_ueV(double rad) { return units::angular_to_energy(rad); }

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<std::pair<ScenarioConfig, EmissionRun>> emission_runs(const std::string& name) {
    std::vector<std::pair<ScenarioConfig, EmissionRun>> runs;
    for (const auto& c : load_scenario(name)) runs.emplace_back(c, run_emission_config(c));
    return runs;
}

ScenarioKind builtin_kind(const std::string& name) { return load_scenario(name).at(0).kind; }

struct Conservation {
    double trace_drift{0.0};
    double min_eigenvalue{0.0};
    double flux_residual{0.0};
};

Conservation master_conservation(const PhysicalParams& p, const ControlSchedule& s, const DensityMatrix& init,
                                 IntegratorSettings set) {
    MasterOptions opts;
    opts.keep_states = true;
    opts.check_physical = false; // measured here instead
    const auto r = integrate_master(p, s, init, set, opts);
    Conservation c;
    c.min_eigenvalue = 1.0;
    const double t0 = init.trace();
    for (const auto& rho : r.states) {
        const DensityMatrix d{rho, set.n_max};
        c.trace_drift = std::max(c.trace_drift, std::abs(d.trace() - t0));
        c.min_eigenvalue = std::min(c.min_eigenvalue, d.min_eigenvalue());
    }
    const auto& tr = r.trajectory;
    const std::size_t e = tr.size() - 1;
    if (s.driven()) c.flux_residual = std::abs(tr.input[e] - tr.output[e] - tr.leaked[e] - tr.excitation(e));
    else c.flux_residual = std::abs(tr.initial_excitation - tr.emitted_cavity[e] - tr.leaked[e] - tr.excitation(e));
    return c;
}

// ---------------------------------------------------------------------------

Verdict eigenstructure() {
    Verdict v;
    const auto c = load_scenario("fig2").at(0);
    const auto grid = spectral_grid(c);
    const auto rows = spectral_scan(c.params, grid);
    double bmin = 1.0, bmax = 0.0;
    bool monotone = rows.front().Gamma_over_Gamma0 == 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].dark) {
            bmin = std::min(bmin, rows[i].beta);
            bmax = std::max(bmax, rows[i].beta);
        }
        if (i > 0 && !(rows[i].Gamma_over_Gamma0 > rows[i - 1].Gamma_over_Gamma0)) monotone = false;
    }
    const double last = rows.back().Gamma_over_Gamma0;
    v.detail << "beta in [" << bmin << ", " << bmax << "], Gamma/Gamma0 from " << rows.front().Gamma_over_Gamma0
             << " rising to " << last << " at D12/kappa = " << rows.back().delta12_over_kappa;
    v.require(bmin >= 0.85 && bmax <= 0.88, "beta within [0.85, 0.88]");
    v.require(monotone, "Gamma/Gamma0 strictly increasing from 0");
    v.require(std::abs(last - 0.62) <= 0.05, "Gamma/Gamma0 = 0.62 +- 0.05 at the grid end");
    return v;
}

Verdict dark_lifetime() {
    Verdict v;
    const auto base = load_scenario("fig6").at(0).memory;
    const std::vector<double> ratios{0.988, 0.99};
    std::vector<double> tau(ratios.size()), expected(ratios.size());
    parallel_for(ratios.size(), workers(), [&](std::size_t i) {
        MemoryScenario m = base;
        m.params.gamma12 = ratios[i] * m.params.gamma;
        tau[i] = 1.0 / run_memory(m).storage_decay_rate;
        expected[i] = 1.0 / m.params.gamma_minus();
    });
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        v.detail << "gamma12/gamma = " << ratios[i] << ": decay time " << tau[i] << " ns (hbar/gamma_minus = "
                 << expected[i] << " ns); ";
        v.require(tau[i] >= 90.0 && tau[i] <= 115.0, "decay time in [90, 115] ns");
    }
    return v;
}

Verdict memory_efficiency() {
    Verdict v;
    const auto c = load_scenario("fig6").at(0);
    const auto r = run_memory(c.memory);
    v.detail << "eta = " << r.efficiency;
    v.require(std::abs(r.efficiency - 0.68) <= 0.05, "eta = 0.68 +- 0.05");

    const auto scan = bandwidth_optimum_scan(c.memory, c.scan.bandwidth_grid, workers());
    const double target = 2.0 / 3.0;
    v.detail << "; bandwidth optimum at D12 = " << to_ueV(scan.optimum_delta) << " ueV, eta " << scan.optimum_efficiency
             << ", state lifetime / pulse FWHM = " << scan.optimum_ratio;
    v.require(std::abs(scan.optimum_ratio / target - 1.0) <= 0.15, "optimum ratio within 15% of 2/3");
    v.require(scan.optimum_index > 0 && scan.optimum_index + 1 < scan.rows.size(), "optimum interior to the grid");

    const auto timing = timing_sensitivity(c.memory, c.scan.timing_offsets, workers());
    v.detail << "; timing relative eta:";
    for (const auto& row : timing) {
        v.detail << " " << std::lround(units::ns_to_ps(row.offset)) << "ps=" << row.relative;
        if (std::abs(row.offset) <= 0.1 + 1e-9) v.require(row.relative >= 0.95, "<= 5% loss within +-100 ps");
        else v.require(row.relative < 0.95, "> 5% loss beyond +-100 ps");
    }
    return v;
}

Verdict single_excitation_oracle() {
    Verdict v;
    std::mt19937_64 rng(20240517);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto p = reference_params();
    const IntegratorSettings set{1e-10, 1e-13, 0.01, 1};
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        ControlSchedule s;
        s.t_end = 2.0 + 6.0 * u(rng);
        s.delta12.add(Level{0.0, units::ueV(40.0 * u(rng))});
        if (u(rng) < 0.5) s.delta12.add(Ramp{0.5 + u(rng), 0.2 + 0.5 * u(rng), units::ueV(40.0 * u(rng)), units::ueV(40.0 * u(rng))});
        const int pulses = static_cast<int>(3.0 * u(rng));
        for (int j = 0; j < pulses; ++j)
            s.delta12.add(Gauss{s.t_end * u(rng), 0.2 + 0.8 * u(rng), units::ueV(60.0 * (u(rng) - 0.5))});
        s.omega0.add(Level{0.0, units::ueV(40.0 * (u(rng) - 0.5))});
        if (u(rng) < 0.5) s.omega0.add(Ramp{s.t_end * u(rng), 0.3, 0.0, units::ueV(40.0 * (u(rng) - 0.5))});
        if (u(rng) < 0.5) s.hold_minus_eff = p.omega12;

        const double th = units::pi * u(rng), ph = 2.0 * units::pi * u(rng);
        const SingleExcitationState init{std::cos(th), std::sin(th) * std::polar(0.8, ph), std::sin(th) * 0.6};
        const auto amp = integrate_amplitudes(p, s, init, set);
        const auto mas = integrate_master(p, s, DensityMatrix::from_amplitudes(init, 1), set).trajectory;
        for (std::size_t i = 0; i < amp.size(); ++i) {
            worst = std::max({worst, std::abs(amp.pop_s[i] - mas.pop_s[i]), std::abs(amp.pop_a[i] - mas.pop_a[i]),
                              std::abs(amp.pop_cavity[i] - mas.pop_cavity[i])});
        }
    }
    v.detail << "20 randomized undriven schedules, max population difference " << worst;
    v.require(worst <= 1e-6, "amplitude and Lindblad populations agree to 1e-6");
    return v;
}

Verdict conservation() {
    Verdict v;
    double drift = 0.0, eig = 1.0, flux = 0.0;
    auto record = [&](const std::string& label, const Conservation& c) {
        drift = std::max(drift, c.trace_drift);
        eig = std::min(eig, c.min_eigenvalue);
        flux = std::max(flux, c.flux_residual);
        v.require(c.trace_drift < 1e-6, label + " trace drift");
        v.require(c.min_eigenvalue >= -1e-8, label + " positivity");
        v.require(c.flux_residual < 1e-4, label + " flux balance");
    };
    for (const auto& [name, text] : builtin_scenarios()) {
        const auto emissions = builtin_kind(name) == ScenarioKind::Emission ? emission_runs(name)
                                                                            : std::vector<std::pair<ScenarioConfig, EmissionRun>>{};
        for (const auto& c : load_scenario(name)) {
            if (c.kind == ScenarioKind::Spectral) {
                // |−⟩_eff at the largest scanned detuning, cavity on the bare line
                const double d = spectral_grid(c).back();
                ControlSchedule s;
                s.delta12.add(Level{0.0, d});
                s.t_end = 5.0;
                const auto init = DensityMatrix::from_amplitudes(SingleExcitationState::minus_eff(c.params, d), 1);
                record(c.label(), master_conservation(c.params, s, init, {1e-9, 1e-12, 0.01, 1}));
            } else if (c.kind == ScenarioKind::Emission) {
                const EmissionRun* run = nullptr;
                for (const auto& [cc, rr] : emissions)
                    if (cc.label() == c.label()) run = &rr;
                const auto& tr = run->result.trajectory;
                const std::size_t e = tr.size() - 1;
                const double amp_flux = std::abs(tr.initial_excitation - tr.emitted_cavity[e] - tr.leaked[e] - tr.excitation(e));
                flux = std::max(flux, amp_flux);
                v.require(amp_flux < 1e-4, c.label() + " amplitude flux balance");
                IntegratorSettings set = run->scenario.integrator;
                set.n_max = 1;
                record(c.label(), master_conservation(run->scenario.params, run->scenario.schedule,
                                                      DensityMatrix::from_amplitudes(run->scenario.initial, 1), set));
            } else {
                const auto& m = c.memory;
                const auto r = run_memory(m);
                flux = std::max(flux, r.flux_residual);
                v.require(r.flux_residual < 1e-4, c.label() + " flux balance per photon");
                record(c.label(), master_conservation(m.params, m.schedule(), DensityMatrix::ground(m.integrator.n_max),
                                                      m.integrator));
            }
        }
    }
    v.detail << "all built-ins: max trace drift " << drift << ", min eigenvalue " << eig << ", max flux residual "
             << flux;
    return v;
}

Verdict time_bin() {
    Verdict v;
    const auto runs = emission_runs("fig4");
    for (const auto& [c, run] : runs) {
        const auto& pulses = run.scenario.schedule.delta12.pulses();
        const double dt = pulses.at(1).center - pulses.at(0).center;
        const double expected = 2.0 * units::pi / dt;
        const auto& sp = *run.result.spectrum;
        std::size_t n_comb = 0, n_fringe = 0;
        const double comb = peak_spacing(sp.omega, sp.S, 0.05, &n_comb);

        const auto& map = *run.result.wigner;
        const double mid = 0.5 * (pulses[0].center + pulses[1].center);
        const auto row = static_cast<Eigen::Index>(
            std::min_element(map.t.begin(), map.t.end(), [&](double a, double b) { return std::abs(a - mid) < std::abs(b - mid); }) -
            map.t.begin());
        std::vector<double> fringe(map.omega.size());
        for (std::size_t j = 0; j < fringe.size(); ++j) fringe[j] = map.W(row, static_cast<Eigen::Index>(j));
        const double period = peak_spacing(map.omega, fringe, 0.05, &n_fringe);
        const double wmax = map.W.maxCoeff(), wmin = map.W.minCoeff();

        v.detail << c.variant << ": comb " << to_ueV(comb) << " ueV (" << n_comb << " peaks, expected "
                 << to_ueV(expected) << "), fringe period " << period << " rad/ns (" << n_fringe << " peaks, expected "
                 << expected << "), min/max W " << wmin / wmax << ", Im residue " << map.max_imag_residue
                 << ", second-pulse D12 " << to_ueV(run.equalized->amplitudes.at(1)) << " ueV; ";
        v.require(std::abs(comb / expected - 1.0) <= 0.02, c.variant + " comb spacing within 2%");
        v.require(std::abs(period / expected - 1.0) <= 0.02, c.variant + " fringe period within 2%");
        v.require(map.max_imag_residue < 1e-8, c.variant + " Wigner-Ville map real");
        v.require(wmin < -0.05 * wmax, c.variant + " negativity");
    }
    return v;
}

Verdict compass() {
    Verdict v;
    const auto runs = emission_runs("fig5");
    const auto& [c, run] = runs.at(0);
    const auto& map = *run.result.wigner;
    const double carrier = -c.params.omega12; // held |−⟩_eff line at ω₀ = 0
    std::vector<double> centers;
    for (const auto& g : run.scenario.schedule.delta12.pulses()) centers.push_back(g.center);

    const auto smooth = smooth_map(map, 0.05, 10.0);
    const auto peaks = map_maxima(smooth);
    v.require(peaks.size() >= 4, "at least four maxima");
    if (peaks.size() < 4) return v;
    std::vector<MapPeak> lobes(peaks.begin(), peaks.begin() + 4);
    std::sort(lobes.begin(), lobes.end(), [](const MapPeak& a, const MapPeak& b) { return a.t < b.t; });
    const double top = peaks[0].value;
    const double fifth = peaks.size() > 4 ? peaks[4].value / top : 0.0;
    v.detail << "lobes (t ns, omega ueV rel. carrier, rel. height):";
    for (std::size_t k = 0; k < 4; ++k) {
        v.detail << " (" << lobes[k].t << ", " << to_ueV(lobes[k].omega - carrier) << ", " << lobes[k].value / top << ")";
        v.require(std::abs(lobes[k].t - centers[k]) < 0.1, "lobe at each pulse time");
        v.require(lobes[k].value > 0.5 * top, "four comparable lobes");
    }
    v.detail << "; fifth maximum " << fifth << " of the largest";
    v.require(fifth < 0.1, "four dominant lobes");
    const double w_first = to_ueV(lobes[0].omega - carrier), w_last = to_ueV(lobes[3].omega - carrier);
    const double w_up = to_ueV(lobes[1].omega - carrier), w_down = to_ueV(lobes[2].omega - carrier);
    v.require(std::abs(w_first - w_last) < 5.0, "first and last lobes share a frequency");
    v.require(w_up - w_first > 10.0, "second lobe blue of the first");
    v.require(w_down - w_first < -10.0, "third lobe red of the first");

    // interference lattice: local maxima along the time and frequency mid-lines of the raw map
    const double wabs = map.W.cwiseAbs().maxCoeff();
    const double t_mid = 0.5 * (centers.front() + centers.back());
    const auto row = static_cast<Eigen::Index>(
        std::min_element(map.t.begin(), map.t.end(), [&](double a, double b) { return std::abs(a - t_mid) < std::abs(b - t_mid); }) -
        map.t.begin());
    const double w_mid = 0.5 * (lobes[0].omega + lobes[3].omega);
    const auto col = static_cast<Eigen::Index>(
        std::min_element(map.omega.begin(), map.omega.end(), [&](double a, double b) { return std::abs(a - w_mid) < std::abs(b - w_mid); }) -
        map.omega.begin());
    std::vector<double> along_omega(map.omega.size()), along_t(map.t.size());
    for (std::size_t j = 0; j < along_omega.size(); ++j) along_omega[j] = map.W(row, static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < along_t.size(); ++i) along_t[i] = map.W(static_cast<Eigen::Index>(i), col);
    const auto n_omega = local_maxima(along_omega, 0.01 * wabs).size();
    std::size_t n_t = 0;
    for (std::size_t i : local_maxima(along_t, 0.01 * wabs))
        if (map.t[i] > centers.front() + 0.05 && map.t[i] < centers.back() - 0.05) ++n_t;
    const double wmin = map.W.minCoeff() / map.W.maxCoeff();
    v.detail << "; mid-line maxima: " << n_omega << " along omega at t = " << map.t[static_cast<std::size_t>(row)]
             << " ns, " << n_t << " interior along t; min/max W " << wmin;
    v.require(n_omega >= 5, "fringe lattice along the frequency mid-line");
    v.require(n_t >= 3, "interior maxima along the time mid-line");
    v.require(wmin < -0.05, "negative interference regions");
    v.require(run.result.warnings.empty(), "no run warnings");
    return v;
}

Verdict tunable_bandwidth() {
    Verdict v;
    const auto p = load_scenario("fig2").at(0).params;
    double fastest = std::numeric_limits<double>::infinity(), slowest = 0.0;
    for (int i = 0; i <= 12; ++i) {
        const double d = 2.0 * std::pow(50.0, i / 12.0); // 2 … 100 μeV
        const double t = emission_time(p, units::ueV(d));
        fastest = std::min(fastest, t);
        slowest = std::max(slowest, t);
    }
    v.detail << "1/e emission time from " << fastest << " ns to " << slowest << " ns, ratio " << slowest / fastest;
    v.require(slowest / fastest >= 100.0, "ratio >= 100");
    return v;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Verdict()> run;
        double budget_s; // stated runtime bound; 0 for none
    };
    const std::vector<Criterion> criteria{
        {"eigenstructure", eigenstructure, 1.0},
        {"dark-state lifetime", dark_lifetime, 10.0},
        {"memory efficiency", memory_efficiency, 0.0},
        {"single-excitation oracle", single_excitation_oracle, 60.0},
        {"conservation", conservation, 0.0},
        {"time-bin signature", time_bin, 60.0},
        {"compass structure", compass, 60.0},
        {"tunable bandwidth", tunable_bandwidth, 0.0},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criteria[i].budget_s > 0) v.require(secs < criteria[i].budget_s, "runtime budget");
        if (!v.pass) ++failures;
        std::printf("%s %zu %s (%.2f s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, secs,
                    v.detail.str().c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
