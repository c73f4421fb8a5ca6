// scenarios.hpp — Built-in scenario files and name/path resolution

#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "duoatom/config.hpp"
#include "duoatom/error.hpp"

namespace duoatom {

namespace builtin {

inline constexpr std::string_view fig2 = R"yaml(# Eigenstructure scan at the micropillar parameter set
scenario: fig2
kind: spectral
physics:
  g_ueV: 20
  kappa_ueV: 400
  gamma_ueV: 0.6
  omega12_ueV: 31
  gamma12_over_gamma: 0.99
  cavity: omega0_minus_omega12
spectral:
  delta_over_kappa_max: 0.25
  points: 101
)yaml";

inline constexpr std::string_view fig3 = R"yaml(# Shaped spontaneous emission from |-,0>: a 280 ps ramp of the inter-emitter
# detuning opens the dark state; the cavity sits on the final |->_eff line.
scenario: fig3
kind: emission
physics:
  g_ueV: 20
  kappa_ueV: 400
  gamma_ueV: 0.6
  omega12_ueV: 31
  gamma12_over_gamma: 0.99
  cavity: final_minus_eff
integrator:
  rtol: 1.0e-9
  atol: 1.0e-12
  sample_dt_ps: 10
schedule:
  - {channel: delta12, type: ramp, start_ps: 700, duration_ps: 280, from_ueV: 0, to_ueV: 10}
emission:
  t_end_ns: 15
  initial: dark
  # the 50 ueV ramp peaks at |dD/dt|/W^2 = 0.19
  adiabatic_threshold: 0.25
variants:
  - name: d10
  - name: d50
    set: {schedule.0.to_ueV: 50}
)yaml";

inline constexpr std::string_view fig4 = R"yaml(# Time-bin photon: two 400 ps Gaussian detuning pulses separated by dt. The
# emitter frequency follows sqrt(D^2+W^2)-W so both bins share one carrier.
scenario: fig4
kind: emission
physics:
  g_ueV: 20
  kappa_ueV: 400
  gamma_ueV: 0.6
  omega12_ueV: 31
  gamma12_over_gamma: 0.99
  cavity: omega0_minus_omega12
integrator:
  rtol: 1.0e-9
  atol: 1.0e-12
  sample_dt_ps: 10
schedule:
  - {channel: delta12, type: gauss, center_ps: 2000, fwhm_ps: 400, peak_ueV: 20}
  - {channel: delta12, type: gauss, center_ps: 7000, fwhm_ps: 400, peak_ueV: 20}
emission:
  t_end_ns: 11
  initial: dark
  hold_minus_eff: true
  equalize: true
  equalize_tolerance: 0.02
  spectrum: {span_ueV: 12, points: 4001}
  wigner: {span_ueV: 10, points: 801, t_stride: 5}
variants:
  - name: dt5
  - name: dt11
    set: {schedule.1.center_ps: 13000, emission.t_end_ns: 17}
)yaml";

inline constexpr std::string_view fig5 = R"yaml(# Compass state: four 170 ps detuning pulses at 300, 1100, 1500, 2300 ps while
# the common emitter frequency steps through 0, +20, -20, 0 ueV.
scenario: fig5
kind: emission
physics:
  g_ueV: 20
  kappa_ueV: 400
  gamma_ueV: 0.6
  omega12_ueV: 31
  gamma12_over_gamma: 0.99
  cavity: omega0_minus_omega12
integrator:
  rtol: 1.0e-9
  atol: 1.0e-12
  sample_dt_ps: 2
schedule:
  - {channel: delta12, type: gauss, center_ps: 300, fwhm_ps: 170, peak_ueV: 10}
  - {channel: delta12, type: gauss, center_ps: 1100, fwhm_ps: 170, peak_ueV: 10}
  - {channel: delta12, type: gauss, center_ps: 1500, fwhm_ps: 170, peak_ueV: 10}
  - {channel: delta12, type: gauss, center_ps: 2300, fwhm_ps: 170, peak_ueV: 10}
  - {channel: omega0, type: const, start_ps: 0, value_ueV: 0}
  - {channel: omega0, type: ramp, start_ps: 550, duration_ps: 300, from_ueV: 0, to_ueV: 20}
  - {channel: omega0, type: ramp, start_ps: 1250, duration_ps: 100, from_ueV: 20, to_ueV: -20}
  - {channel: omega0, type: ramp, start_ps: 1750, duration_ps: 300, from_ueV: -20, to_ueV: 0}
emission:
  t_end_ns: 3
  initial: dark
  hold_minus_eff: true
  equalize: true
  equalize_tolerance: 0.02
  spectrum: {span_ueV: 100, points: 2001}
  wigner: {span_ueV: 100, points: 481, t_stride: 5}
)yaml";

inline constexpr std::string_view fig6 = R"yaml(# Absorb, store, release: a 550 ps weak coherent pulse on |->_eff at 40 ueV,
# a 200 ps store ramp to zero detuning, release at 35 ns.
scenario: fig6
kind: memory
physics:
  g_ueV: 20
  kappa_ueV: 400
  gamma_ueV: 0.6
  omega12_ueV: 31
  gamma12_over_gamma: 0.99
  cavity: omega0_minus_omega12
integrator:
  rtol: 1.0e-8
  atol: 1.0e-12
  sample_dt_ps: 10
  n_max: 2
memory:
  pulse_center_ps: 1500
  pulse_fwhm_ps: 550
  mean_photons: 0.01
  delta_absorb_ueV: 40
  store_duration_ps: 200
  store_offset_ps: 0
  release: true
  release_time_ns: 35
  release_duration_ps: 280
  delta_release_ueV: 40
  t_end_ns: 40
  adiabatic_threshold: 0.25
scan:
  bandwidth_ueV: {from: 20, to: 70, step: 2.5}
  timing_offsets_ps: [-300, -200, -100, 100, 200, 300]
)yaml";

} // namespace builtin

inline const std::map<std::string, std::string_view>& builtin_scenarios() {
    static const std::map<std::string, std::string_view> table{
        {"fig2", builtin::fig2}, {"fig3", builtin::fig3}, {"fig4", builtin::fig4},
        {"fig5", builtin::fig5}, {"fig6", builtin::fig6}};
    return table;
}

/// Resolves a built-in name (optionally with a .cfg/.yaml suffix) or a file path.
/// A file <name>.yaml in $DUOATOM_SCENARIO_PATH overrides the built-in text.
inline std::vector<ScenarioConfig> load_scenario(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    if (fs::is_regular_file(name_or_path)) return load_config_file(name_or_path);

    std::string name = name_or_path;
    for (const char* ext : {".cfg", ".yaml", ".yml"}) {
        const std::string e(ext);
        if (name.size() > e.size() && name.compare(name.size() - e.size(), e.size(), e) == 0) {
            name.resize(name.size() - e.size());
            break;
        }
    }
    const auto& table = builtin_scenarios();
    const auto it = table.find(name);
    if (it == table.end()) {
        std::string list;
        for (const auto& [k, v] : table) list += (list.empty() ? "" : ", ") + k;
        throw ConfigError("no scenario file '" + name_or_path + "' and no built-in of that name (built-ins: " + list + ")");
    }
    if (const char* dir = std::getenv("DUOATOM_SCENARIO_PATH"); dir && *dir) {
        for (const char* ext : {".yaml", ".yml", ".cfg"}) {
            const fs::path candidate = fs::path(dir) / (name + ext);
            if (fs::is_regular_file(candidate)) return load_config_file(candidate.string());
        }
    }
    return parse_config(std::string(it->second), "builtin:" + name);
}

/// Detuning grid of a spectral scenario: `points` values from 0 to max·κ.
inline std::vector<double> spectral_grid(const ScenarioConfig& c) {
    std::vector<double> g(c.spectral.points);
    const double top = c.spectral.delta_over_kappa_max * c.params.kappa;
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = top * static_cast<double>(i) / static_cast<double>(g.size() - 1);
    return g;
}

struct EmissionRun {
    EmissionScenario scenario; // as run, with the equalized schedule when requested
    std::optional<EqualizeResult> equalized;
    EmissionResult result;
};

inline EmissionRun run_emission_config(const ScenarioConfig& c) {
    if (c.kind != ScenarioKind::Emission) throw ConfigError("scenario '" + c.label() + "' is not an emission scenario");
    EmissionRun run;
    run.scenario = c.emission;
    if (c.equalize) {
        run.equalized = equalize_pulses(run.scenario, c.equalize_tolerance);
        run.scenario.schedule = run.equalized->schedule;
    }
    run.result = run_emission(run.scenario);
    if (run.equalized && !run.equalized->reached) run.result.warnings.push_back(run.equalized->note);
    return run;
}

} // namespace duoatom
