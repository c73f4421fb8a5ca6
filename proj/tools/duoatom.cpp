// duoatom.cpp — Command-line front end: eigen-scan, emit, wigner, store, scan

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "duoatom/config.hpp"
#include "duoatom/io.hpp"
#include "duoatom/protocols.hpp"
#include "duoatom/scenarios.hpp"
#include "duoatom/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace duoatom;

namespace {

struct Options {
    std::string scenario;
    std::string out{"duoatom-out"};
    unsigned workers{std::max(1u, std::thread::hardware_concurrency())};
    std::optional<double> rtol;
    bool seedless{false};
    std::string what;
};

void add_common(CLI::App* sub, Options& o, const std::string& default_scenario) {
    sub->add_option("scenario,--scenario", o.scenario,
                    "built-in name (fig2..fig6) or scenario file [default: " + default_scenario + "]");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--workers", o.workers, "parallel workers for scans (output does not depend on it)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--rtol", o.rtol, "override the integrator relative tolerance")->check(CLI::PositiveNumber);
    sub->add_flag("--seedless", o.seedless, "accepted for scripts; every run is deterministic and uses no seed");
}

std::string file_stem(const ScenarioConfig& c) {
    std::string s = c.label();
    std::replace(s.begin(), s.end(), '/', '_');
    return s;
}

std::vector<ScenarioConfig> load(const Options& o) {
    auto runs = load_scenario(o.scenario);
    if (o.rtol) {
        for (auto& c : runs) {
            c.integrator.rtol = *o.rtol;
            c.emission.integrator.rtol = *o.rtol;
            c.memory.integrator.rtol = *o.rtol;
        }
    }
    return runs;
}

json config_json(const ScenarioConfig& c) {
    return {{"scenario", c.name},
            {"variant", c.variant},
            {"kind", to_string(c.kind)},
            {"origin", c.origin},
            {"scenario_text", c.source},
            {"cavity_rule", c.cavity_rule},
            {"params", io::params_json(c.params)},
            {"integrator", io::integrator_json(c.integrator)}};
}

json run_eigen_scan(const Options& o, const fs::path& out) {
    json runs = json::array();
    for (const auto& c : load(o)) {
        ScenarioConfig sc = c;
        const auto grid = spectral_grid(sc);
        const auto rows = spectral_scan(sc.params, grid);
        const std::string name = file_stem(sc) + "_eigen_scan.csv";
        io::CsvWriter w(out / name, {"delta12_over_kappa", "delta12_ueV", "mu", "nu", "omega_minus_eff_ueV",
                                     "omega_plus_eff_ueV", "Gamma_over_Gamma0", "gamma_eff_over_Gamma0", "beta", "dark"});
        double beta_min = 1.0, beta_max = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto h = hybrid_eigenstates(sc.params, grid[i]);
            const auto r = effective_rates(sc.params, grid[i]);
            w.row({rows[i].delta12_over_kappa, units::angular_to_energy(grid[i]), rows[i].mu, rows[i].nu,
                   units::angular_to_energy(h.omega_minus_eff), units::angular_to_energy(h.omega_plus_eff),
                   rows[i].Gamma_over_Gamma0, r.Gamma0 > 0 ? r.gamma_minus_eff / r.Gamma0 : 0.0, rows[i].beta,
                   rows[i].dark ? 1.0 : 0.0});
            if (!rows[i].dark) {
                beta_min = std::min(beta_min, rows[i].beta);
                beta_max = std::max(beta_max, rows[i].beta);
            }
        }
        json j = config_json(sc);
        j["files"] = {name};
        j["results"] = {{"points", rows.size()},
                        {"beta_min_excluding_dark", beta_min},
                        {"beta_max", beta_max},
                        {"Gamma_over_Gamma0_at_max", rows.back().Gamma_over_Gamma0},
                        {"purcell_factor", purcell_factor(sc.params)}};
        runs.push_back(j);
    }
    return runs;
}

json emission_json(const ScenarioConfig& c, const EmissionRun& run) {
    const auto& r = run.result;
    const auto& tr = r.trajectory;
    json j = config_json(c);
    j["schedule"] = io::schedule_json(run.scenario.schedule);
    j["stats"] = io::stats_json(tr.stats);
    const auto [peak, at] = window_max(tr.t, tr.power, 0.0, tr.t.back() + 1.0);
    std::vector<double> atomic(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) atomic[i] = tr.atomic(i);
    j["results"] = {{"emitted_cavity", r.emitted},
                    {"leaked", tr.leaked.back()},
                    {"plus_eff_emission", r.plus_eff_emission},
                    {"peak_power_per_ns", peak},
                    {"peak_power_time_ns", at},
                    {"atomic_one_over_e_time_ns", crossing_time(tr.t, atomic, std::exp(-1.0) * atomic.front())},
                    {"adiabaticity_max_ratio", r.adiabaticity.max_ratio},
                    {"adiabaticity_at_ns", r.adiabaticity.at_time},
                    {"adiabaticity_threshold", r.adiabaticity.threshold}};
    if (run.equalized) {
        json amps = json::array(), peaks = json::array();
        for (double a : run.equalized->amplitudes) amps.push_back(units::angular_to_energy(a));
        for (double p : run.equalized->peak_powers) peaks.push_back(p);
        j["results"]["equalized_amplitudes_ueV"] = amps;
        j["results"]["equalized_peak_powers"] = peaks;
        j["results"]["equalization_reached"] = run.equalized->reached;
    }
    j["warnings"] = r.warnings;
    return j;
}

json run_emit(const Options& o, const fs::path& out, bool wigner_only) {
    json runs = json::array();
    for (auto c : load(o)) {
        if (c.kind != ScenarioKind::Emission)
            throw ConfigError("scenario '" + c.label() + "' is a " + to_string(c.kind) + " scenario, not emission");
        if (wigner_only) {
            c.emission.outputs.spectrum = false;
            if (!c.emission.outputs.wigner) {
                auto& w = c.emission.outputs.wigner_options;
                w.omega_min = c.params.omega_c - units::ueV(10.0);
                w.omega_max = c.params.omega_c + units::ueV(10.0);
                w.n_omega = 401;
                c.emission.outputs.wigner = true;
            }
        }
        const auto run = run_emission_config(c);
        const std::string stem = file_stem(c);
        json files = json::array();
        if (!wigner_only) {
            io::write_trajectory(out / (stem + "_trajectory.csv"), run.result.trajectory);
            files.push_back(stem + "_trajectory.csv");
        }
        if (run.result.spectrum) {
            io::write_spectrum(out / (stem + "_spectrum.csv"), *run.result.spectrum);
            files.push_back(stem + "_spectrum.csv");
        }
        json j = emission_json(c, run);
        if (run.result.wigner) {
            io::write_wigner(out / (stem + "_wigner.csv"), *run.result.wigner);
            files.push_back(stem + "_wigner.csv");
            const auto& W = run.result.wigner->W;
            j["results"]["wigner_max"] = W.maxCoeff();
            j["results"]["wigner_min"] = W.minCoeff();
            j["results"]["wigner_max_imag_residue"] = run.result.wigner->max_imag_residue;
        }
        j["files"] = files;
        runs.push_back(j);
    }
    return runs;
}

json memory_json(const ScenarioConfig& c) {
    json j = config_json(c);
    const auto& m = c.memory;
    j["schedule"] = io::schedule_json(m.schedule());
    j["memory"] = {{"pulse_center_ns", m.pulse_center},
                   {"pulse_fwhm_ns", m.pulse_fwhm},
                   {"mean_photons", m.mean_photons},
                   {"delta_absorb_ueV", units::angular_to_energy(m.delta_absorb)},
                   {"carrier_ueV", units::angular_to_energy(m.carrier())},
                   {"store_start_ns", m.store_start()},
                   {"store_duration_ns", m.store_duration},
                   {"release", m.release},
                   {"release_time_ns", m.release_time},
                   {"delta_release_ueV", units::angular_to_energy(m.delta_release)}};
    return j;
}

json run_store(const Options& o, const fs::path& out) {
    json runs = json::array();
    for (const auto& c : load(o)) {
        if (c.kind != ScenarioKind::Memory)
            throw ConfigError("scenario '" + c.label() + "' is a " + to_string(c.kind) + " scenario, not memory");
        const auto r = run_memory(c.memory);
        const std::string stem = file_stem(c);
        io::write_trajectory(out / (stem + "_trajectory.csv"), r.trajectory);
        json j = memory_json(c);
        j["stats"] = io::stats_json(r.trajectory.stats);
        j["results"] = {{"efficiency", r.efficiency},
                        {"efficiency_time_ns", r.efficiency_time},
                        {"storage_decay_rate_per_ns", r.storage_decay_rate},
                        {"storage_decay_time_ns", 1.0 / r.storage_decay_rate},
                        {"gamma_minus_lifetime_ns", 1.0 / c.params.gamma_minus()},
                        {"input", r.input},
                        {"output", r.output},
                        {"leaked", r.leaked},
                        {"remaining", r.remaining},
                        {"flux_residual_over_n", r.flux_residual},
                        {"released_over_n", r.released},
                        {"adiabaticity_max_ratio", r.adiabaticity.max_ratio}};
        if (c.memory.release && c.memory.mean_photons > 0) {
            const auto cmp = compare_release(c.memory, r);
            j["results"]["release_check"] = {{"master_equation", cmp.memory_released},
                                             {"amplitudes", cmp.emission_released},
                                             {"relative_difference", cmp.relative_difference},
                                             {"max_curve_deviation", cmp.max_curve_deviation}};
        }
        j["warnings"] = r.warnings;
        j["files"] = {stem + "_trajectory.csv"};
        runs.push_back(j);
    }
    return runs;
}

json run_scan(const Options& o, const fs::path& out) {
    json runs = json::array();
    for (const auto& c : load(o)) {
        if (c.kind != ScenarioKind::Memory)
            throw ConfigError("scan needs a memory scenario; '" + c.label() + "' is " + to_string(c.kind));
        const std::string stem = file_stem(c);
        json j = memory_json(c);
        if (o.what == "bandwidth") {
            if (c.scan.bandwidth_grid.empty()) throw ConfigError("scenario has no scan.bandwidth_ueV grid");
            const auto s = bandwidth_optimum_scan(c.memory, c.scan.bandwidth_grid, o.workers);
            io::CsvWriter w(out / (stem + "_bandwidth.csv"), {"delta12_ueV", "efficiency", "state_time_ns", "ratio"});
            for (const auto& row : s.rows)
                w.row({units::angular_to_energy(row.delta12), row.efficiency, row.state_time, row.ratio});
            j["files"] = {stem + "_bandwidth.csv"};
            j["results"] = {{"optimum_delta12_ueV", units::angular_to_energy(s.optimum_delta)},
                            {"optimum_efficiency", s.optimum_efficiency},
                            {"optimum_ratio", s.optimum_ratio},
                            {"ratio_definition", "1/(Gamma_minus_eff + gamma_minus_eff) divided by the pulse FWHM"}};
        } else {
            if (c.scan.timing_offsets.empty()) throw ConfigError("scenario has no scan.timing_offsets_ps list");
            const auto rows = timing_sensitivity(c.memory, c.scan.timing_offsets, o.workers);
            io::CsvWriter w(out / (stem + "_timing.csv"), {"offset_ps", "efficiency", "relative"});
            for (const auto& row : rows) w.row({units::ns_to_ps(row.offset), row.efficiency, row.relative});
            j["files"] = {stem + "_timing.csv"};
        }
        runs.push_back(j);
    }
    return runs;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"duoatom: two dipole-coupled emitters in a lossy cavity"};
    app.require_subcommand(1);
    Options o;
    auto* eigen = app.add_subcommand("eigen-scan", "eigenstates, rates and mode coupling versus detuning");
    add_common(eigen, o, "fig2");
    auto* emit = app.add_subcommand("emit", "controlled emission: trajectory, spectrum and Wigner-Ville map");
    add_common(emit, o, "fig3");
    auto* wigner = app.add_subcommand("wigner", "Wigner-Ville map of an emission scenario");
    add_common(wigner, o, "fig4");
    auto* store = app.add_subcommand("store", "absorb, store and release a weak coherent pulse");
    add_common(store, o, "fig6");
    auto* scan = app.add_subcommand("scan", "memory efficiency scans");
    add_common(scan, o, "fig6");
    o.what = "bandwidth";
    scan->add_option("--what", o.what, "bandwidth | timing")
        ->check(CLI::IsMember({"bandwidth", "timing"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    const auto started = std::chrono::steady_clock::now();
    if (o.scenario.empty()) {
        if (eigen->parsed()) o.scenario = "fig2";
        else if (emit->parsed()) o.scenario = "fig3";
        else if (wigner->parsed()) o.scenario = "fig4";
        else o.scenario = "fig6";
    }
    try {
        const fs::path out(o.out);
        fs::create_directories(out);
        json runs;
        std::string command;
        if (eigen->parsed()) {
            command = "eigen-scan";
            runs = run_eigen_scan(o, out);
        } else if (emit->parsed()) {
            command = "emit";
            runs = run_emit(o, out, false);
        } else if (wigner->parsed()) {
            command = "wigner";
            runs = run_emit(o, out, true);
        } else if (store->parsed()) {
            command = "store";
            runs = run_store(o, out);
        } else {
            command = "scan";
            runs = run_scan(o, out);
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        json manifest = {{"tool", "duoatom"},
                         {"version", io::tool_version},
                         {"command", command},
                         {"scenario", o.scenario},
                         {"workers", o.workers},
                         {"seedless", true},
                         {"rtol_override", o.rtol ? json(*o.rtol) : json(nullptr)},
                         {"wall_clock_s", wall},
                         {"runs", runs}};
        if (command == "scan") manifest["what"] = o.what;
        io::write_json(out / (command + "_manifest.json"), manifest);
        std::cout << (out / (command + "_manifest.json")).string() << '\n';
        return 0;
    } catch (const Error& e) {
        json err = {{"error", e.kind()}, {"message", e.what()}};
        if (const auto* ce = dynamic_cast<const ConfigError*>(&e); ce && ce->line > 0) err["line"] = ce->line;
        std::cerr << err.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
}
