// io.hpp — Deterministic CSV tables and JSON run manifests

#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "duoatom/dynamics.hpp"
#include "duoatom/error.hpp"
#include "duoatom/schedule.hpp"
#include "duoatom/signal.hpp"
#include "duoatom/units.hpp"

namespace duoatom::io {

inline constexpr std::string_view tool_version = "1.0.0";

/// Shortest round-trip decimal form; identical bits give identical text.
inline std::string format(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path) {
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw Error("io", "cannot write '" + path.string() + "'");
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format(values[i]);
        out_ << '\n';
        if (!out_) throw Error("io", "write failed for '" + path_.string() + "'");
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

inline void write_trajectory(const std::filesystem::path& path, const Trajectory& tr) {
    CsvWriter w(path, {"t_ns", "pop_s", "pop_a", "pop_cavity", "pop_minus_eff", "pop_plus_eff", "power_per_ns",
                       "field_re", "field_im", "emitted_cavity", "leaked", "input", "output"});
    for (std::size_t i = 0; i < tr.size(); ++i)
        w.row({tr.t[i], tr.pop_s[i], tr.pop_a[i], tr.pop_cavity[i], tr.pop_minus_eff[i], tr.pop_plus_eff[i],
               tr.power[i], tr.field[i].real(), tr.field[i].imag(), tr.emitted_cavity[i], tr.leaked[i],
               tr.input.empty() ? 0.0 : tr.input[i], tr.output.empty() ? 0.0 : tr.output[i]});
}

inline void write_spectrum(const std::filesystem::path& path, const Spectrum& s) {
    CsvWriter w(path, {"omega_rad_per_ns", "energy_ueV", "S_ns"});
    for (std::size_t i = 0; i < s.omega.size(); ++i) w.row({s.omega[i], units::angular_to_energy(s.omega[i]), s.S[i]});
}

/// Matrix layout: the header row lists the frequencies (rad/ns), each later row is t then W(t, ω).
inline void write_wigner(const std::filesystem::path& path, const TimeFrequencyMap& m) {
    std::vector<std::string> header{"t_ns\\omega_rad_per_ns"};
    for (double w : m.omega) header.push_back(format(w));
    CsvWriter out(path, header);
    std::vector<double> row(m.omega.size() + 1);
    for (std::size_t i = 0; i < m.t.size(); ++i) {
        row[0] = m.t[i];
        for (std::size_t j = 0; j < m.omega.size(); ++j)
            row[j + 1] = m.W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        out.row(row);
    }
}

inline nlohmann::json params_json(const PhysicalParams& p) {
    auto both = [](double rad) { return nlohmann::json{{"rad_per_ns", rad}, {"ueV", units::angular_to_energy(rad)}}; };
    return {{"g", both(p.g)},
            {"kappa", both(p.kappa)},
            {"gamma", both(p.gamma)},
            {"gamma12", both(p.gamma12)},
            {"omega12", both(p.omega12)},
            {"omega_c_minus_omega0", both(p.omega_c)},
            {"omega0_ref", both(p.omega0_ref)},
            {"gamma_minus_lifetime_ns", p.gamma_minus() > 0 ? 1.0 / p.gamma_minus() : -1.0}};
}

inline nlohmann::json channel_json(const Channel& c) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& seg : c.track()) {
        if (const auto* r = std::get_if<Ramp>(&seg))
            arr.push_back({{"type", "ramp"}, {"start_ns", r->start}, {"duration_ns", r->duration},
                           {"from_rad_per_ns", r->from}, {"to_rad_per_ns", r->to}});
        else
            arr.push_back({{"type", "const"}, {"start_ns", std::get<Level>(seg).start},
                           {"value_rad_per_ns", std::get<Level>(seg).value}});
    }
    for (const auto& g : c.pulses())
        arr.push_back({{"type", "gauss"}, {"center_ns", g.center}, {"fwhm_ns", g.fwhm}, {"peak", g.peak}});
    return arr;
}

inline nlohmann::json schedule_json(const ControlSchedule& s) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(s.checksum()));
    return {{"delta12", channel_json(s.delta12)},
            {"omega0", channel_json(s.omega0)},
            {"drive", channel_json(s.drive)},
            {"drive_carrier_rad_per_ns", s.drive_carrier},
            {"hold_minus_eff_rad_per_ns", s.hold_minus_eff},
            {"t_end_ns", s.t_end},
            {"checksum_fnv1a", hex}};
}

inline nlohmann::json integrator_json(const IntegratorSettings& s) {
    return {{"method", "dopri5"}, {"rtol", s.rtol}, {"atol", s.atol}, {"sample_dt_ns", s.sample_dt}, {"n_max", s.n_max}};
}

inline nlohmann::json stats_json(const ode::Stats& s) {
    return {{"accepted_steps", s.accepted}, {"rejected_steps", s.rejected}, {"rhs_evaluations", s.evaluations}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

} // namespace duoatom::io
