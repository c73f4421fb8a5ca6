// config.hpp — YAML scenario files: parsing, unit conversion, validation, variants
//
// A scenario file has the top-level keys
//   scenario, kind (spectral | emission | memory), physics, integrator,
//   schedule, emission, memory, spectral, scan, variants
// Energies are given in μeV (`*_ueV`), times in ps or ns (`*_ps`, `*_ns`).
// `variants` is a list of {name, set: {"dotted.path": value}} patches; each
// variant yields one resolved run. Unknown keys are rejected with their line.

#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "duoatom/error.hpp"
#include "duoatom/params.hpp"
#include "duoatom/protocols.hpp"
#include "duoatom/schedule.hpp"
#include "duoatom/units.hpp"

namespace duoatom {

enum class ScenarioKind { Spectral, Emission, Memory };

inline const char* to_string(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::Spectral: return "spectral";
    case ScenarioKind::Emission: return "emission";
    case ScenarioKind::Memory: return "memory";
    }
    return "?";
}

struct SpectralScanOptions {
    double delta_over_kappa_max{0.25};
    std::size_t points{101};
};

struct ScanOptions {
    std::vector<double> bandwidth_grid; // absorb-phase Δ₁₂, rad/ns
    std::vector<double> timing_offsets; // ns
};

struct ScenarioConfig {
    std::string name;
    std::string variant;
    ScenarioKind kind{ScenarioKind::Emission};
    PhysicalParams params;
    IntegratorSettings integrator;
    EmissionScenario emission;
    bool equalize{false};
    double equalize_tolerance{0.02};
    MemoryScenario memory;
    ScanOptions scan;
    SpectralScanOptions spectral;
    std::string cavity_rule;   // how ω_c was resolved
    std::string origin;        // file path or "builtin:<name>"
    std::string source;        // full scenario text

    std::string label() const { return variant.empty() ? name : name + "/" + variant; }
};

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

class Section {
public:
    Section(YAML::Node node, std::string path, std::set<std::string> allowed)
        : node_(std::move(node)), path_(std::move(path)), allowed_(std::move(allowed)) {
        if (node_ && !node_.IsMap()) throw ConfigError(where() + " must be a mapping", line_of(node_));
        if (!node_) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!allowed_.count(key)) {
                std::string list;
                for (const auto& a : allowed_) list += (list.empty() ? "" : ", ") + a;
                throw ConfigError("unknown key '" + key + "' in " + where() + " (allowed: " + list + ")",
                                  line_of(kv.first));
            }
        }
    }

    bool present() const { return static_cast<bool>(node_); }
    bool has(const std::string& key) const { return node_ && node_[key]; }
    YAML::Node raw(const std::string& key) const { return node_ ? node_[key] : YAML::Node{}; }
    int line() const { return line_of(node_); }

    double number(const std::string& key, double fallback) const {
        return has(key) ? as_number(node_[key], key) : fallback;
    }
    double number(const std::string& key) const {
        if (!has(key)) throw ConfigError("missing required key " + qualified(key), line());
        return as_number(node_[key], key);
    }
    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        try {
            return node_[key].as<bool>();
        } catch (const YAML::Exception&) {
            throw ConfigError(qualified(key) + " must be true or false", line_of(node_[key]));
        }
    }
    std::string text(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const auto n = node_[key];
        if (!n.IsScalar()) throw ConfigError(qualified(key) + " must be a string", line_of(n));
        return n.as<std::string>();
    }
    std::vector<double> numbers(const std::string& key) const {
        if (!has(key)) return {};
        const auto n = node_[key];
        if (!n.IsSequence()) throw ConfigError(qualified(key) + " must be a list of numbers", line_of(n));
        std::vector<double> out;
        for (const auto& v : n) out.push_back(as_number(v, key));
        return out;
    }
    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const YAML::Node& node() const { return node_; }

private:
    std::string where() const { return path_.empty() ? "top level" : "'" + path_ + "'"; }
    double as_number(const YAML::Node& n, const std::string& key) const {
        double v = 0.0;
        try {
            if (!n.IsScalar()) throw YAML::Exception(n.Mark(), "");
            v = n.as<double>();
        } catch (const YAML::Exception&) {
            throw ConfigError(qualified(key) + " must be a number", line_of(n));
        }
        if (!std::isfinite(v)) throw ConfigError(qualified(key) + " must be finite", line_of(n));
        return v;
    }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> allowed_;
};

// Applies a "dotted.path" = value patch; integer components index sequences.
inline void apply_patch(YAML::Node root, const std::string& path, const YAML::Node& value, int line) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
    if (parts.empty()) throw ConfigError("empty override path", line);
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node cur = chain.back();
        YAML::Node next;
        if (cur.IsSequence()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(parts[i]);
            } catch (const std::exception&) {
                throw ConfigError("override path '" + path + "': '" + parts[i] + "' is not a list index", line);
            }
            if (idx >= cur.size()) throw ConfigError("override path '" + path + "': index out of range", line);
            next = cur[idx];
        } else if (cur.IsMap() && cur[parts[i]]) {
            next = cur[parts[i]];
        } else {
            throw ConfigError("override path '" + path + "' does not name an existing section", line);
        }
        chain.push_back(next);
    }
    YAML::Node parent = chain.back();
    if (parent.IsSequence()) throw ConfigError("override path '" + path + "' must end in a key", line);
    parent[parts.back()] = value;
}

inline Channel* channel_for(ControlSchedule& s, const std::string& name, int line) {
    if (name == "delta12") return &s.delta12;
    if (name == "omega0") return &s.omega0;
    throw ConfigError("schedule channel must be delta12 or omega0 (got '" + name + "')", line);
}

inline ControlSchedule parse_schedule(const YAML::Node& list) {
    ControlSchedule s;
    if (!list) return s;
    if (!list.IsSequence()) throw ConfigError("schedule must be a list of entries", line_of(list));
    std::size_t i = 0;
    for (const auto& item : list) {
        const std::string path = "schedule." + std::to_string(i++);
        const Section probe(item, path,
                            {"channel", "type", "start_ps", "value_ueV", "duration_ps", "from_ueV", "to_ueV",
                             "center_ps", "fwhm_ps", "peak_ueV"});
        const int line = probe.line();
        Channel* ch = channel_for(s, probe.text("channel", "delta12"), line);
        const std::string type = probe.text("type", "");
        if (type == "const") {
            ch->add(Level{units::ps_to_ns(probe.number("start_ps", 0.0)), units::ueV(probe.number("value_ueV"))});
        } else if (type == "ramp") {
            ch->add(Ramp{units::ps_to_ns(probe.number("start_ps")), units::ps_to_ns(probe.number("duration_ps")),
                         units::ueV(probe.number("from_ueV")), units::ueV(probe.number("to_ueV"))});
        } else if (type == "gauss") {
            const double fwhm = units::ps_to_ns(probe.number("fwhm_ps"));
            if (!(fwhm > 0)) throw ConfigError(path + ".fwhm_ps must be > 0", line);
            ch->add(Gauss{units::ps_to_ns(probe.number("center_ps")), fwhm,
                          units::ueV(probe.number("peak_ueV"))});
        } else {
            throw ConfigError(path + ".type must be const, ramp or gauss", line);
        }
    }
    return s;
}

inline std::vector<double> parse_grid(const Section& scan, const std::string& key) {
    const YAML::Node n = scan.raw(key);
    if (!n) return {};
    if (n.IsSequence()) return scan.numbers(key);
    const Section r(n, scan.qualified(key), {"from", "to", "step"});
    const double from = r.number("from"), to = r.number("to"), step = r.number("step");
    if (!(step > 0) || !(to >= from)) throw ConfigError(r.qualified("step") + " must be > 0 with to >= from", r.line());
    std::vector<double> g;
    const auto count = static_cast<std::size_t>(std::floor((to - from) / step * (1.0 + 1e-12))) + 1;
    for (std::size_t i = 0; i < count; ++i) g.push_back(from + step * static_cast<double>(i));
    return g;
}

inline ScenarioConfig resolve(const YAML::Node& root, const std::string& origin) {
    if (!root || root.IsNull())
        throw ConfigError("empty scenario file; required keys: scenario, kind, physics.g_ueV, physics.kappa_ueV, "
                          "physics.gamma_ueV, physics.omega12_ueV (or physics.geometry), physics.gamma12_over_gamma");
    const Section top(root, "",
                      {"scenario", "kind", "physics", "integrator", "schedule", "emission", "memory", "spectral",
                       "scan", "variants"});
    std::vector<std::string> missing;
    for (const char* k : {"scenario", "kind", "physics"})
        if (!top.has(k)) missing.push_back(k);
    const Section phys(top.raw("physics"), "physics",
                       {"g_ueV", "kappa_ueV", "gamma_ueV", "omega12_ueV", "gamma12_over_gamma", "geometry", "cavity",
                        "cavity_offset_ueV", "omega0_ref_ueV"});
    for (const char* k : {"g_ueV", "kappa_ueV", "gamma_ueV"})
        if (!phys.has(k)) missing.push_back(std::string("physics.") + k);
    const bool geometry = phys.has("geometry");
    if (!geometry) {
        if (!phys.has("omega12_ueV")) missing.push_back("physics.omega12_ueV (or physics.geometry)");
        if (!phys.has("gamma12_over_gamma")) missing.push_back("physics.gamma12_over_gamma (or physics.geometry)");
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw ConfigError("missing required keys: " + list, top.line());
    }

    ScenarioConfig c;
    c.origin = origin;
    c.name = top.text("scenario", "");
    const std::string kind = top.text("kind", "");
    if (kind == "spectral") c.kind = ScenarioKind::Spectral;
    else if (kind == "emission") c.kind = ScenarioKind::Emission;
    else if (kind == "memory") c.kind = ScenarioKind::Memory;
    else throw ConfigError("kind must be spectral, emission or memory", line_of(top.raw("kind")));

    // physics
    PhysicalParams& p = c.params;
    p.g = units::ueV(phys.number("g_ueV"));
    p.kappa = units::ueV(phys.number("kappa_ueV"));
    p.gamma = units::ueV(phys.number("gamma_ueV"));
    p.omega0_ref = units::ueV(phys.number("omega0_ref_ueV", 0.0));
    if (geometry) {
        if (phys.has("omega12_ueV") || phys.has("gamma12_over_gamma"))
            throw ConfigError("give either physics.geometry or omega12_ueV/gamma12_over_gamma, not both", phys.line());
        const Section geo(phys.raw("geometry"), "physics.geometry", {"d_nm", "wavelength_nm", "refractive_index"});
        DipoleGeometry g;
        g.d_nm = geo.number("d_nm", g.d_nm);
        g.wavelength_nm = geo.number("wavelength_nm", g.wavelength_nm);
        g.refractive_index = geo.number("refractive_index", g.refractive_index);
        try {
            const auto r = dipole_rates(g, p.gamma);
            p.omega12 = r.omega12;
            p.gamma12 = r.gamma12;
        } catch (const ValidationError& e) {
            throw ConfigError(e.what(), geo.line());
        }
    } else {
        p.omega12 = units::ueV(phys.number("omega12_ueV"));
        const double ratio = phys.number("gamma12_over_gamma");
        if (ratio < 0 || ratio > 1)
            throw ConfigError("physics.gamma12_over_gamma must lie in [0, 1] (cross damping cannot exceed gamma)",
                              line_of(phys.raw("gamma12_over_gamma")));
        p.gamma12 = ratio * p.gamma;
    }

    // integrator
    const Section integ(top.raw("integrator"), "integrator", {"rtol", "atol", "sample_dt_ps", "n_max"});
    IntegratorSettings& is = c.integrator;
    if (c.kind == ScenarioKind::Memory) is = MemoryScenario{}.integrator;
    is.rtol = integ.number("rtol", is.rtol);
    is.atol = integ.number("atol", is.atol);
    is.sample_dt = units::ps_to_ns(integ.number("sample_dt_ps", units::ns_to_ps(is.sample_dt)));
    const double n_max = integ.number("n_max", is.n_max);
    if (n_max < 1 || n_max != std::floor(n_max)) throw ConfigError("integrator.n_max must be an integer >= 1", integ.line());
    is.n_max = static_cast<int>(n_max);
    if (!(is.rtol > 0) || !(is.atol > 0) || !(is.sample_dt > 0))
        throw ConfigError("integrator tolerances and sample_dt_ps must be > 0", integ.line());

    ControlSchedule sched = parse_schedule(top.raw("schedule"));

    const Section em(top.raw("emission"), "emission",
                     {"t_end_ns", "initial", "adiabatic_threshold", "allow_nonadiabatic", "max_plus_eff_fraction",
                      "hold_minus_eff", "equalize", "equalize_tolerance", "wigner", "spectrum", "kernel"});
    const Section mem(top.raw("memory"), "memory",
                      {"pulse_center_ps", "pulse_fwhm_ps", "mean_photons", "delta_absorb_ueV", "store_duration_ps",
                       "store_offset_ps", "release", "release_time_ns", "release_duration_ps", "delta_release_ueV",
                       "t_end_ns", "adiabatic_threshold", "allow_nonadiabatic"});
    const Section spec(top.raw("spectral"), "spectral", {"delta_over_kappa_max", "points"});
    const Section scan(top.raw("scan"), "scan", {"bandwidth_ueV", "timing_offsets_ps"});
    if (c.kind != ScenarioKind::Emission && em.present())
        throw ConfigError("'emission' section is only valid for kind: emission", em.line());
    if (c.kind != ScenarioKind::Memory && (mem.present() || scan.present()))
        throw ConfigError("'memory' and 'scan' sections are only valid for kind: memory",
                          mem.present() ? mem.line() : scan.line());
    if (c.kind == ScenarioKind::Memory && top.has("schedule"))
        throw ConfigError("memory scenarios build their own schedule from the 'memory' section",
                          line_of(top.raw("schedule")));

    // cavity
    const std::string cavity = phys.text("cavity", phys.has("cavity_offset_ueV") ? "offset" : "omega0_minus_omega12");
    if (phys.has("cavity_offset_ueV") && cavity != "offset")
        throw ConfigError("physics.cavity and physics.cavity_offset_ueV are mutually exclusive", phys.line());
    c.cavity_rule = cavity;
    if (cavity == "offset") {
        p.omega_c = units::ueV(phys.number("cavity_offset_ueV"));
    } else if (cavity == "omega0_minus_omega12") {
        p.omega_c = -p.omega12;
    } else if (cavity == "final_minus_eff") {
        if (c.kind != ScenarioKind::Emission)
            throw ConfigError("physics.cavity = final_minus_eff needs an emission schedule", phys.line());
        p.omega_c = hybrid_eigenstates(p, sched.delta12.value(em.number("t_end_ns", 0.0)))
                        .omega_minus_eff;
    } else {
        throw ConfigError("physics.cavity must be omega0_minus_omega12, final_minus_eff or offset",
                          line_of(phys.raw("cavity")));
    }
    try {
        validate(p);
    } catch (const ValidationError& e) {
        throw ConfigError(e.what(), phys.line());
    }

    if (c.kind == ScenarioKind::Spectral) {
        c.spectral.delta_over_kappa_max = spec.number("delta_over_kappa_max", c.spectral.delta_over_kappa_max);
        const double pts = spec.number("points", static_cast<double>(c.spectral.points));
        if (pts < 2 || pts != std::floor(pts)) throw ConfigError("spectral.points must be an integer >= 2", spec.line());
        c.spectral.points = static_cast<std::size_t>(pts);
        if (!(c.spectral.delta_over_kappa_max > 0))
            throw ConfigError("spectral.delta_over_kappa_max must be > 0", spec.line());
    }

    if (c.kind == ScenarioKind::Emission) {
        EmissionScenario& e = c.emission;
        e.name = c.name;
        e.params = p;
        e.integrator = is;
        e.schedule = sched;
        e.schedule.t_end = em.number("t_end_ns");
        if (em.boolean("hold_minus_eff", false)) e.schedule.hold_minus_eff = p.omega12;
        try {
            e.schedule.validate();
        } catch (const ValidationError& ex) {
            throw ConfigError(ex.what(), line_of(top.raw("schedule")));
        }
        const std::string init = em.text("initial", "dark");
        if (init == "dark") e.initial = SingleExcitationState::dark();
        else if (init == "bright") e.initial = SingleExcitationState::bright();
        else if (init == "cavity") e.initial = SingleExcitationState::photon();
        else if (init == "minus_eff") e.initial = SingleExcitationState::minus_eff(p, e.schedule.delta12.value(0.0));
        else throw ConfigError("emission.initial must be dark, bright, cavity or minus_eff", line_of(em.raw("initial")));
        e.adiabatic_threshold = em.number("adiabatic_threshold", e.adiabatic_threshold);
        e.allow_nonadiabatic = em.boolean("allow_nonadiabatic", false);
        e.max_plus_eff_fraction = em.number("max_plus_eff_fraction", e.max_plus_eff_fraction);
        c.equalize = em.boolean("equalize", false);
        c.equalize_tolerance = em.number("equalize_tolerance", c.equalize_tolerance);
        e.outputs.kernel = em.boolean("kernel", false);
        if (em.has("spectrum")) {
            const Section s(em.raw("spectrum"), "emission.spectrum", {"center_ueV", "span_ueV", "points"});
            const double center = s.has("center_ueV") ? units::ueV(s.number("center_ueV")) : p.omega_c;
            const double span = units::ueV(s.number("span_ueV", 20.0));
            const double pts = s.number("points", 2001);
            if (!(span > 0) || pts < 2) throw ConfigError("emission.spectrum needs span_ueV > 0 and points >= 2", s.line());
            const auto n = static_cast<std::size_t>(pts);
            for (std::size_t i = 0; i < n; ++i)
                e.outputs.spectrum_grid.push_back(center - 0.5 * span + span * static_cast<double>(i) / static_cast<double>(n - 1));
            e.outputs.spectrum = true;
        }
        if (em.has("wigner")) {
            const Section s(em.raw("wigner"), "emission.wigner", {"center_ueV", "span_ueV", "points", "t_stride"});
            const double center = s.has("center_ueV") ? units::ueV(s.number("center_ueV")) : p.omega_c;
            const double span = units::ueV(s.number("span_ueV", 20.0));
            const double pts = s.number("points", 401);
            const double stride = s.number("t_stride", 1);
            if (!(span > 0) || pts < 2 || stride < 1)
                throw ConfigError("emission.wigner needs span_ueV > 0, points >= 2, t_stride >= 1", s.line());
            e.outputs.wigner_options.omega_min = center - 0.5 * span;
            e.outputs.wigner_options.omega_max = center + 0.5 * span;
            e.outputs.wigner_options.n_omega = static_cast<std::size_t>(pts);
            e.outputs.wigner_options.t_stride = static_cast<std::size_t>(stride);
            e.outputs.wigner = true;
        }
    }

    if (c.kind == ScenarioKind::Memory) {
        MemoryScenario& m = c.memory;
        m.name = c.name;
        m.params = p;
        m.integrator = is;
        m.pulse_center = units::ps_to_ns(mem.number("pulse_center_ps", units::ns_to_ps(m.pulse_center)));
        m.pulse_fwhm = units::ps_to_ns(mem.number("pulse_fwhm_ps", units::ns_to_ps(m.pulse_fwhm)));
        m.mean_photons = mem.number("mean_photons", m.mean_photons);
        m.delta_absorb = units::ueV(mem.number("delta_absorb_ueV", units::angular_to_energy(m.delta_absorb)));
        m.store_duration = units::ps_to_ns(mem.number("store_duration_ps", units::ns_to_ps(m.store_duration)));
        m.store_offset = units::ps_to_ns(mem.number("store_offset_ps", 0.0));
        m.release = mem.boolean("release", true);
        m.release_time = mem.number("release_time_ns", m.release_time);
        m.release_duration = units::ps_to_ns(mem.number("release_duration_ps", units::ns_to_ps(m.release_duration)));
        m.delta_release = units::ueV(mem.number("delta_release_ueV", units::angular_to_energy(m.delta_release)));
        m.t_end = mem.number("t_end_ns", m.t_end);
        m.adiabatic_threshold = mem.number("adiabatic_threshold", m.adiabatic_threshold);
        m.allow_nonadiabatic = mem.boolean("allow_nonadiabatic", false);
        try {
            m.validate_scenario();
        } catch (const ValidationError& ex) {
            throw ConfigError(ex.what(), mem.line());
        }
        for (double v : parse_grid(scan, "bandwidth_ueV")) c.scan.bandwidth_grid.push_back(units::ueV(v));
        for (double v : scan.numbers("timing_offsets_ps")) c.scan.timing_offsets.push_back(units::ps_to_ns(v));
    }
    return c;
}

} // namespace detail

/// Parses scenario text into one resolved run per variant (one run when there are none).
inline std::vector<ScenarioConfig> parse_config(const std::string& text, const std::string& origin = "<text>") {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(origin + ": " + e.msg, e.mark.line + 1);
    }
    if (root && root.IsMap() && root["variants"]) {
        const YAML::Node variants = root["variants"];
        if (!variants.IsSequence() || variants.size() == 0)
            throw ConfigError("variants must be a non-empty list", detail::line_of(variants));
        std::vector<ScenarioConfig> out;
        std::set<std::string> names;
        for (const auto& v : variants) {
            const detail::Section vs(v, "variants", {"name", "set"});
            const std::string name = vs.text("name", "");
            if (name.empty() || !names.insert(name).second)
                throw ConfigError("each variant needs a unique name", vs.line());
            YAML::Node patched = YAML::Clone(root);
            patched.remove("variants");
            if (vs.has("set")) {
                const YAML::Node set = vs.raw("set");
                if (!set.IsMap()) throw ConfigError("variant 'set' must be a mapping", detail::line_of(set));
                for (const auto& kv : set)
                    detail::apply_patch(patched, kv.first.as<std::string>(), kv.second, detail::line_of(kv.first));
            }
            auto c = detail::resolve(patched, origin);
            c.variant = name;
            c.source = text;
            out.push_back(std::move(c));
        }
        return out;
    }
    auto c = detail::resolve(root, origin);
    c.source = text;
    return {c};
}

inline std::vector<ScenarioConfig> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

} // namespace duoatom
