// schedule.hpp — Time-dependent controls Δ₁₂(t), ω₀(t) and the drive envelope E_p(t)
//
// A Channel is a piecewise "level track" (const and raised-cosine ramp segments,
// each holding its final value until the next one starts) plus a sum of
// Gaussian pulses. Values and derivatives are analytic everywhere.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "duoatom/error.hpp"
#include "duoatom/units.hpp"

namespace duoatom {

struct Level {
    double start{0.0};
    double value{0.0};
};

// Raised-cosine transition from `from` to `to` over [start, start + duration].
// duration == 0 is a hard step.
struct Ramp {
    double start{0.0};
    double duration{0.0};
    double from{0.0};
    double to{0.0};
};

// peak · exp(−(t−center)²/(2σ²)), σ derived from the FWHM of the pulse itself.
struct Gauss {
    double center{0.0};
    double fwhm{0.0};
    double peak{0.0};

    double sigma() const { return units::fwhm_to_sigma(fwhm); }
};

using TrackSegment = std::variant<Level, Ramp>;

class Channel {
public:
    Channel() = default;

    Channel& add(const Level& s) { return add_track(s); }
    Channel& add(const Ramp& s) {
        if (!(s.duration >= 0)) throw ValidationError("ramp duration must be >= 0");
        return add_track(s);
    }
    Channel& add(const Gauss& s) {
        if (!(s.fwhm > 0)) throw ValidationError("gaussian pulse FWHM must be > 0");
        pulses_.push_back(s);
        return *this;
    }

    double value(double t) const {
        double v = track_value(t);
        for (const auto& g : pulses_) {
            const double x = (t - g.center) / g.sigma();
            v += g.peak * std::exp(-0.5 * x * x);
        }
        return v;
    }

    // Infinite at the instant of a hard step.
    double derivative(double t) const {
        double dv = track_derivative(t);
        for (const auto& g : pulses_) {
            const double s = g.sigma();
            const double x = (t - g.center) / s;
            dv += -g.peak * x / s * std::exp(-0.5 * x * x);
        }
        return dv;
    }

    bool empty() const { return track_.empty() && pulses_.empty(); }
    const std::vector<TrackSegment>& track() const { return track_; }
    const std::vector<Gauss>& pulses() const { return pulses_; }
    std::vector<Gauss>& pulses() { return pulses_; }

    // Times where the value or its derivative may be non-smooth.
    std::vector<double> kinks() const {
        std::vector<double> out;
        for (const auto& s : track_) {
            if (const auto* r = std::get_if<Ramp>(&s)) {
                out.push_back(r->start);
                out.push_back(r->start + r->duration);
            } else {
                out.push_back(std::get<Level>(s).start);
            }
        }
        return out;
    }

    // Candidate locations of slope extrema (ramp midpoints, Gaussian inflection points).
    std::vector<double> slope_extrema() const {
        std::vector<double> out;
        for (const auto& s : track_)
            if (const auto* r = std::get_if<Ramp>(&s)) out.push_back(r->start + 0.5 * r->duration);
        for (const auto& g : pulses_) {
            out.push_back(g.center - g.sigma());
            out.push_back(g.center + g.sigma());
        }
        return out;
    }

    Channel shifted(double t0) const {
        Channel c = *this;
        for (auto& s : c.track_) std::visit([t0](auto& seg) { seg.start += t0; }, s);
        for (auto& g : c.pulses_) g.center += t0;
        return c;
    }

    Channel scaled(double factor) const {
        Channel c = *this;
        for (auto& s : c.track_) {
            if (auto* r = std::get_if<Ramp>(&s)) {
                r->from *= factor;
                r->to *= factor;
            } else {
                std::get<Level>(s).value *= factor;
            }
        }
        for (auto& g : c.pulses_) g.peak *= factor;
        return c;
    }

    void describe(std::ostream& os) const {
        os.precision(17);
        for (const auto& s : track_) {
            if (const auto* r = std::get_if<Ramp>(&s))
                os << "ramp " << r->start << ' ' << r->duration << ' ' << r->from << ' ' << r->to << ';';
            else
                os << "const " << std::get<Level>(s).start << ' ' << std::get<Level>(s).value << ';';
        }
        for (const auto& g : pulses_) os << "gauss " << g.center << ' ' << g.fwhm << ' ' << g.peak << ';';
    }

private:
    template <class Seg>
    Channel& add_track(const Seg& s) {
        if (!std::isfinite(s.start)) throw ValidationError("segment start must be finite");
        track_.push_back(s);
        std::stable_sort(track_.begin(), track_.end(), [](const auto& a, const auto& b) {
            return std::visit([](const auto& x) { return x.start; }, a) <
                   std::visit([](const auto& x) { return x.start; }, b);
        });
        return *this;
    }

    // Index of the last segment with start <= t, or -1.
    long active(double t) const {
        long idx = -1;
        for (std::size_t i = 0; i < track_.size(); ++i) {
            const double s = std::visit([](const auto& x) { return x.start; }, track_[i]);
            if (s <= t) idx = static_cast<long>(i);
        }
        return idx;
    }

    double track_value(double t) const {
        const long i = active(t);
        if (i < 0) {
            if (!track_.empty())
                if (const auto* r = std::get_if<Ramp>(&track_.front())) return r->from;
            return 0.0;
        }
        const auto& s = track_[static_cast<std::size_t>(i)];
        if (const auto* l = std::get_if<Level>(&s)) return l->value;
        const auto& r = std::get<Ramp>(s);
        if (r.duration <= 0 || t >= r.start + r.duration) return r.to;
        const double x = (t - r.start) / r.duration;
        return r.from + (r.to - r.from) * 0.5 * (1.0 - std::cos(units::pi * x));
    }

    double track_derivative(double t) const {
        const long i = active(t);
        if (i < 0) return 0.0;
        const auto idx = static_cast<std::size_t>(i);
        const auto& s = track_[idx];
        const double start = std::visit([](const auto& x) { return x.start; }, s);
        if (t == start && jumps_at(idx)) return std::numeric_limits<double>::infinity();
        if (std::holds_alternative<Level>(s)) return 0.0;
        const auto& r = std::get<Ramp>(s);
        if (r.duration <= 0 || t >= r.start + r.duration) return 0.0;
        const double x = (t - r.start) / r.duration;
        return (r.to - r.from) * 0.5 * units::pi / r.duration * std::sin(units::pi * x);
    }

    // True if the track is discontinuous at the start of segment i.
    bool jumps_at(std::size_t i) const {
        const auto& s = track_[i];
        double initial = 0.0;
        if (const auto* l = std::get_if<Level>(&s)) {
            initial = l->value;
        } else {
            const auto& r = std::get<Ramp>(s);
            if (r.duration <= 0 && r.to != r.from) return true;
            initial = r.from;
        }
        // a first level starting at or before t = 0 is the initial condition
        if (i == 0) return std::holds_alternative<Level>(s) && std::get<Level>(s).start > 0 && initial != 0.0;
        return value_before(i) != initial;
    }

    double value_before(std::size_t i) const {
        const auto& s = track_[i - 1];
        if (const auto* l = std::get_if<Level>(&s)) return l->value;
        return std::get<Ramp>(s).to;
    }

    std::vector<TrackSegment> track_;
    std::vector<Gauss> pulses_;
};

struct ControlSchedule {
    Channel delta12; // Δ₁₂(t), rad/ns
    Channel omega0;  // ω₀(t) − ω₀_ref, rad/ns
    Channel drive;   // real envelope E_p(t), rad/ns
    double drive_carrier{0.0}; // drive frequency relative to ω₀_ref, rad/ns
    double t_end{0.0};         // ns
    // When > 0 (set to Ω₁₂), ω₀ additionally follows √(Δ₁₂²+Ω₁₂²) − Ω₁₂ so that
    // |−⟩_eff keeps the frequency it has at Δ₁₂ = 0 while Δ₁₂ is pulsed.
    double hold_minus_eff{0.0};

    void validate() const {
        if (!(t_end > 0) || !std::isfinite(t_end)) throw ValidationError("schedule horizon t_end must be > 0");
        if (!std::isfinite(drive_carrier)) throw ValidationError("drive carrier must be finite");
        if (!(hold_minus_eff >= 0) || !std::isfinite(hold_minus_eff))
            throw ValidationError("hold_minus_eff must be a finite Ω₁₂ >= 0");
    }

    // Total emitter shift w(t) = ω₀(t) − ω₀_ref.
    double omega0_at(double t) const {
        double w = omega0.value(t);
        if (hold_minus_eff > 0) {
            const double d = delta12.value(t);
            w += std::hypot(d, hold_minus_eff) - hold_minus_eff;
        }
        return w;
    }

    bool driven() const { return !drive.empty(); }

    // Sorted interior times where the integrator should restart.
    std::vector<double> breakpoints() const {
        std::vector<double> all;
        for (const Channel* c : {&delta12, &omega0, &drive})
            for (double k : c->kinks())
                if (k > 0 && k < t_end) all.push_back(k);
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        return all;
    }

    ControlSchedule shifted(double t0) const {
        ControlSchedule s = *this;
        s.delta12 = delta12.shifted(t0);
        s.omega0 = omega0.shifted(t0);
        s.drive = drive.shifted(t0);
        s.t_end = t_end + t0;
        return s;
    }

    std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        os << "t_end " << t_end << "|delta12:";
        delta12.describe(os);
        os << "|omega0:";
        omega0.describe(os);
        os << "|drive:";
        drive.describe(os);
        os << "|carrier " << drive_carrier;
        if (hold_minus_eff > 0) os << "|hold " << hold_minus_eff;
        return os.str();
    }

    // FNV-1a 64 of the canonical description.
    std::uint64_t checksum() const {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char ch : describe()) {
            h ^= ch;
            h *= 1099511628211ull;
        }
        return h;
    }
};

/// Envelope of a coherent input pulse: E_p(t) = √κ·α_in(t) with a Gaussian
/// intensity profile of the given FWHM and ∫|α_in|²dt = mean_photons.
inline Gauss coherent_pulse(double kappa, double center, double intensity_fwhm, double mean_photons) {
    if (!(intensity_fwhm > 0)) throw ValidationError("pulse FWHM must be > 0");
    if (!(mean_photons >= 0)) throw ValidationError("mean photon number must be >= 0");
    const double sigma_i = units::fwhm_to_sigma(intensity_fwhm);
    const double alpha_peak = std::sqrt(mean_photons / (sigma_i * std::sqrt(2.0 * units::pi)));
    // the amplitude profile is √2 wider than the intensity profile
    return Gauss{center, intensity_fwhm * std::sqrt(2.0), std::sqrt(kappa) * alpha_peak};
}

} // namespace duoatom
