// ode.hpp — Adaptive Dormand–Prince 5(4) integrator with 4th-order dense output
//
// The state is a complex vector. Output is delivered through an observer at
// caller-chosen sample times; integration restarts (fresh first stage) at every
// breakpoint so that kinks in the controls never fall inside a step.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "duoatom/error.hpp"

namespace duoatom::ode {

using State = Eigen::VectorXcd;
using Rhs = std::function<void(double t, const State& y, State& dydt)>;
using Observer = std::function<void(std::size_t index, double t, const State& y)>;

struct Options {
    double rtol{1e-9};
    double atol{1e-12};
    double h_max{std::numeric_limits<double>::infinity()};
    std::size_t max_steps{20'000'000};
};

struct Stats {
    std::size_t accepted{0};
    std::size_t rejected{0};
    std::size_t evaluations{0};
};

class Dopri5 {
public:
    Dopri5(Rhs rhs, Options opts) : rhs_(std::move(rhs)), opts_(opts) {
        if (!(opts_.rtol > 0) || !(opts_.atol > 0)) throw ValidationError("integrator tolerances must be > 0");
    }

    const Stats& stats() const { return stats_; }
    const Options& options() const { return opts_; }

    // Integrates y from t0 to t1. `samples` must be sorted and lie in [t0, t1];
    // `breakpoints` outside (t0, t1) are ignored. Returns y(t1).
    State integrate(State y, double t0, double t1, std::span<const double> samples,
                    std::span<const double> breakpoints, const Observer& observe) {
        if (!(t1 >= t0)) throw ValidationError("integration interval must satisfy t1 >= t0");
        std::vector<double> stops;
        for (double b : breakpoints)
            if (b > t0 && b < t1) stops.push_back(b);
        std::sort(stops.begin(), stops.end());
        stops.push_back(t1);

        std::size_t next = 0;
        while (next < samples.size() && samples[next] <= t0) {
            if (samples[next] == t0 && observe) observe(next, t0, y);
            ++next;
        }

        double t = t0;
        for (double stop : stops) {
            // a stop within rounding of the current time (grid times and breakpoints computed differently) is merged
            const double tiny = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(stop));
            if (stop - t <= tiny) continue;
            segment(y, t, stop, samples, next, observe);
            t = stop;
        }
        // samples sitting exactly on t1 that rounding may have left behind
        while (next < samples.size() && samples[next] <= t1) {
            if (observe) observe(next, samples[next], y);
            ++next;
        }
        return y;
    }

private:
    void eval(double t, const State& y, State& k) {
        rhs_(t, y, k);
        ++stats_.evaluations;
    }

    double error_norm(const State& err, const State& y0, const State& y1) const {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < err.size(); ++i) {
            const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            const double r = std::abs(err[i]) / sc;
            acc += r * r;
        }
        return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
    }

    double initial_step(const State& y, const State& f, double span) const {
        double d0 = 0.0, d1 = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = opts_.atol + opts_.rtol * std::abs(y[i]);
            d0 += std::pow(std::abs(y[i]) / sc, 2);
            d1 += std::pow(std::abs(f[i]) / sc, 2);
        }
        d0 = std::sqrt(d0 / static_cast<double>(y.size()));
        d1 = std::sqrt(d1 / static_cast<double>(y.size()));
        double h = (d0 < 1e-5 || d1 < 1e-5 || !std::isfinite(d0 / d1)) ? 1e-6 : 0.01 * d0 / d1;
        return std::min({h, span, opts_.h_max});
    }

    void segment(State& y, double t, double t_stop, std::span<const double> samples, std::size_t& next,
                 const Observer& observe) {
        // Butcher tableau
        constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                         a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                         a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                         b6 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                         e6 = 22.0 / 525, e7 = -1.0 / 40;
        // dense output
        constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                         d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                         d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

        const auto n = y.size();
        k1_.resize(n); k2_.resize(n); k3_.resize(n); k4_.resize(n);
        k5_.resize(n); k6_.resize(n); k7_.resize(n); tmp_.resize(n); ynew_.resize(n);

        eval(t, y, k1_);
        double h = initial_step(y, k1_, t_stop - t);
        bool last_rejected = false;

        while (t < t_stop) {
            if (stats_.accepted + stats_.rejected >= opts_.max_steps)
                throw IntegrationError("step budget exhausted at t = " + std::to_string(t));
            bool finishing = false;
            if (t + h >= t_stop || t + 1.01 * h >= t_stop) {
                h = t_stop - t;
                finishing = true;
            }
            const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
            if (h < h_min) {
                std::ostringstream os;
                os << "step size underflow at t = " << t << " ns (h = " << h
                   << "); the problem is too stiff for the requested tolerance";
                throw IntegrationError(os.str());
            }

            tmp_ = y + h * a21 * k1_;
            eval(t + c2 * h, tmp_, k2_);
            tmp_ = y + h * (a31 * k1_ + a32 * k2_);
            eval(t + c3 * h, tmp_, k3_);
            tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
            eval(t + c4 * h, tmp_, k4_);
            tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
            eval(t + c5 * h, tmp_, k5_);
            tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
            const double t_new = finishing ? t_stop : t + h;
            // a step ending on a breakpoint sees the controls' left limit there
            const double t_edge = finishing ? std::nextafter(t_stop, t) : t_new;
            eval(t_edge, tmp_, k6_);
            ynew_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
            eval(t_edge, ynew_, k7_);
            tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
            const double err = error_norm(tmp_, y, ynew_);

            if (!std::isfinite(err)) {
                ++stats_.rejected;
                h *= 0.2;
                last_rejected = true;
                continue;
            }
            if (err <= 1.0) {
                ++stats_.accepted;
                // dense output on (t, t_new]
                if (next < samples.size() && samples[next] <= t_new) {
                    const State r1 = y;
                    const State r2 = ynew_ - y;
                    const State r3 = h * k1_ - r2;
                    const State r4 = r2 - h * k7_ - r3;
                    const State r5 = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);
                    while (next < samples.size() && samples[next] <= t_new) {
                        const double s = samples[next];
                        if (s == t_new) {
                            if (observe) observe(next, s, ynew_);
                        } else {
                            const double th = (s - t) / h;
                            const double th1 = 1.0 - th;
                            tmp_ = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
                            if (observe) observe(next, s, tmp_);
                        }
                        ++next;
                    }
                }
                t = t_new;
                y.swap(ynew_);
                k1_.swap(k7_);
                double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
                fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
                h = std::min(h * fac, opts_.h_max);
                last_rejected = false;
            } else {
                ++stats_.rejected;
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                last_rejected = true;
            }
        }
    }

    Rhs rhs_;
    Options opts_;
    Stats stats_;
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
};

/// Uniform grid 0, dt, 2dt, ... covering [0, t_end] (last point clipped to t_end
/// only if it lands within rounding of it).
inline std::vector<double> uniform_grid(double t_end, double dt) {
    if (!(dt > 0) || !(t_end >= 0)) throw ValidationError("sample grid needs dt > 0 and t_end >= 0");
    const auto n = static_cast<std::size_t>(std::floor(t_end / dt * (1.0 + 1e-12))) + 1;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<double>(i) * dt;
    return g;
}

} // namespace duoatom::ode
