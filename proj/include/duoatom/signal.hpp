// signal.hpp — Field observables: two-time correlations, Wigner–Ville map, energy spectral density

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "duoatom/dynamics.hpp"
#include "duoatom/error.hpp"
#include "duoatom/ode.hpp"
#include "duoatom/operators.hpp"

namespace duoatom {

// C(t₁, t₂) = ⟨a†(t₁) a(t₂)⟩ on a uniform grid t_k = k·dt, k = 0..N−1.
struct CorrelationKernel {
    Eigen::MatrixXcd C;
    double dt{0.0};
    bool rank_one{false};
    Eigen::VectorXcd amplitude; // C = conj(f)·fᵀ when rank_one

    Eigen::Index size() const { return C.rows(); }
    double window() const { return dt * static_cast<double>(std::max<Eigen::Index>(size() - 1, 0)); }
    double time(Eigen::Index k) const { return dt * static_cast<double>(k); }
    double hermiticity_error() const { return (C - C.adjoint()).cwiseAbs().maxCoeff(); }
};

/// Rank-one kernel conj(a(t₁))·a(t₂) of a single-excitation amplitude run.
inline CorrelationKernel correlation_single_excitation(const Trajectory& traj) {
    if (traj.source != TrajectorySource::Amplitudes || traj.driven)
        throw ValidationError("rank-one correlation requires an undriven single-excitation amplitude trajectory");
    const auto n = static_cast<Eigen::Index>(traj.size());
    Eigen::VectorXcd f(n);
    for (Eigen::Index k = 0; k < n; ++k) f[k] = traj.field[static_cast<std::size_t>(k)];
    CorrelationKernel k;
    k.C = f.conjugate() * f.transpose();
    k.dt = traj.dt();
    k.rank_one = true;
    k.amplitude = f;
    return k;
}

/// Runs `task(i)` for i in [0, n) on up to `workers` threads. Each index is
/// processed exactly once, so results written per index do not depend on the worker count.
template <class Task>
void parallel_for(std::size_t n, unsigned workers, Task&& task) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n;
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Two-time correlation from the master equation via the quantum regression theorem:
/// ⟨a†(t₂)a(t₁)⟩ = Tr[a† Λ(t₂,t₁)(aρ(t₁))] for t₂ ≥ t₁, the rest by Hermitian symmetry.
inline CorrelationKernel quantum_regression(const PhysicalParams& p, const ControlSchedule& ctrl,
                                            const DensityMatrix& init, const IntegratorSettings& settings,
                                            unsigned workers = 1) {
    MasterOptions mo;
    mo.keep_states = true;
    const MasterResult base = integrate_master(p, ctrl, init, settings, mo);
    const auto& grid = base.trajectory.t;
    const auto n = static_cast<Eigen::Index>(grid.size());
    const HilbertSpace hs(settings.n_max);
    const int dim = hs.dim();
    const Eigen::MatrixXcd a = hs.cavity();
    const Eigen::MatrixXcd adag = a.adjoint();
    const auto bps = ctrl.breakpoints();

    CorrelationKernel k;
    k.C = Eigen::MatrixXcd::Zero(n, n);
    k.dt = base.trajectory.dt();

    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t i1) {
        const LindbladGenerator gen(p, hs);
        Eigen::MatrixXcd out(dim, dim);
        auto rhs = [&](double t, const ode::State& y, ode::State& dy) {
            dy.resize(y.size());
            gen.apply(ctrl, t, Eigen::Map<const Eigen::MatrixXcd>(y.data(), dim, dim), out);
            Eigen::Map<Eigen::MatrixXcd>(dy.data(), dim, dim) = out;
        };
        const Eigen::MatrixXcd x0 = a * base.states[i1];
        const double scale = x0.cwiseAbs().maxCoeff();
        if (scale == 0.0) return; // nothing to propagate: the column stays zero
        ode::State y = Eigen::Map<const ode::State>(x0.data(), x0.size());
        std::vector<double> samples(grid.begin() + static_cast<std::ptrdiff_t>(i1), grid.end());
        const auto col = static_cast<Eigen::Index>(i1);
        auto observe = [&](std::size_t j, double, const ode::State& yy) {
            const Eigen::Map<const Eigen::MatrixXcd> x(yy.data(), dim, dim);
            const cplx v = adag.cwiseProduct(x.transpose()).sum(); // Tr[a† X]
            const Eigen::Index row = col + static_cast<Eigen::Index>(j);
            k.C(row, col) = v;
            k.C(col, row) = std::conj(v);
        };
        // absolute tolerance scaled to the size of aρ(t₁)
        ode::Dopri5 solver(rhs, {settings.rtol, std::min(settings.atol, 1e-3 * settings.rtol * scale)});
        solver.integrate(y, grid[i1], grid.back(), samples, bps, observe);
    });
    return k;
}

// Real chronocyclic map W(t, ω), frequencies relative to ω₀_ref in rad/ns.
struct TimeFrequencyMap {
    std::vector<double> t;
    std::vector<double> omega;
    Eigen::MatrixXd W; // rows: time, cols: frequency
    double max_imag_residue{0.0}; // max |Im W| / max |W|

    double d_omega() const { return omega.size() > 1 ? omega[1] - omega[0] : 0.0; }
};

struct WignerOptions {
    // empty range: the full τ-conjugate grid (2N points spanning ±π/dt)
    double omega_min{0.0};
    double omega_max{0.0};
    std::size_t n_omega{0};
    std::size_t t_stride{1};
    std::size_t min_samples_per_feature{8};
};

namespace detail {

// Narrowest FWHM (in samples) among the peaks of the photon-number profile above 10% of its maximum.
inline std::size_t narrowest_feature(const CorrelationKernel& k) {
    const auto n = k.size();
    std::vector<double> d(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = k.C(i, i).real();
    const double peak = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
    if (!(peak > 0)) return std::numeric_limits<std::size_t>::max();
    std::size_t narrowest = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const bool is_peak = d[i] >= 0.1 * peak && (i == 0 || d[i] > d[i - 1]) && (i + 1 == d.size() || d[i] >= d[i + 1]);
        if (!is_peak) continue;
        const double half = 0.5 * d[i];
        std::size_t lo = i, hi = i;
        while (lo > 0 && d[lo - 1] >= half) --lo;
        while (hi + 1 < d.size() && d[hi + 1] >= half) ++hi;
        narrowest = std::min(narrowest, hi - lo + 1);
    }
    return narrowest;
}

} // namespace detail

/// W(t,ω) = (1/2π)∫dτ C(t+τ/2, t−τ/2) e^{−iωτ} with |τ|/2 ≤ min(t, T−t).
/// Lags are sampled at multiples of dt; odd multiples land half-way between grid
/// nodes and are interpolated bilinearly.
inline TimeFrequencyMap wigner_ville(const CorrelationKernel& k, const WignerOptions& opts = {}) {
    const Eigen::Index n = k.size();
    if (n < 2 || !(k.dt > 0)) throw ValidationError("kernel needs at least two samples on a uniform grid");
    if (opts.t_stride == 0) throw ValidationError("t_stride must be >= 1");
    const double dt = k.dt;

    TimeFrequencyMap map;
    // The default grid is exactly the 2N-point DFT of the lag sequence (shifted by π/dt), so it goes through an FFT.
    const bool conjugate = opts.n_omega == 0 || !(opts.omega_max > opts.omega_min);
    if (conjugate) {
        const std::size_t m = 2 * static_cast<std::size_t>(n);
        const double dw = 2.0 * units::pi / (static_cast<double>(m) * dt);
        for (std::size_t j = 0; j < m; ++j)
            map.omega.push_back(-units::pi / dt + dw * static_cast<double>(j));
    } else {
        const double dw = (opts.omega_max - opts.omega_min) / static_cast<double>(std::max<std::size_t>(opts.n_omega - 1, 1));
        for (std::size_t j = 0; j < opts.n_omega; ++j) map.omega.push_back(opts.omega_min + dw * static_cast<double>(j));
    }
    for (Eigen::Index i = 0; i < n; i += static_cast<Eigen::Index>(opts.t_stride)) map.t.push_back(k.time(i));
    map.W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(map.t.size()), static_cast<Eigen::Index>(map.omega.size()));

    const double cmax = k.C.cwiseAbs().maxCoeff();
    if (!(cmax > 0)) return map;
    if (detail::narrowest_feature(k) < opts.min_samples_per_feature)
        throw ResolutionError("time grid too coarse: fewer than " + std::to_string(opts.min_samples_per_feature) +
                              " samples across the shortest emission feature; reduce the sample step");

    auto sample = [&](Eigen::Index i, long m) -> cplx {
        // C(t_i + m·dt/2, t_i − m·dt/2)
        if (m % 2 == 0) return k.C(i + m / 2, i - m / 2);
        // row coordinate i + m/2 and column coordinate i − m/2 are both half-integers
        const double r = static_cast<double>(i) + 0.5 * static_cast<double>(m);
        const double c = static_cast<double>(i) - 0.5 * static_cast<double>(m);
        const auto r0 = static_cast<Eigen::Index>(std::floor(r)), c0 = static_cast<Eigen::Index>(std::floor(c));
        return 0.25 * (k.C(r0, c0) + k.C(r0 + 1, c0) + k.C(r0, c0 + 1) + k.C(r0 + 1, c0 + 1));
    };

    double wmax = 0.0, imax = 0.0;
    auto store = [&](std::size_t ti, std::size_t j, cplx v) {
        map.W(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(j)) = v.real();
        wmax = std::max(wmax, std::abs(v.real()));
        imax = std::max(imax, std::abs(v.imag()));
    };
    const double norm = dt / (2.0 * units::pi);
    Eigen::FFT<double> fft;
    const std::size_t len = 2 * static_cast<std::size_t>(n);
    std::vector<cplx> buf, spec;
    std::vector<cplx> r;
    for (std::size_t ti = 0; ti < map.t.size(); ++ti) {
        const auto i = static_cast<Eigen::Index>(ti * opts.t_stride);
        const long mmax = 2 * static_cast<long>(std::min(i, n - 1 - i));
        if (mmax == 0) continue; // zero-length lag window at the edges
        r.assign(static_cast<std::size_t>(2 * mmax + 1), cplx{});
        for (long m = -mmax; m <= mmax; ++m) {
            const double w = (m == -mmax || m == mmax) ? 0.5 : 1.0; // trapezoid in τ
            r[static_cast<std::size_t>(m + mmax)] = w * sample(i, m);
        }
        if (conjugate) {
            // e^{−iω_j m dt} = (−1)^m e^{−2πi jm/len} with ω_j = −π/dt + 2πj/(len·dt)
            buf.assign(len, cplx{});
            for (long m = -mmax; m <= mmax; ++m) {
                const auto slot = static_cast<std::size_t>((m % static_cast<long>(len) + static_cast<long>(len)) %
                                                           static_cast<long>(len));
                buf[slot] += (m % 2 == 0 ? 1.0 : -1.0) * r[static_cast<std::size_t>(m + mmax)];
            }
            fft.fwd(spec, buf);
            for (std::size_t j = 0; j < len; ++j) store(ti, j, norm * spec[j]);
            continue;
        }
        for (std::size_t j = 0; j < map.omega.size(); ++j) {
            const cplx z = std::exp(-I * map.omega[j] * dt);
            cplx acc = r[static_cast<std::size_t>(mmax)];
            cplx zp = z, zm = std::conj(z);
            for (long m = 1; m <= mmax; ++m) {
                acc += r[static_cast<std::size_t>(mmax + m)] * zp + r[static_cast<std::size_t>(mmax - m)] * zm;
                zp *= z;
                zm *= std::conj(z);
            }
            store(ti, j, norm * acc);
        }
    }
    map.max_imag_residue = wmax > 0 ? imax / wmax : 0.0;
    return map;
}

struct Spectrum {
    std::vector<double> omega;
    std::vector<double> S;
};

/// Full τ-conjugate frequency grid for a kernel: N points spanning [−π/dt, π/dt).
inline std::vector<double> conjugate_grid(const CorrelationKernel& k) {
    const auto n = static_cast<std::size_t>(k.size());
    const double dw = 2.0 * units::pi / (static_cast<double>(n) * k.dt);
    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j) g[j] = -units::pi / k.dt + dw * static_cast<double>(j);
    return g;
}

/// S(ω) = (1/2π)∬dt₁dt₂ C(t₁,t₂) e^{−iω(t₁−t₂)}; the sign matches the time integral of W.
inline Spectrum spectral_density(const CorrelationKernel& k, std::vector<double> omega = {}) {
    if (omega.empty()) omega = conjugate_grid(k);
    const Eigen::Index n = k.size();
    const auto m = static_cast<Eigen::Index>(omega.size());
    Spectrum s;
    s.S.resize(static_cast<std::size_t>(m));
    const double scale = k.dt * k.dt / (2.0 * units::pi);
    const bool rank_one = k.rank_one && k.amplitude.size() == n;
    Eigen::VectorXcd v(n);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double w = omega[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < n; ++i) v[i] = std::exp(I * w * k.time(i));
        // v^H C v, or |fᵀv|² for a rank-one kernel
        const double q = rank_one ? std::norm(k.amplitude.dot(v.conjugate())) : v.dot(k.C * v).real();
        s.S[static_cast<std::size_t>(j)] = scale * q;
    }
    s.omega = std::move(omega);
    return s;
}

/// Indices of strict local maxima of y above `floor`.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& y, double floor = -std::numeric_limits<double>::infinity()) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
        if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > floor) out.push_back(i);
    return out;
}

/// Parabolic refinement of a sampled maximum at index i of y(x) on a uniform grid.
inline double refine_peak(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
    if (i == 0 || i + 1 >= y.size()) return x[i];
    const double den = y[i - 1] - 2.0 * y[i] + y[i + 1];
    if (den == 0.0) return x[i];
    const double off = 0.5 * (y[i - 1] - y[i + 1]) / den;
    return x[i] + off * (x[i + 1] - x[i]);
}

/// Mean spacing of the local maxima of y(x) above rel_floor·max y, from a least-squares
/// line through the refined peak positions; NaN with fewer than three peaks.
inline double peak_spacing(const std::vector<double>& x, const std::vector<double>& y, double rel_floor,
                           std::size_t* count = nullptr) {
    const double top = *std::max_element(y.begin(), y.end());
    const auto idx = local_maxima(y, rel_floor * top);
    if (count) *count = idx.size();
    if (idx.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    double sk = 0, sp = 0, skk = 0, skp = 0;
    const double n = static_cast<double>(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double pk = refine_peak(x, y, idx[k]), kk = static_cast<double>(k);
        sk += kk;
        sp += pk;
        skk += kk * kk;
        skp += kk * pk;
    }
    return (n * skp - sk * sp) / (n * skk - sk * sk);
}

/// Separable Gaussian smoothing of a time-frequency map (widths in ns and rad/ns).
/// With σ_t·σ_ω ≥ 1/2 interference fringes are suppressed and only the lobes remain.
inline TimeFrequencyMap smooth_map(const TimeFrequencyMap& m, double sigma_t, double sigma_omega) {
    if (m.t.size() < 2 || m.omega.size() < 2) throw ValidationError("map too small to smooth");
    const double dt = m.t[1] - m.t[0], dw = m.d_omega();
    auto pass = [](const Eigen::MatrixXd& in, bool along_rows, double width) {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(in.rows(), in.cols());
        const Eigen::Index len = along_rows ? in.rows() : in.cols();
        const auto half = static_cast<Eigen::Index>(std::ceil(4.0 * width));
        std::vector<double> w(static_cast<std::size_t>(2 * half + 1));
        for (Eigen::Index q = -half; q <= half; ++q)
            w[static_cast<std::size_t>(q + half)] = std::exp(-0.5 * std::pow(static_cast<double>(q) / width, 2));
        for (Eigen::Index i = 0; i < in.rows(); ++i)
            for (Eigen::Index j = 0; j < in.cols(); ++j) {
                const Eigen::Index c = along_rows ? i : j;
                double acc = 0.0, norm = 0.0;
                for (Eigen::Index q = std::max(-half, -c); q <= std::min(half, len - 1 - c); ++q) {
                    const double g = w[static_cast<std::size_t>(q + half)];
                    acc += g * (along_rows ? in(i + q, j) : in(i, j + q));
                    norm += g;
                }
                out(i, j) = acc / norm;
            }
        return out;
    };
    TimeFrequencyMap s = m;
    s.W = pass(pass(m.W, true, sigma_t / dt), false, sigma_omega / dw);
    return s;
}

struct MapPeak {
    double value{0.0};
    double t{0.0};
    double omega{0.0};
};

/// Positive 8-neighbour local maxima of a map, largest first.
inline std::vector<MapPeak> map_maxima(const TimeFrequencyMap& m) {
    std::vector<MapPeak> out;
    const auto& W = m.W;
    for (Eigen::Index i = 1; i + 1 < W.rows(); ++i)
        for (Eigen::Index j = 1; j + 1 < W.cols(); ++j) {
            const double v = W(i, j);
            bool peak = v > 0;
            for (int a = -1; a <= 1 && peak; ++a)
                for (int b = -1; b <= 1 && peak; ++b)
                    if ((a || b) && W(i + a, j + b) > v) peak = false;
            if (peak) out.push_back({v, m.t[static_cast<std::size_t>(i)], m.omega[static_cast<std::size_t>(j)]});
        }
    std::sort(out.begin(), out.end(), [](const MapPeak& a, const MapPeak& b) { return a.value > b.value; });
    return out;
}

} // namespace duoatom
