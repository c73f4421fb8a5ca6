// dynamics.hpp — Time-domain engines: single-excitation amplitudes and the full master equation

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "duoatom/error.hpp"
#include "duoatom/ode.hpp"
#include "duoatom/operators.hpp"
#include "duoatom/params.hpp"
#include "duoatom/schedule.hpp"
#include "duoatom/spectral.hpp"

namespace duoatom {

// Amplitudes of |−,0⟩, |+,0⟩ and |gg,1⟩ (equivalently ⟨σ_a⟩, ⟨σ_s⟩, ⟨a⟩).
struct SingleExcitationState {
    cplx amp_a{0.0, 0.0};
    cplx amp_s{0.0, 0.0};
    cplx amp_cav{0.0, 0.0};

    double norm() const { return std::norm(amp_a) + std::norm(amp_s) + std::norm(amp_cav); }

    static SingleExcitationState dark() { return {1.0, 0.0, 0.0}; }
    static SingleExcitationState bright() { return {0.0, 1.0, 0.0}; }
    static SingleExcitationState photon() { return {0.0, 0.0, 1.0}; }

    /// |−⟩_eff = ν|−⟩ − μ|+⟩ at the given detuning.
    static SingleExcitationState minus_eff(const PhysicalParams& p, double delta12) {
        const auto h = hybrid_eigenstates(p, delta12);
        return {h.nu, -h.mu, 0.0};
    }
};

struct DensityMatrix {
    Eigen::MatrixXcd rho;
    int n_max{1};

    double trace() const { return rho.trace().real(); }
    double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const {
        const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    void validate(double tol = 1e-8) const {
        const HilbertSpace hs(n_max);
        if (rho.rows() != hs.dim() || rho.cols() != hs.dim())
            throw ValidationError("density matrix dimension does not match N_max");
        if (std::abs(trace() - 1.0) > tol) throw ValidationError("density matrix trace must be 1");
        if (hermiticity_error() > 1e-10) throw ValidationError("density matrix must be Hermitian");
        if (min_eigenvalue() < -tol) throw ValidationError("density matrix must be positive semidefinite");
    }

    static DensityMatrix ground(int n_max) {
        const HilbertSpace hs(n_max);
        DensityMatrix d{Eigen::MatrixXcd::Zero(hs.dim(), hs.dim()), n_max};
        d.rho(0, 0) = 1.0;
        return d;
    }

    /// Pure single-excitation state, with any missing norm put in |gg,0⟩.
    static DensityMatrix from_amplitudes(const SingleExcitationState& s, int n_max) {
        const HilbertSpace hs(n_max);
        const double norm = s.norm();
        if (norm > 1.0 + 1e-9) throw ValidationError("single-excitation state norm exceeds 1");
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(hs.dim());
        const double r = 1.0 / std::sqrt(2.0);
        // |−⟩ = (|eg⟩ − |ge⟩)/√2, |+⟩ = (|eg⟩ + |ge⟩)/√2
        psi[hs.index(1, 0, 0)] = r * (s.amp_s + s.amp_a);
        psi[hs.index(0, 1, 0)] = r * (s.amp_s - s.amp_a);
        psi[hs.index(0, 0, 1)] = s.amp_cav;
        DensityMatrix d{psi * psi.adjoint(), n_max};
        d.rho(0, 0) += std::max(0.0, 1.0 - norm);
        return d;
    }
};

enum class TrajectorySource { Amplitudes, Master };

struct Trajectory {
    TrajectorySource source{TrajectorySource::Amplitudes};
    bool driven{false};
    double kappa{0.0};
    double initial_excitation{0.0};

    std::vector<double> t;
    std::vector<double> pop_s;         // ⟨σ_s†σ_s⟩
    std::vector<double> pop_a;         // ⟨σ_a†σ_a⟩
    std::vector<double> pop_cavity;    // ⟨a†a⟩
    std::vector<double> pop_minus_eff; // population of |−⟩_eff (atomic projector)
    std::vector<double> pop_plus_eff;
    std::vector<double> power;         // κ⟨a†a⟩
    std::vector<cplx> field;           // ⟨a⟩ (the cavity amplitude for single-excitation runs)
    std::vector<SingleExcitationState> amplitudes; // single-excitation runs only

    // cumulative quanta since t = 0
    std::vector<double> emitted_cavity; // ∫κ⟨a†a⟩
    std::vector<double> leaked;         // ∫γ₊⟨σ_s†σ_s⟩ + γ₋⟨σ_a†σ_a⟩
    std::vector<double> input;          // ∫|E|²/κ (driven runs)
    std::vector<double> output;         // ∫⟨a_out†a_out⟩ (driven runs)

    ode::Stats stats;

    std::size_t size() const { return t.size(); }
    double dt() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
    double atomic(std::size_t i) const { return pop_s[i] + pop_a[i]; }
    double excitation(std::size_t i) const { return pop_s[i] + pop_a[i] + pop_cavity[i]; }

    void reserve(std::size_t n) {
        for (auto* v : {&t, &pop_s, &pop_a, &pop_cavity, &pop_minus_eff, &pop_plus_eff, &power,
                        &emitted_cavity, &leaked, &input, &output})
            v->reserve(n);
        field.reserve(n);
    }
};

struct IntegratorSettings {
    double rtol{1e-9};
    double atol{1e-12};
    double sample_dt{0.01}; // ns
    int n_max{1};
};

namespace detail {

inline std::pair<double, double> eff_populations(const PhysicalParams& p, double delta12, cplx amp_a, cplx amp_s) {
    const auto h = hybrid_eigenstates(p, delta12);
    return {std::norm(h.nu * amp_a - h.mu * amp_s), std::norm(h.mu * amp_a + h.nu * amp_s)};
}

} // namespace detail

/// Closed single-excitation evolution i∂ₜv = M(t)v for v = (⟨σ_a⟩, ⟨σ_s⟩, ⟨a⟩).
inline Trajectory integrate_amplitudes(const PhysicalParams& p, const ControlSchedule& ctrl,
                                       const SingleExcitationState& init, const IntegratorSettings& settings = {}) {
    validate(p);
    ctrl.validate();
    if (ctrl.driven()) throw ValidationError("the amplitude equations have no drive term; use integrate_master");
    const double norm0 = init.norm();
    if (norm0 > 1.0 + 1e-9) throw ValidationError("initial single-excitation norm exceeds 1");

    const double sq2g = std::sqrt(2.0) * p.g;
    const double gp = p.gamma_plus(), gm = p.gamma_minus();
    // state: 3 amplitudes + 3 accumulators (cavity, leak via σ_s, leak via σ_a)
    auto rhs = [&](double t, const ode::State& y, ode::State& dy) {
        const double delta = ctrl.delta12.value(t);
        const double w = ctrl.omega0_at(t);
        const cplx ca = y[0], cs = y[1], cc = y[2];
        dy.resize(6);
        dy[0] = -I * ((-p.omega12 + w - 0.5 * I * gm) * ca + delta * cs);
        dy[1] = -I * (delta * ca + (p.omega12 + w - 0.5 * I * gp) * cs - I * sq2g * cc);
        dy[2] = -I * (I * sq2g * cs + (p.omega_c - 0.5 * I * p.kappa) * cc);
        dy[3] = p.kappa * std::norm(cc);
        dy[4] = gp * std::norm(cs);
        dy[5] = gm * std::norm(ca);
    };

    ode::State y0(6);
    y0 << init.amp_a, init.amp_s, init.amp_cav, 0.0, 0.0, 0.0;

    const auto grid = ode::uniform_grid(ctrl.t_end, settings.sample_dt);
    Trajectory tr;
    tr.source = TrajectorySource::Amplitudes;
    tr.kappa = p.kappa;
    tr.initial_excitation = norm0;
    tr.reserve(grid.size());
    tr.amplitudes.reserve(grid.size());

    auto observe = [&](std::size_t, double t, const ode::State& y) {
        const SingleExcitationState s{y[0], y[1], y[2]};
        const double n = s.norm();
        if (n > norm0 + 1e-6)
            throw IntegrationError("single-excitation norm grew by " + std::to_string(n - norm0) + " at t = " +
                                   std::to_string(t) + " ns; integrator misconfigured");
        const auto [pm, pp] = detail::eff_populations(p, ctrl.delta12.value(t), s.amp_a, s.amp_s);
        tr.t.push_back(t);
        tr.pop_a.push_back(std::norm(s.amp_a));
        tr.pop_s.push_back(std::norm(s.amp_s));
        tr.pop_cavity.push_back(std::norm(s.amp_cav));
        tr.pop_minus_eff.push_back(pm);
        tr.pop_plus_eff.push_back(pp);
        tr.power.push_back(p.kappa * std::norm(s.amp_cav));
        tr.field.push_back(s.amp_cav);
        tr.amplitudes.push_back(s);
        tr.emitted_cavity.push_back(y[3].real());
        tr.leaked.push_back(y[4].real() + y[5].real());
        tr.input.push_back(0.0);
        tr.output.push_back(y[3].real());
    };

    ode::Dopri5 solver(rhs, {settings.rtol, settings.atol});
    const auto bps = ctrl.breakpoints();
    solver.integrate(y0, 0.0, ctrl.t_end, grid, bps, observe);
    tr.stats = solver.stats();
    return tr;
}

struct MasterOptions {
    bool keep_states{false};   // store ρ at every sample
    bool check_physical{true}; // trace / Hermiticity / positivity at every sample
};

struct MasterResult {
    Trajectory trajectory;
    DensityMatrix final_state;
    std::vector<Eigen::MatrixXcd> states; // filled if keep_states
};

namespace detail {

// Atomic projector |v⟩⟨v| ⊗ 1 expectation for v = x|−⟩ + y|+⟩.
inline double atomic_projection(const HilbertSpace& hs, const Eigen::MatrixXcd& rho, double x, double y) {
    const double r = 1.0 / std::sqrt(2.0);
    const double c_eg = r * (y + x), c_ge = r * (y - x);
    double acc = 0.0;
    for (int n = 0; n < hs.fock(); ++n) {
        const int i = hs.index(1, 0, n), j = hs.index(0, 1, n);
        acc += (c_eg * c_eg * rho(i, i) + c_ge * c_ge * rho(j, j) + c_eg * c_ge * (rho(i, j) + rho(j, i))).real();
    }
    return acc;
}

inline int max_excitation(const HilbertSpace& hs, const Eigen::MatrixXcd& rho) {
    int m = 0;
    for (int i = 0; i < hs.dim(); ++i)
        if (std::abs(rho(i, i)) > 1e-14) m = std::max(m, hs.excitations(i));
    return m;
}

} // namespace detail

/// Lindblad evolution of the full truncated system, drive permitted.
inline MasterResult integrate_master(const PhysicalParams& p, const ControlSchedule& ctrl, const DensityMatrix& init,
                                     const IntegratorSettings& settings = {1e-8, 1e-12, 0.01, 1},
                                     const MasterOptions& opts = {}) {
    validate(p);
    ctrl.validate();
    init.validate();
    if (init.n_max != settings.n_max) throw ValidationError("initial state truncation differs from settings.n_max");

    const HilbertSpace hs(settings.n_max);
    const int dim = hs.dim();
    const LindbladGenerator gen(p, hs);
    const auto& parts = gen.parts();
    const Eigen::MatrixXcd n_op = parts.a.adjoint() * parts.a;
    const Eigen::MatrixXcd s_op = parts.sigma_s.adjoint() * parts.sigma_s;
    const Eigen::MatrixXcd a_op = parts.sigma_a.adjoint() * parts.sigma_a;
    const Eigen::MatrixXcd& a = parts.a;

    // Truncation is exact without drive when no basis state above N_max photons can be reached.
    const bool check_top_fock = ctrl.driven() || detail::max_excitation(hs, init.rho) > settings.n_max;

    const Eigen::Index nrho = static_cast<Eigen::Index>(dim) * dim;
    // state: vec(ρ) + accumulators (cavity emission, leak, input, output)
    Eigen::MatrixXcd drho(dim, dim);
    auto rhs = [&](double t, const ode::State& y, ode::State& dy) {
        dy.resize(nrho + 4);
        const Eigen::Map<const Eigen::MatrixXcd> rho(y.data(), dim, dim);
        gen.apply(ctrl, t, rho, drho);
        Eigen::Map<Eigen::MatrixXcd>(dy.data(), dim, dim) = drho;
        const double ncav = (n_op.cwiseProduct(rho.transpose())).sum().real();
        const double ns = (s_op.cwiseProduct(rho.transpose())).sum().real();
        const double na = (a_op.cwiseProduct(rho.transpose())).sum().real();
        const cplx afield = (a.cwiseProduct(rho.transpose())).sum();
        const cplx ec = HamiltonianParts::drive_amplitude(ctrl, t);
        dy[nrho] = p.kappa * ncav;
        dy[nrho + 1] = p.gamma_plus() * ns + p.gamma_minus() * na;
        dy[nrho + 2] = p.kappa > 0 ? std::norm(ec) / p.kappa : 0.0;
        dy[nrho + 3] = (p.kappa > 0 ? std::norm(ec) / p.kappa : 0.0) + p.kappa * ncav +
                       2.0 * (std::conj(ec) * afield).real();
    };

    ode::State y0 = ode::State::Zero(nrho + 4);
    Eigen::Map<Eigen::MatrixXcd>(y0.data(), dim, dim) = init.rho;
    const double trace0 = init.trace();

    const auto grid = ode::uniform_grid(ctrl.t_end, settings.sample_dt);
    MasterResult res;
    Trajectory& tr = res.trajectory;
    tr.source = TrajectorySource::Master;
    tr.driven = ctrl.driven();
    tr.kappa = p.kappa;
    tr.initial_excitation = ((n_op + s_op + a_op) * init.rho).trace().real();
    tr.reserve(grid.size());
    if (opts.keep_states) res.states.reserve(grid.size());

    auto observe = [&](std::size_t, double t, const ode::State& y) {
        const Eigen::Map<const Eigen::MatrixXcd> rho(y.data(), dim, dim);
        if (opts.check_physical) {
            const double tr_now = rho.trace().real();
            if (std::abs(tr_now - trace0) > 1e-6)
                throw IntegrationError("trace drifted by " + std::to_string(tr_now - trace0) + " at t = " +
                                       std::to_string(t) + " ns");
            const DensityMatrix dm{rho, settings.n_max};
            if (dm.hermiticity_error() > 1e-10)
                throw IntegrationError("density matrix lost Hermiticity at t = " + std::to_string(t) + " ns");
            if (dm.min_eigenvalue() < -1e-8)
                throw IntegrationError("density matrix lost positivity at t = " + std::to_string(t) + " ns");
        }
        if (check_top_fock) {
            double top = 0.0;
            for (int e = 0; e < 4; ++e) top += rho(e * hs.fock() + settings.n_max, e * hs.fock() + settings.n_max).real();
            if (top > 1e-6)
                throw TruncationError("population " + std::to_string(top) + " in the top Fock state at t = " +
                                      std::to_string(t) + " ns; raise n_max");
        }
        const double delta = ctrl.delta12.value(t);
        const auto h = hybrid_eigenstates(p, delta);
        const double ncav = (n_op * rho).trace().real();
        tr.t.push_back(t);
        tr.pop_s.push_back((s_op * rho).trace().real());
        tr.pop_a.push_back((a_op * rho).trace().real());
        tr.pop_cavity.push_back(ncav);
        tr.pop_minus_eff.push_back(detail::atomic_projection(hs, rho, h.nu, -h.mu));
        tr.pop_plus_eff.push_back(detail::atomic_projection(hs, rho, h.mu, h.nu));
        tr.power.push_back(p.kappa * ncav);
        tr.field.push_back((a * rho).trace());
        tr.emitted_cavity.push_back(y[nrho].real());
        tr.leaked.push_back(y[nrho + 1].real());
        tr.input.push_back(y[nrho + 2].real());
        tr.output.push_back(y[nrho + 3].real());
        if (opts.keep_states) res.states.emplace_back(rho);
    };

    ode::Dopri5 solver(rhs, {settings.rtol, settings.atol});
    const auto bps = ctrl.breakpoints();
    const ode::State yend = solver.integrate(y0, 0.0, ctrl.t_end, grid, bps, observe);
    tr.stats = solver.stats();
    res.final_state = DensityMatrix{Eigen::Map<const Eigen::MatrixXcd>(yend.data(), dim, dim), settings.n_max};
    return res;
}

struct AdiabaticityReport {
    double max_ratio{0.0}; // max |dΔ₁₂/dt| / Ω₁₂²
    double at_time{0.0};
    double threshold{0.1};
    bool pass{true};
};

/// Scans |Δ̇₁₂|/Ω₁₂² over [0, t_end] on a dense grid plus every analytic slope extremum and kink.
inline AdiabaticityReport adiabaticity_check(const ControlSchedule& ctrl, const PhysicalParams& p,
                                             double threshold = 0.1) {
    AdiabaticityReport rep;
    rep.threshold = threshold;
    std::vector<double> probes = ode::uniform_grid(ctrl.t_end, ctrl.t_end / 20000.0);
    for (double k : ctrl.delta12.kinks()) probes.push_back(k);
    for (double k : ctrl.delta12.slope_extrema()) probes.push_back(k);
    const double om2 = p.omega12 * p.omega12;
    for (double t : probes) {
        if (t < 0 || t > ctrl.t_end) continue;
        const double slope = std::abs(ctrl.delta12.derivative(t));
        if (slope == 0.0) continue;
        const double ratio = om2 > 0 ? slope / om2 : std::numeric_limits<double>::infinity();
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.at_time = t;
        }
    }
    rep.pass = rep.max_ratio <= threshold;
    return rep;
}

} // namespace duoatom
