#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "duoatom/dynamics.hpp"
#include "oracles.hpp"

using namespace duoatom;

namespace {

PhysicalParams small_params() {
    // smaller κ keeps the matrix-exponential oracle well conditioned
    return params_from_ueV(20.0, 100.0, 0.6, 31.0, 0.99, -25.0);
}

std::vector<Eigen::MatrixXcd> oracle_jumps(const PhysicalParams& p, int n_max) {
    const auto o = oracle::ops(n_max);
    const Eigen::MatrixXcd ss = (o.s1 + o.s2) / std::sqrt(2.0);
    const Eigen::MatrixXcd sa = (o.s1 - o.s2) / std::sqrt(2.0);
    return {std::sqrt(p.kappa) * o.a, std::sqrt(p.gamma_plus()) * ss, std::sqrt(p.gamma_minus()) * sa};
}

} // namespace

TEST(Hamiltonian, MatchesIndependentConstruction) {
    const auto p = small_params();
    for (int n_max : {1, 2, 3}) {
        ControlSchedule s;
        s.t_end = 1.0;
        s.delta12.add(Level{0.0, 7.0});
        s.omega0.add(Level{0.0, -3.0});
        s.drive.add(Level{0.0, 2.0});
        const Eigen::MatrixXcd h = assemble_hamiltonian(p, s, 0.5, n_max);
        const Eigen::MatrixXcd ref = oracle::hamiltonian(n_max, p.omega12, p.omega_c, p.g, 7.0, -3.0, 2.0);
        EXPECT_LT((h - ref).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Hamiltonian, HermitianUnderRandomControls) {
    const auto p = reference_params();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        ControlSchedule s;
        s.t_end = 1.0;
        s.delta12.add(Level{0.0, u(rng)});
        s.omega0.add(Level{0.0, u(rng)});
        s.drive.add(Level{0.0, u(rng)});
        s.drive_carrier = u(rng);
        const auto h = assemble_hamiltonian(p, s, 0.37, 2);
        EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Master, MatchesMatrixExponentialUndriven) {
    const auto p = small_params();
    ControlSchedule s;
    s.t_end = 0.3;
    s.delta12.add(Level{0.0, units::ueV(15.0)});
    const auto init = DensityMatrix::from_amplitudes(SingleExcitationState::dark(), 1);
    const auto res = integrate_master(p, s, init, {1e-10, 1e-13, 0.05, 1});
    const auto h = oracle::hamiltonian(1, p.omega12, p.omega_c, p.g, units::ueV(15.0), 0.0, 0.0);
    const auto l = oracle::liouvillian(h, oracle_jumps(p, 1));
    const auto ref = oracle::evolve(l, init.rho, 0.3);
    EXPECT_LT((res.final_state.rho - ref).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Master, MatchesMatrixExponentialDriven) {
    const auto p = small_params();
    for (int n_max : {2, 3}) {
        ControlSchedule s;
        s.t_end = 0.2;
        s.delta12.add(Level{0.0, units::ueV(30.0)});
        s.omega0.add(Level{0.0, units::ueV(5.0)});
        s.drive.add(Level{0.0, 3.0});
        const auto init = DensityMatrix::ground(n_max);
        MasterResult res;
        try {
            res = integrate_master(p, s, init, {1e-10, 1e-13, 0.05, n_max});
        } catch (const TruncationError&) {
            ADD_FAILURE() << "weak drive should stay well inside the truncation";
            continue;
        }
        const auto h = oracle::hamiltonian(n_max, p.omega12, p.omega_c, p.g, units::ueV(30.0), units::ueV(5.0), 3.0);
        const auto ref = oracle::evolve(oracle::liouvillian(h, oracle_jumps(p, n_max)), init.rho, 0.2);
        EXPECT_LT((res.final_state.rho - ref).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Master, TruncationErrorUnderStrongDrive) {
    const auto p = small_params();
    ControlSchedule s;
    s.t_end = 1.0;
    s.drive.add(Level{0.0, 400.0});
    EXPECT_THROW(integrate_master(p, s, DensityMatrix::ground(1), {1e-8, 1e-12, 0.01, 1}), TruncationError);
}

TEST(Amplitudes, MatchMasterForSingleExcitation) {
    const auto p = reference_params();
    ControlSchedule s;
    s.t_end = 1.5;
    s.delta12.add(Ramp{0.2, 0.3, 0.0, units::ueV(40.0)});
    const auto init = SingleExcitationState::dark();
    const auto amp = integrate_amplitudes(p, s, init);
    const auto mas = integrate_master(p, s, DensityMatrix::from_amplitudes(init, 1), {1e-10, 1e-13, 0.01, 1}).trajectory;
    ASSERT_EQ(amp.size(), mas.size());
    for (std::size_t i = 0; i < amp.size(); ++i) {
        EXPECT_NEAR(amp.pop_a[i], mas.pop_a[i], 1e-7);
        EXPECT_NEAR(amp.pop_s[i], mas.pop_s[i], 1e-7);
        EXPECT_NEAR(amp.pop_cavity[i], mas.pop_cavity[i], 1e-7);
        EXPECT_NEAR(amp.pop_minus_eff[i], mas.pop_minus_eff[i], 1e-7);
        EXPECT_NEAR(amp.emitted_cavity[i], mas.emitted_cavity[i], 1e-7);
    }
}

TEST(Amplitudes, MatchClosedFormForConstantControls) {
    const auto p = reference_params();
    const double delta = units::ueV(40.0);
    ControlSchedule s;
    s.t_end = 2.0;
    s.delta12.add(Level{0.0, delta});
    const auto tr = integrate_amplitudes(p, s, SingleExcitationState::dark(), {1e-11, 1e-14, 0.1, 1});
    const std::complex<double> i(0, 1);
    Eigen::Matrix3cd m;
    m << -p.omega12 - 0.5 * i * p.gamma_minus(), delta, 0.0,
         delta, p.omega12 - 0.5 * i * p.gamma_plus(), -i * std::sqrt(2.0) * p.g,
         0.0, i * std::sqrt(2.0) * p.g, p.omega_c - 0.5 * i * p.kappa;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const Eigen::Matrix3cd u = (-i * m * tr.t[k]).exp();
        const Eigen::Vector3cd v = u.col(0);
        EXPECT_NEAR(std::norm(v[0]), tr.pop_a[k], 1e-9);
        EXPECT_NEAR(std::norm(v[2]), tr.pop_cavity[k], 1e-9);
    }
}

TEST(Amplitudes, DarkStateDecaysAtGammaMinus) {
    const auto p = reference_params();
    ControlSchedule s;
    s.t_end = 50.0;
    const auto tr = integrate_amplitudes(p, s, SingleExcitationState::dark(), {1e-10, 1e-14, 1.0, 1});
    for (std::size_t k = 0; k < tr.size(); ++k) {
        EXPECT_NEAR(tr.pop_a[k], std::exp(-p.gamma_minus() * tr.t[k]), 1e-6);
        EXPECT_EQ(tr.pop_cavity[k], 0.0);
    }
}

TEST(Amplitudes, QuantaAreConserved) {
    const auto p = reference_params();
    ControlSchedule s;
    s.t_end = 6.0;
    s.delta12.add(Ramp{0.5, 0.28, 0.0, units::ueV(40.0)});
    const auto tr = integrate_amplitudes(p, s, SingleExcitationState::dark());
    for (std::size_t k = 0; k < tr.size(); ++k)
        EXPECT_NEAR(tr.excitation(k) + tr.emitted_cavity[k] + tr.leaked[k], 1.0, 1e-7);
}

TEST(Amplitudes, AdiabaticFollowing) {
    // a slow ramp keeps the dark-branch eigenstate populated with negligible |+⟩_eff admixture
    const auto p = reference_params();
    ControlSchedule s;
    s.t_end = 3.0;
    s.delta12.add(Ramp{0.5, 1.0, 0.0, units::ueV(10.0)});
    const auto tr = integrate_amplitudes(p, s, SingleExcitationState::dark());
    for (std::size_t k = 0; k < tr.size(); ++k) EXPECT_LT(tr.pop_plus_eff[k], 1e-3 * tr.atomic(k) + 1e-12);
}

TEST(Amplitudes, RejectsDrive) {
    ControlSchedule s;
    s.t_end = 1.0;
    s.drive.add(Level{0.0, 1.0});
    EXPECT_THROW(integrate_amplitudes(reference_params(), s, SingleExcitationState::dark()), ValidationError);
    ControlSchedule ok;
    ok.t_end = 1.0;
    EXPECT_THROW(integrate_amplitudes(reference_params(), ok, {1.0, 1.0, 0.0}), ValidationError);
}

TEST(Master, DriveFluxBalance) {
    const auto p = reference_params();
    ControlSchedule s;
    s.t_end = 4.0;
    s.delta12.add(Level{0.0, units::ueV(40.0)});
    s.drive.add(coherent_pulse(p.kappa, 1.5, 0.55, 0.05));
    s.drive_carrier = hybrid_eigenstates(p, units::ueV(40.0)).omega_minus_eff;
    const auto tr = integrate_master(p, s, DensityMatrix::ground(2), {1e-9, 1e-13, 0.01, 2}).trajectory;
    EXPECT_NEAR(tr.input.back(), 0.05, 1e-6);
    for (std::size_t k = 0; k < tr.size(); ++k)
        EXPECT_NEAR(tr.input[k] - tr.output[k], tr.excitation(k) + tr.leaked[k], 1e-7);
}

TEST(DensityMatrix, ValidationCatchesBadStates) {
    auto d = DensityMatrix::ground(1);
    d.rho(0, 0) = 0.5;
    EXPECT_THROW(d.validate(), ValidationError);
    auto e = DensityMatrix::ground(1);
    e.rho(0, 1) = 0.3;
    EXPECT_THROW(e.validate(), ValidationError);
    auto f = DensityMatrix::ground(1);
    f.rho(0, 0) = 1.5;
    f.rho(1, 1) = -0.5;
    EXPECT_THROW(f.validate(), ValidationError);
    EXPECT_NO_THROW(DensityMatrix::from_amplitudes({0.6, 0.0, 0.8}, 2).validate());
}
