// operators.hpp — Ladder operators on (emitter 1) ⊗ (emitter 2) ⊗ (Fock 0..N_max)
//
// Basis index: ((e1 * 2) + e2) * (N_max + 1) + n, with e = 0 ground, 1 excited.

#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "duoatom/error.hpp"
#include "duoatom/params.hpp"
#include "duoatom/schedule.hpp"

namespace duoatom {

using cplx = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<cplx>;

inline constexpr cplx I{0.0, 1.0};

class HilbertSpace {
public:
    explicit HilbertSpace(int n_max) : n_max_(n_max) {
        if (n_max < 1) throw ValidationError("photon truncation N_max must be >= 1");
    }

    int n_max() const { return n_max_; }
    int fock() const { return n_max_ + 1; }
    int dim() const { return 4 * fock(); }
    int index(int e1, int e2, int n) const { return (e1 * 2 + e2) * fock() + n; }

    // σ₁, σ₂ lower emitter 1 or 2; `a` lowers the cavity.
    Eigen::MatrixXcd sigma1() const { return build([](int e1, int e2, int n, auto put) { if (e1) put(0, e2, n, 1.0); }); }
    Eigen::MatrixXcd sigma2() const { return build([](int e1, int e2, int n, auto put) { if (e2) put(e1, 0, n, 1.0); }); }
    Eigen::MatrixXcd cavity() const {
        return build([](int e1, int e2, int n, auto put) { if (n > 0) put(e1, e2, n - 1, std::sqrt(double(n))); });
    }
    Eigen::MatrixXcd sigma_s() const { return (sigma1() + sigma2()) / std::sqrt(2.0); }
    Eigen::MatrixXcd sigma_a() const { return (sigma1() - sigma2()) / std::sqrt(2.0); }

    // Excitation number a†a + σ₁†σ₁ + σ₂†σ₂ of a basis index.
    int excitations(int idx) const {
        const int n = idx % fock();
        const int atoms = idx / fock();
        return n + (atoms >> 1) + (atoms & 1);
    }
    int photons(int idx) const { return idx % fock(); }

private:
    // f(e1, e2, n, put) describes op|e1 e2 n⟩ = Σ coeff |e1' e2' n'⟩ via put(e1', e2', n', coeff).
    template <class F>
    Eigen::MatrixXcd build(F f) const {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim(), dim());
        for (int e1 = 0; e1 < 2; ++e1)
            for (int e2 = 0; e2 < 2; ++e2)
                for (int n = 0; n < fock(); ++n) {
                    const int col = index(e1, e2, n);
                    f(e1, e2, n, [&](int f1, int f2, int fn, double c) { m(index(f1, f2, fn), col) += c; });
                }
        return m;
    }

    int n_max_;
};

// Static pieces of H(t) = Ω₁₂(σ_s†σ_s − σ_a†σ_a) + ω_c a†a + i√2g(a†σ_s − aσ_s†)
//                       + Δ₁₂(t)(σ_s†σ_a + σ_a†σ_s) + w(t)(σ_s†σ_s + σ_a†σ_a)
//                       − i(E(t)e^{−iω_L t} a† − E(t)e^{iω_L t} a),
// where w(t) = ω₀(t) − ω₀_ref shifts both emitters relative to the fixed frame.
struct HamiltonianParts {
    Eigen::MatrixXcd h0;
    Eigen::MatrixXcd mixing; // σ_s†σ_a + σ_a†σ_s
    Eigen::MatrixXcd shift;  // σ_s†σ_s + σ_a†σ_a
    Eigen::MatrixXcd a;
    Eigen::MatrixXcd sigma_s;
    Eigen::MatrixXcd sigma_a;

    HamiltonianParts(const PhysicalParams& p, const HilbertSpace& hs) {
        a = hs.cavity();
        sigma_s = hs.sigma_s();
        sigma_a = hs.sigma_a();
        const Eigen::MatrixXcd ss = sigma_s.adjoint() * sigma_s;
        const Eigen::MatrixXcd aa = sigma_a.adjoint() * sigma_a;
        const Eigen::MatrixXcd nc = a.adjoint() * a;
        h0 = p.omega12 * (ss - aa) + p.omega_c * nc +
             I * std::sqrt(2.0) * p.g * (a.adjoint() * sigma_s - a * sigma_s.adjoint());
        mixing = sigma_s.adjoint() * sigma_a + sigma_a.adjoint() * sigma_s;
        shift = ss + aa;
    }

    // Complex drive amplitude E(t)e^{−iω_L t}.
    static cplx drive_amplitude(const ControlSchedule& ctrl, double t) {
        const double e = ctrl.drive.value(t);
        if (e == 0.0) return {0.0, 0.0};
        return e * std::exp(-I * ctrl.drive_carrier * t);
    }

    Eigen::MatrixXcd at(const ControlSchedule& ctrl, double t) const {
        const cplx ec = drive_amplitude(ctrl, t);
        Eigen::MatrixXcd h = h0 + ctrl.delta12.value(t) * mixing + ctrl.omega0_at(t) * shift;
        h += -I * (ec * a.adjoint() - std::conj(ec) * a);
        return h;
    }
};

/// H(t) on the truncated space; Hermitian by construction.
inline Eigen::MatrixXcd assemble_hamiltonian(const PhysicalParams& p, const ControlSchedule& ctrl, double t,
                                             int n_max = 1) {
    const HilbertSpace hs(n_max);
    return HamiltonianParts(p, hs).at(ctrl, t);
}

// Lindblad generator dρ/dt = −i[H, ρ] + κD[a] + γ₊D[σ_s] + γ₋D[σ_a], applied with
// sparse operators: L(ρ) = −iKρ + iρK† + Σ cρc†, K = H − (i/2)Σ c†c.
class LindbladGenerator {
public:
    LindbladGenerator(const PhysicalParams& p, const HilbertSpace& hs) : parts_(p, hs) {
        const Eigen::MatrixXcd& a = parts_.a;
        const Eigen::MatrixXcd decay = p.kappa * a.adjoint() * a +
                                       p.gamma_plus() * parts_.sigma_s.adjoint() * parts_.sigma_s +
                                       p.gamma_minus() * parts_.sigma_a.adjoint() * parts_.sigma_a;
        const Eigen::MatrixXcd k0 = parts_.h0 - 0.5 * I * decay;
        k0_ = sparse(k0);
        k0_adj_ = sparse(k0.adjoint());
        mixing_ = sparse(parts_.mixing);
        shift_ = sparse(parts_.shift);
        a_ = sparse(a);
        a_adj_ = sparse(a.adjoint());
        jumps_.push_back(sparse(std::sqrt(p.kappa) * a));
        jumps_.push_back(sparse(std::sqrt(p.gamma_plus()) * parts_.sigma_s));
        jumps_.push_back(sparse(std::sqrt(p.gamma_minus()) * parts_.sigma_a));
        for (const auto& c : jumps_) jumps_adj_.push_back(c.adjoint());
    }

    const HamiltonianParts& parts() const { return parts_; }

    void apply(const ControlSchedule& ctrl, double t, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
        const double delta = ctrl.delta12.value(t);
        const double w = ctrl.omega0_at(t);
        const cplx ec = HamiltonianParts::drive_amplitude(ctrl, t);
        out.noalias() = -I * (k0_ * rho);
        out.noalias() += I * (rho * k0_adj_);
        if (delta != 0.0) {
            out.noalias() += (-I * delta) * (mixing_ * rho);
            out.noalias() += (I * delta) * (rho * mixing_);
        }
        if (w != 0.0) {
            out.noalias() += (-I * w) * (shift_ * rho);
            out.noalias() += (I * w) * (rho * shift_);
        }
        if (ec != cplx(0.0, 0.0)) {
            // −i[H_p, ρ] with H_p = −i(ec a† − ec* a)
            out.noalias() -= ec * (a_adj_ * rho);
            out.noalias() += std::conj(ec) * (a_ * rho);
            out.noalias() += ec * (rho * a_adj_);
            out.noalias() -= std::conj(ec) * (rho * a_);
        }
        for (std::size_t j = 0; j < jumps_.size(); ++j) {
            if (jumps_[j].nonZeros() == 0) continue;
            tmp_.noalias() = jumps_[j] * rho;
            out.noalias() += tmp_ * jumps_adj_[j];
        }
    }

private:
    static SparseOp sparse(const Eigen::MatrixXcd& m) {
        SparseOp s = m.sparseView(cplx(1.0, 0.0), 1e-300);
        s.makeCompressed();
        return s;
    }

    HamiltonianParts parts_;
    SparseOp k0_, k0_adj_, mixing_, shift_, a_, a_adj_;
    std::vector<SparseOp> jumps_, jumps_adj_;
    mutable Eigen::MatrixXcd tmp_;
};

} // namespace duoatom
