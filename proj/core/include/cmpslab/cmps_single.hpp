#pragma once

#include "cmpslab/lindblad.hpp"
#include "cmpslab/matrix_kernel.hpp"

namespace cmpslab {

/// Translation-invariant single-field cMPS in the gauge Q + Q^dagger + R^dagger R = 0.
///
/// Q is never stored: it is always derived from the Hermitian ancilla Hamiltonian K and
/// the field coupling R, which makes the gauge condition hold by construction.
struct CmpsAnsatz {
    CMatrix K;  // Hermitian, D x D
    CMatrix R;  // D x D

    CmpsAnsatz() = default;
    /// Throws InvalidAnsatz on shape mismatch or non-Hermitian K (tolerance 1e-12).
    CmpsAnsatz(CMatrix k, CMatrix r);

    Eigen::Index bond_dim() const noexcept { return K.rows(); }

    /// Exact rescaling x -> x / lambda of the field: (lambda K, sqrt(lambda) R).
    /// Densities scale by lambda, kinetic terms by lambda^3 and pair terms by lambda^2.
    CmpsAnsatz rescaled(double lambda) const;
};

/// Lieb-Liniger couplings: H = (1/2M) dpsi^+ dpsi + c psi^+ psi^+ psi psi at density rho0.
struct ModelParams {
    double M{0.5};
    double c{1.0};
    double rho0{1.0};

    /// Throws InvalidParams unless M > 0, c >= 0, rho0 > 0.
    void validate() const;
};

struct LocalObservables {
    double density{};          // <psi^+ psi>
    double kinetic_density{};  // <dpsi^+ dpsi>
    double pair_density{};     // <psi^+ psi^+ psi psi>
};

CMatrix build_Q(const CmpsAnsatz& ansatz);

/// T = Q (x) 1 + 1 (x) Q* + R (x) R*.
CMatrix build_transfer(const CmpsAnsatz& ansatz);

/// Steady state via the full spectrum of T.
SteadyState steady_state(const CmpsAnsatz& ansatz, double tol = kDefaultNullTol);

double density(const CmpsAnsatz& ansatz, const SteadyState& ss);
double kinetic_density(const CmpsAnsatz& ansatz, const SteadyState& ss);
double pair_density(const CmpsAnsatz& ansatz, const SteadyState& ss);

LocalObservables local_observables(const CmpsAnsatz& ansatz, const CMatrix& rho);

double energy_from_observables(const LocalObservables& obs, const ModelParams& params);

double energy_density(const CmpsAnsatz& ansatz, const ModelParams& params);

/// Cheap evaluation used inside the optimizer: LU steady state, no spectrum.
struct SingleEvaluation {
    LocalObservables observables;
    double energy{};
};
SingleEvaluation evaluate_fast(const CmpsAnsatz& ansatz, const ModelParams& params);

/// Re tr(op * rho), with the real part clipped to zero in (-1e-9, 0) and
/// NegativeObservable raised for anything more negative.
double nonnegative_trace(const CMatrix& op, const CMatrix& rho, const char* what);

}  // namespace cmpslab
