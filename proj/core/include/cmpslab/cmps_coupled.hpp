#pragma once

#include <utility>
#include <vector>

#include "cmpslab/cmps_single.hpp"
#include "cmpslab/lindblad.hpp"

namespace cmpslab {

/// One Z1 (x) Z2 coupling term of the joint ancilla Hamiltonian.
struct ZPair {
    CMatrix z1;  // Hermitian, D x D
    CMatrix z2;  // Hermitian, D x D
};

/// Two bosonic fields sharing the product ancilla space A1 (x) A2 of dimension D^2.
///
/// The couplings are R1 (x) 1 and 1 (x) R2, which commute exactly; the joint ancilla
/// Hamiltonian is K1 (x) 1 + 1 (x) K2 + sum_p Z1^(p) (x) Z2^(p).
struct CoupledAnsatz {
    CMatrix K1, K2;
    CMatrix R1, R2;
    std::vector<ZPair> Z;

    CoupledAnsatz() = default;
    /// Throws InvalidAnsatz on shape mismatch or any non-Hermitian K / Z (tolerance 1e-12).
    CoupledAnsatz(CMatrix k1, CMatrix k2, CMatrix r1, CMatrix r2, std::vector<ZPair> z = {});

    /// Separable state built from two single-field states with P zero Z pairs.
    static CoupledAnsatz separable(const CmpsAnsatz& field1, const CmpsAnsatz& field2,
                                   std::size_t pairs = 0);

    Eigen::Index bond_dim() const noexcept { return K1.rows(); }
    Eigen::Index joint_dim() const noexcept { return K1.rows() * K1.rows(); }
    std::size_t pairs() const noexcept { return Z.size(); }

    /// Exchange the two species (K, R and every Z pair).
    CoupledAnsatz swapped() const;
};

struct CoupledModelParams {
    double M{0.5};
    double c{1.5};
    double g{0.0};
    double rho01{0.63};
    double rho02{0.63};

    /// Throws InvalidParams unless M > 0, c >= 0, rho01 > 0, rho02 > 0.
    void validate() const;
    ModelParams species(int alpha) const;
};

struct CoupledObservables {
    double n1{}, n2{};
    double kin1{}, kin2{};
    double pair1{}, pair2{};
    double cross{};  // <rho1 rho2> at equal points
};

CMatrix assemble_K(const CoupledAnsatz& ansatz);
std::pair<CMatrix, CMatrix> assemble_R(const CoupledAnsatz& ansatz);

/// Q~ = -i K~ - 1/2 sum_alpha R~_alpha^dagger R~_alpha.
CMatrix build_Q_coupled(const CoupledAnsatz& ansatz);

/// T~ = Q~ (x) 1 + 1 (x) Q~* + sum_alpha R~_alpha (x) R~_alpha*, of size D^4 x D^4.
CMatrix build_transfer_coupled(const CoupledAnsatz& ansatz);

SteadyState steady_state_coupled(const CoupledAnsatz& ansatz, double tol = kDefaultNullTol);

CoupledObservables observables_coupled(const CoupledAnsatz& ansatz, const CMatrix& rho);

/// |<rho1 rho2> - <rho1><rho2>|
double density_correlation(const CoupledObservables& obs);
double density_correlation(const CoupledAnsatz& ansatz, const SteadyState& ss);

double energy_from_observables(const CoupledObservables& obs, const CoupledModelParams& params);

double energy_density_coupled(const CoupledAnsatz& ansatz, const CoupledModelParams& params);

struct CoupledEvaluation {
    CoupledObservables observables;
    double energy{};
};
CoupledEvaluation evaluate_fast(const CoupledAnsatz& ansatz, const CoupledModelParams& params);

}  // namespace cmpslab
