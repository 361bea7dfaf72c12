#include "cmpslab/cmps_coupled.hpp"

#include <cmath>

#include "cmpslab/errors.hpp"

namespace cmpslab {

namespace {

constexpr double kHermitianTol = 1e-12;

void require_hermitian(const CMatrix& m, Eigen::Index d, const char* name) {
    if (m.rows() != d || m.cols() != d) {
        throw InvalidAnsatz(std::string("CoupledAnsatz: ") + name + " has the wrong shape");
    }
    if (!is_hermitian(m, kHermitianTol * std::max(1.0, m.norm()))) {
        throw InvalidAnsatz(std::string("CoupledAnsatz: ") + name + " is not Hermitian");
    }
}

}  // namespace

CoupledAnsatz::CoupledAnsatz(CMatrix k1, CMatrix k2, CMatrix r1, CMatrix r2, std::vector<ZPair> z)
    : K1(std::move(k1)), K2(std::move(k2)), R1(std::move(r1)), R2(std::move(r2)), Z(std::move(z)) {
    const Eigen::Index d = K1.rows();
    if (d == 0) {
        throw InvalidAnsatz("CoupledAnsatz: empty bond dimension");
    }
    require_hermitian(K1, d, "K1");
    require_hermitian(K2, d, "K2");
    if (R1.rows() != d || R1.cols() != d || R2.rows() != d || R2.cols() != d) {
        throw InvalidAnsatz("CoupledAnsatz: R1/R2 have the wrong shape");
    }
    for (const auto& pair : Z) {
        require_hermitian(pair.z1, d, "Z1");
        require_hermitian(pair.z2, d, "Z2");
    }
}

CoupledAnsatz CoupledAnsatz::separable(const CmpsAnsatz& field1, const CmpsAnsatz& field2,
                                       std::size_t pairs) {
    const Eigen::Index d = field1.bond_dim();
    if (field2.bond_dim() != d) {
        throw InvalidAnsatz("CoupledAnsatz::separable: species bond dimensions differ");
    }
    std::vector<ZPair> z(pairs, ZPair{CMatrix::Zero(d, d), CMatrix::Zero(d, d)});
    return CoupledAnsatz(field1.K, field2.K, field1.R, field2.R, std::move(z));
}

CoupledAnsatz CoupledAnsatz::swapped() const {
    std::vector<ZPair> z;
    z.reserve(Z.size());
    for (const auto& pair : Z) {
        z.push_back({pair.z2, pair.z1});
    }
    return CoupledAnsatz(K2, K1, R2, R1, std::move(z));
}

void CoupledModelParams::validate() const {
    if (!(M > 0.0) || !std::isfinite(M)) throw InvalidParams("CoupledModelParams: M must be > 0");
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidParams("CoupledModelParams: c must be >= 0");
    if (!std::isfinite(g)) throw InvalidParams("CoupledModelParams: g must be finite");
    if (!(rho01 > 0.0) || !(rho02 > 0.0)) {
        throw InvalidParams("CoupledModelParams: densities must be > 0");
    }
}

ModelParams CoupledModelParams::species(int alpha) const {
    return ModelParams{M, c, alpha == 1 ? rho01 : rho02};
}

CMatrix assemble_K(const CoupledAnsatz& ansatz) {
    const Eigen::Index d = ansatz.bond_dim();
    const CMatrix id = CMatrix::Identity(d, d);
    CMatrix k = kron(ansatz.K1, id) + kron(id, ansatz.K2);
    for (const auto& pair : ansatz.Z) {
        k += kron(pair.z1, pair.z2);
    }
    return k;
}

std::pair<CMatrix, CMatrix> assemble_R(const CoupledAnsatz& ansatz) {
    const Eigen::Index d = ansatz.bond_dim();
    const CMatrix id = CMatrix::Identity(d, d);
    return {kron(ansatz.R1, id), kron(id, ansatz.R2)};
}

CMatrix build_Q_coupled(const CoupledAnsatz& ansatz) {
    const Complex i{0.0, 1.0};
    const auto [r1, r2] = assemble_R(ansatz);
    return -i * assemble_K(ansatz) - 0.5 * (r1.adjoint() * r1 + r2.adjoint() * r2);
}

CMatrix build_transfer_coupled(const CoupledAnsatz& ansatz) {
    const CMatrix q = build_Q_coupled(ansatz);
    const auto [r1, r2] = assemble_R(ansatz);
    return lindblad_transfer(q, {&r1, &r2});
}

SteadyState steady_state_coupled(const CoupledAnsatz& ansatz, double tol) {
    return steady_state_from_transfer(build_transfer_coupled(ansatz), ansatz.joint_dim(), tol);
}

CoupledObservables observables_coupled(const CoupledAnsatz& ansatz, const CMatrix& rho) {
    const CMatrix q = build_Q_coupled(ansatz);
    const auto [r1, r2] = assemble_R(ansatz);
    const CMatrix qr1 = commutator(q, r1);
    const CMatrix qr2 = commutator(q, r2);
    const CMatrix rr1 = r1 * r1;
    const CMatrix rr2 = r2 * r2;
    const CMatrix r21 = r2 * r1;

    CoupledObservables obs;
    obs.n1 = nonnegative_trace(r1.adjoint() * r1, rho, "density 1");
    obs.n2 = nonnegative_trace(r2.adjoint() * r2, rho, "density 2");
    obs.kin1 = nonnegative_trace(qr1.adjoint() * qr1, rho, "kinetic density 1");
    obs.kin2 = nonnegative_trace(qr2.adjoint() * qr2, rho, "kinetic density 2");
    obs.pair1 = nonnegative_trace(rr1.adjoint() * rr1, rho, "pair density 1");
    obs.pair2 = nonnegative_trace(rr2.adjoint() * rr2, rho, "pair density 2");
    obs.cross = nonnegative_trace(r21.adjoint() * r21, rho, "cross density");
    return obs;
}

double density_correlation(const CoupledObservables& obs) {
    return std::abs(obs.cross - obs.n1 * obs.n2);
}

double density_correlation(const CoupledAnsatz& ansatz, const SteadyState& ss) {
    return density_correlation(observables_coupled(ansatz, ss.rho));
}

double energy_from_observables(const CoupledObservables& obs, const CoupledModelParams& params) {
    return (obs.kin1 + obs.kin2) / (2.0 * params.M) + params.c * (obs.pair1 + obs.pair2) +
           params.g * obs.cross;
}

double energy_density_coupled(const CoupledAnsatz& ansatz, const CoupledModelParams& params) {
    params.validate();
    const SteadyState ss = steady_state_coupled(ansatz);
    return energy_from_observables(observables_coupled(ansatz, ss.rho), params);
}

CoupledEvaluation evaluate_fast(const CoupledAnsatz& ansatz, const CoupledModelParams& params) {
    const FastSteadyState ss =
        steady_state_linear_solve(build_transfer_coupled(ansatz), ansatz.joint_dim());
    CoupledEvaluation out;
    out.observables = observables_coupled(ansatz, ss.rho);
    out.energy = energy_from_observables(out.observables, params);
    return out;
}

}  // namespace cmpslab
