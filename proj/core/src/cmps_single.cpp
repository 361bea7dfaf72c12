#include "cmpslab/cmps_single.hpp"

#include <cmath>
#include <sstream>

#include "cmpslab/errors.hpp"

namespace cmpslab {

namespace {
constexpr double kHermitianTol = 1e-12;
constexpr double kNegativeClip = 1e-9;
}  // namespace

CmpsAnsatz::CmpsAnsatz(CMatrix k, CMatrix r) : K(std::move(k)), R(std::move(r)) {
    if (K.rows() != K.cols() || R.rows() != R.cols() || K.rows() != R.rows() || K.rows() == 0) {
        throw InvalidAnsatz("CmpsAnsatz: K and R must be square with the same positive size");
    }
    if (!is_hermitian(K, kHermitianTol * std::max(1.0, K.norm()))) {
        throw InvalidAnsatz("CmpsAnsatz: K is not Hermitian");
    }
}

CmpsAnsatz CmpsAnsatz::rescaled(double lambda) const {
    return CmpsAnsatz(lambda * K, std::sqrt(lambda) * R);
}

void ModelParams::validate() const {
    if (!(M > 0.0) || !std::isfinite(M)) throw InvalidParams("ModelParams: M must be > 0");
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidParams("ModelParams: c must be >= 0");
    if (!(rho0 > 0.0) || !std::isfinite(rho0)) throw InvalidParams("ModelParams: rho0 must be > 0");
}

CMatrix build_Q(const CmpsAnsatz& ansatz) {
    const Complex i{0.0, 1.0};
    return -i * ansatz.K - 0.5 * (ansatz.R.adjoint() * ansatz.R);
}

CMatrix build_transfer(const CmpsAnsatz& ansatz) {
    return lindblad_transfer(build_Q(ansatz), {&ansatz.R});
}

SteadyState steady_state(const CmpsAnsatz& ansatz, double tol) {
    return steady_state_from_transfer(build_transfer(ansatz), ansatz.bond_dim(), tol);
}

double nonnegative_trace(const CMatrix& op, const CMatrix& rho, const char* what) {
    const double value = (op * rho).trace().real();
    if (value >= 0.0) {
        return value;
    }
    if (value > -kNegativeClip) {
        return 0.0;
    }
    std::ostringstream msg;
    msg << what << " is negative (" << value << ")";
    throw NegativeObservable(msg.str());
}

double density(const CmpsAnsatz& ansatz, const SteadyState& ss) {
    return nonnegative_trace(ansatz.R.adjoint() * ansatz.R, ss.rho, "density");
}

double kinetic_density(const CmpsAnsatz& ansatz, const SteadyState& ss) {
    const CMatrix qr = commutator(build_Q(ansatz), ansatz.R);
    return nonnegative_trace(qr.adjoint() * qr, ss.rho, "kinetic density");
}

double pair_density(const CmpsAnsatz& ansatz, const SteadyState& ss) {
    const CMatrix rr = ansatz.R * ansatz.R;
    return nonnegative_trace(rr.adjoint() * rr, ss.rho, "pair density");
}

LocalObservables local_observables(const CmpsAnsatz& ansatz, const CMatrix& rho) {
    const CMatrix& R = ansatz.R;
    const CMatrix qr = commutator(build_Q(ansatz), R);
    const CMatrix rr = R * R;
    return {nonnegative_trace(R.adjoint() * R, rho, "density"),
            nonnegative_trace(qr.adjoint() * qr, rho, "kinetic density"),
            nonnegative_trace(rr.adjoint() * rr, rho, "pair density")};
}

double energy_from_observables(const LocalObservables& obs, const ModelParams& params) {
    return obs.kinetic_density / (2.0 * params.M) + params.c * obs.pair_density;
}

double energy_density(const CmpsAnsatz& ansatz, const ModelParams& params) {
    params.validate();
    const SteadyState ss = steady_state(ansatz);
    return energy_from_observables(local_observables(ansatz, ss.rho), params);
}

SingleEvaluation evaluate_fast(const CmpsAnsatz& ansatz, const ModelParams& params) {
    const FastSteadyState ss = steady_state_linear_solve(build_transfer(ansatz), ansatz.bond_dim());
    SingleEvaluation out;
    out.observables = local_observables(ansatz, ss.rho);
    out.energy = energy_from_observables(out.observables, params);
    return out;
}

}  // namespace cmpslab
