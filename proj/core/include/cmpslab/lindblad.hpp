#pragma once

#include <initializer_list>

#include "cmpslab/matrix_kernel.hpp"

namespace cmpslab {

/// Right fixed point of a transfer operator, seen as a density matrix on the ancilla space.
struct SteadyState {
    CMatrix rho;         // unit trace, Hermitian, PSD
    double residual{};   // ||T vec(rho)||_2
    double gap{};        // -Re(lambda_2); infinity for a 1-dimensional ancilla
};

/// Eigenvalues of the hermitized steady state below this raise NonPositiveSteadyState.
inline constexpr double kPsdTolerance = 1e-6;

/// Points whose steady state is closer to degenerate than this are rejected.
inline constexpr double kMinGap = 1e-8;

/// Row-major vectorization: vec(rho)[a*dim + b] = rho(a, b). Under this convention
/// (A kron B*) vec(rho) = vec(A rho B^dagger).
CVector vectorize(const CMatrix& rho);
CMatrix unvectorize(const CVector& v, Eigen::Index dim);

/// T = Q (x) 1 + 1 (x) Q* + sum_k R_k (x) R_k*, assembled entrywise.
CMatrix lindblad_transfer(const CMatrix& q, std::initializer_list<const CMatrix*> jumps);

/// Steady state from the full spectrum of the transfer operator (also yields the gap).
SteadyState steady_state_from_transfer(const CMatrix& transfer, Eigen::Index dim,
                                       double tol = kDefaultNullTol);

/// Steady state from one LU solve with the redundant (0,0) row of T replaced by the
/// trace condition. No gap is computed; the reciprocal condition number of the bordered
/// system stands in as the degeneracy check (DegenerateNullSpace below min_rcond).
struct FastSteadyState {
    CMatrix rho;
    double rcond{};
};
FastSteadyState steady_state_linear_solve(const CMatrix& transfer, Eigen::Index dim,
                                          double min_rcond = 1e-11);

}  // namespace cmpslab
