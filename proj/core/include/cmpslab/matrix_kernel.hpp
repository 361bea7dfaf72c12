#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace cmpslab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;

/// Default null-space tolerance, relative to the 1-norm of the matrix.
inline constexpr double kDefaultNullTol = 1e-8;

struct EigPair {
    Complex value;
    CVector right;                    // unit 2-norm
    std::optional<CRowVector> left;   // unit 2-norm, when requested
};

struct NullVector {
    CVector vector;     // unit 2-norm
    Complex eigenvalue;  // eigenvalue actually used
};

/// (kron(a,b))[i*b.rows()+k, j*b.cols()+l] = a[i,j]*b[k,l]
CMatrix kron(const CMatrix& a, const CMatrix& b);

CMatrix adjoint(const CMatrix& a);

/// ab - ba. Throws ShapeMismatch unless both are square with equal shape.
CMatrix commutator(const CMatrix& a, const CMatrix& b);

/// (a + a^dagger)/2 for square a.
CMatrix hermitize(const CMatrix& a);

/// All eigenpairs sorted by descending real part (ties: descending imaginary part).
/// Throws SolverFailure when the QR iteration does not converge.
std::vector<EigPair> eig_full(const CMatrix& a, bool with_left = false);

/// Right eigenvector of the eigenvalue of smallest modulus.
///
/// An eigenvalue counts as zero when |lambda| < tol * max(1, ||a||_1).
/// Throws NoNullVector when none does and DegenerateNullSpace when more than one does.
NullVector null_right(const CMatrix& a, double tol = kDefaultNullTol);

/// Same selection applied to an already computed spectrum of a matrix with 1-norm a_norm1.
NullVector null_right(std::vector<EigPair> pairs, double a_norm1, double tol = kDefaultNullTol);

double norm1(const CMatrix& a);

bool is_hermitian(const CMatrix& a, double tol);

}  // namespace cmpslab
