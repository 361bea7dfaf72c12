#include "cmpslab/matrix_kernel.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "cmpslab/errors.hpp"

namespace cmpslab {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    const Eigen::Index br = b.rows();
    const Eigen::Index bc = b.cols();
    CMatrix out(a.rows() * br, a.cols() * bc);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * br, j * bc, br, bc) = a(i, j) * b;
        }
    }
    return out;
}

CMatrix adjoint(const CMatrix& a) { return a.adjoint(); }

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        std::ostringstream msg;
        msg << "commutator: expected equal square shapes, got " << a.rows() << "x" << a.cols()
            << " and " << b.rows() << "x" << b.cols();
        throw ShapeMismatch(msg.str());
    }
    return a * b - b * a;
}

CMatrix hermitize(const CMatrix& a) {
    if (a.rows() != a.cols()) {
        throw ShapeMismatch("hermitize: matrix is not square");
    }
    return (a + a.adjoint()) * 0.5;
}

double norm1(const CMatrix& a) {
    if (a.size() == 0) {
        return 0.0;
    }
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

bool is_hermitian(const CMatrix& a, double tol) {
    return a.rows() == a.cols() && (a - a.adjoint()).norm() <= tol;
}

std::vector<EigPair> eig_full(const CMatrix& a, bool with_left) {
    if (a.rows() != a.cols()) {
        throw ShapeMismatch("eig_full: matrix is not square");
    }
    const Eigen::Index n = a.rows();
    Eigen::ComplexEigenSolver<CMatrix> solver(a, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) {
        throw SolverFailure("eig_full: complex Schur iteration did not converge");
    }
    const CVector& values = solver.eigenvalues();
    const CMatrix& vectors = solver.eigenvectors();

    CMatrix left_rows;
    if (with_left) {
        // Rows of V^{-1} are the left eigenvectors matching the columns of V.
        Eigen::FullPivLU<CMatrix> lu(vectors);
        if (!lu.isInvertible()) {
            throw SolverFailure("eig_full: eigenvector matrix is singular (defective matrix)");
        }
        left_rows = lu.inverse();
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        if (values(x).real() != values(y).real()) {
            return values(x).real() > values(y).real();
        }
        return values(x).imag() > values(y).imag();
    });

    std::vector<EigPair> pairs;
    pairs.reserve(order.size());
    for (Eigen::Index k : order) {
        EigPair pair{values(k), vectors.col(k).normalized(), std::nullopt};
        if (with_left) {
            pair.left = left_rows.row(k).normalized();
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

NullVector null_right(const CMatrix& a, double tol) {
    if (a.rows() == 0) {
        throw ShapeMismatch("null_right: empty matrix");
    }
    return null_right(eig_full(a), norm1(a), tol);
}

NullVector null_right(std::vector<EigPair> pairs, double a_norm1, double tol) {
    if (pairs.empty()) {
        throw ShapeMismatch("null_right: no eigenpairs");
    }
    const double threshold = tol * std::max(1.0, a_norm1);

    std::size_t best = 0;
    int zero_count = 0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (std::abs(pairs[k].value) < std::abs(pairs[best].value)) {
            best = k;
        }
        if (std::abs(pairs[k].value) < threshold) {
            ++zero_count;
        }
    }
    if (zero_count == 0) {
        std::ostringstream msg;
        msg << "null_right: smallest |eigenvalue| " << std::abs(pairs[best].value)
            << " is above threshold " << threshold;
        throw NoNullVector(msg.str());
    }
    if (zero_count > 1) {
        std::ostringstream msg;
        msg << "null_right: " << zero_count << " eigenvalues below threshold " << threshold;
        throw DegenerateNullSpace(msg.str());
    }
    return {std::move(pairs[best].right), pairs[best].value};
}

}  // namespace cmpslab
