#include "cmpslab/lindblad.hpp"

#include <limits>
#include <sstream>
#include <vector>

#include "cmpslab/errors.hpp"

namespace cmpslab {

CVector vectorize(const CMatrix& rho) {
    const Eigen::Index dim = rho.rows();
    CVector v(dim * dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
        for (Eigen::Index b = 0; b < dim; ++b) {
            v(a * dim + b) = rho(a, b);
        }
    }
    return v;
}

CMatrix unvectorize(const CVector& v, Eigen::Index dim) {
    if (v.size() != dim * dim) {
        throw ShapeMismatch("unvectorize: length is not dim^2");
    }
    CMatrix rho(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
        for (Eigen::Index b = 0; b < dim; ++b) {
            rho(a, b) = v(a * dim + b);
        }
    }
    return rho;
}

CMatrix lindblad_transfer(const CMatrix& q, std::initializer_list<const CMatrix*> jumps) {
    const Eigen::Index d = q.rows();
    const Eigen::Index n = d * d;
    CMatrix t = CMatrix::Zero(n, n);
    // Row (a,b), column (c,e): Q[a,c] delta_be + delta_ac conj(Q[b,e]) + sum R[a,c] conj(R[b,e]).
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index c = 0; c < d; ++c) {
            const Complex qac = q(a, c);
            for (Eigen::Index b = 0; b < d; ++b) {
                t(a * d + b, c * d + b) += qac;
            }
        }
        for (Eigen::Index b = 0; b < d; ++b) {
            for (Eigen::Index e = 0; e < d; ++e) {
                t(a * d + b, a * d + e) += std::conj(q(b, e));
            }
        }
    }
    for (const CMatrix* r : jumps) {
        for (Eigen::Index a = 0; a < d; ++a) {
            for (Eigen::Index c = 0; c < d; ++c) {
                const Complex rac = (*r)(a, c);
                if (rac == Complex{}) continue;
                for (Eigen::Index b = 0; b < d; ++b) {
                    for (Eigen::Index e = 0; e < d; ++e) {
                        t(a * d + b, c * d + e) += rac * std::conj((*r)(b, e));
                    }
                }
            }
        }
    }
    return t;
}

namespace {

CMatrix normalize_state(const CMatrix& raw) {
    const Complex tr = raw.trace();
    if (std::abs(tr) < 1e-14 * std::max(1.0, raw.norm())) {
        throw NonPositiveSteadyState("steady state has vanishing trace");
    }
    CMatrix rho = hermitize(raw / tr);
    rho /= rho.trace().real();
    return rho;
}

}  // namespace

SteadyState steady_state_from_transfer(const CMatrix& transfer, Eigen::Index dim, double tol) {
    if (transfer.rows() != dim * dim || transfer.cols() != dim * dim) {
        throw ShapeMismatch("steady_state: transfer operator is not dim^2 x dim^2");
    }
    auto pairs = eig_full(transfer);
    const double gap = pairs.size() > 1 ? -pairs[1].value.real()
                                        : std::numeric_limits<double>::infinity();
    if (gap < kMinGap) {
        std::ostringstream msg;
        msg << "steady_state: spectral gap " << gap << " below " << kMinGap;
        throw DegenerateNullSpace(msg.str());
    }
    NullVector null = null_right(std::move(pairs), norm1(transfer), tol);

    SteadyState ss;
    ss.rho = normalize_state(unvectorize(null.vector, dim));
    Eigen::SelfAdjointEigenSolver<CMatrix> spectrum(ss.rho, Eigen::EigenvaluesOnly);
    if (spectrum.eigenvalues().minCoeff() < -kPsdTolerance) {
        std::ostringstream msg;
        msg << "steady_state: eigenvalue " << spectrum.eigenvalues().minCoeff()
            << " of the steady state is negative";
        throw NonPositiveSteadyState(msg.str());
    }
    ss.residual = (transfer * vectorize(ss.rho)).norm();
    ss.gap = gap;
    return ss;
}

FastSteadyState steady_state_linear_solve(const CMatrix& transfer, Eigen::Index dim,
                                          double min_rcond) {
    const Eigen::Index n = dim * dim;
    if (transfer.rows() != n || transfer.cols() != n) {
        throw ShapeMismatch("steady_state: transfer operator is not dim^2 x dim^2");
    }
    // The map preserves Hermiticity, so it is solved as a real system on Hermitian
    // coordinates: rho_aa, then (Re, Im) of rho_ab for a < b.
    std::vector<Eigen::Index> coord_of(static_cast<std::size_t>(n));
    {
        Eigen::Index k = dim;
        for (Eigen::Index a = 0; a < dim; ++a) {
            coord_of[static_cast<std::size_t>(a * dim + a)] = a;
            for (Eigen::Index b = a + 1; b < dim; ++b) {
                coord_of[static_cast<std::size_t>(a * dim + b)] = k;
                k += 2;
            }
        }
    }
    Eigen::MatrixXd real(n, n);
    CVector column(n);
    for (Eigen::Index c = 0; c < dim; ++c) {
        for (Eigen::Index e = c; e < dim; ++e) {
            const Eigen::Index ce = c * dim + e;
            const Eigen::Index ec = e * dim + c;
            const Eigen::Index k = coord_of[static_cast<std::size_t>(ce)];
            for (int part = 0; part < (c == e ? 1 : 2); ++part) {
                if (c == e) {
                    column = transfer.col(ce);
                } else if (part == 0) {
                    column = transfer.col(ce) + transfer.col(ec);
                } else {
                    column = Complex{0.0, 1.0} * (transfer.col(ce) - transfer.col(ec));
                }
                for (Eigen::Index a = 0; a < dim; ++a) {
                    real(a, k + part) = column(a * dim + a).real();
                    for (Eigen::Index b = a + 1; b < dim; ++b) {
                        const Eigen::Index row = coord_of[static_cast<std::size_t>(a * dim + b)];
                        real(row, k + part) = column(a * dim + b).real();
                        real(row + 1, k + part) = column(a * dim + b).imag();
                    }
                }
            }
        }
    }
    // vec(1)^T T = 0 makes the (0,0) row minus the sum of the other diagonal rows,
    // so swapping it for the trace row keeps full rank iff the fixed point is unique.
    real.row(0).setZero();
    real.row(0).head(dim).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(real);
    // Eigen's estimate does not see exactly zero pivots
    const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double rcond = std::min(lu.rcond(), pivots.minCoeff() / pivots.maxCoeff());
    if (!(rcond >= min_rcond)) {
        std::ostringstream msg;
        msg << "steady_state: bordered transfer operator is singular (rcond " << rcond << ")";
        throw DegenerateNullSpace(msg.str());
    }
    const Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite()) {
        throw DegenerateNullSpace("steady_state: non-finite solution");
    }
    CMatrix rho(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
        rho(a, a) = x(a);
        for (Eigen::Index b = a + 1; b < dim; ++b) {
            const Eigen::Index k = coord_of[static_cast<std::size_t>(a * dim + b)];
            rho(a, b) = Complex{x(k), x(k + 1)};
            rho(b, a) = Complex{x(k), -x(k + 1)};
        }
    }
    return {normalize_state(rho), rcond};
}

}  // namespace cmpslab
