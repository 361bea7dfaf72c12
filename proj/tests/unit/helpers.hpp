#pragma once

#include <random>

#include "cmpslab/cmps_coupled.hpp"
#include "cmpslab/cmps_single.hpp"

namespace cmpslab::testing {

inline CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                             double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex{u(rng), u(rng)};
    return m;
}

inline CMatrix random_hermitian(Eigen::Index d, std::mt19937_64& rng, double scale = 1.0) {
    CMatrix m = random_matrix(d, d, rng, scale);
    return (m + m.adjoint()) / 2.0;
}

inline CMatrix random_unitary(Eigen::Index d, std::mt19937_64& rng) {
    Eigen::HouseholderQR<CMatrix> qr(random_matrix(d, d, rng));
    return qr.householderQ() * CMatrix::Identity(d, d);
}

inline CmpsAnsatz random_ansatz(Eigen::Index d, std::mt19937_64& rng, double r_scale = 0.7) {
    return CmpsAnsatz(random_hermitian(d, rng), random_matrix(d, d, rng, r_scale));
}

inline CoupledAnsatz random_coupled(Eigen::Index d, std::size_t pairs, std::mt19937_64& rng) {
    std::vector<ZPair> z;
    for (std::size_t p = 0; p < pairs; ++p) {
        z.push_back({random_hermitian(d, rng, 0.5), random_hermitian(d, rng, 0.5)});
    }
    return CoupledAnsatz(random_hermitian(d, rng), random_hermitian(d, rng),
                         random_matrix(d, d, rng, 0.7), random_matrix(d, d, rng, 0.7), z);
}

// Plain triple loop so the tests do not trust Eigen's product for the oracle.
inline CMatrix naive_product(const CMatrix& a, const CMatrix& b) {
    CMatrix out = CMatrix::Zero(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j)
            for (Eigen::Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
    return out;
}

inline CMatrix naive_adjoint(const CMatrix& a) {
    CMatrix out(a.cols(), a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
    return out;
}

inline double naive_trace_real(const CMatrix& a) {
    Complex t{};
    for (Eigen::Index i = 0; i < a.rows(); ++i) t += a(i, i);
    return t.real();
}

}  // namespace cmpslab::testing
