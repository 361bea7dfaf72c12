#include <gtest/gtest.h>

#include <cmath>

#include "cmpslab/cmps_single.hpp"
#include "cmpslab/errors.hpp"
#include "helpers.hpp"

using namespace cmpslab;
using namespace cmpslab::testing;

namespace {

CMatrix scalar(Complex x) {
    CMatrix m(1, 1);
    m(0, 0) = x;
    return m;
}

double gauge_residual(const CmpsAnsatz& a) {
    const CMatrix q = build_Q(a);
    return (q + q.adjoint() + a.R.adjoint() * a.R).norm();
}

}  // namespace

TEST(CmpsAnsatz, RejectsBadInput) {
    std::mt19937_64 rng(1);
    EXPECT_THROW(CmpsAnsatz(random_matrix(2, 2, rng), random_matrix(2, 2, rng)), InvalidAnsatz);
    EXPECT_THROW(CmpsAnsatz(random_hermitian(2, rng), random_matrix(3, 3, rng)), InvalidAnsatz);
    EXPECT_THROW(CmpsAnsatz(CMatrix::Zero(2, 3), CMatrix::Zero(2, 3)), InvalidAnsatz);
}

TEST(ModelParams, Validate) {
    EXPECT_NO_THROW((ModelParams{0.5, 0.0, 1.0}.validate()));
    EXPECT_THROW((ModelParams{0.0, 1.0, 1.0}.validate()), InvalidParams);
    EXPECT_THROW((ModelParams{0.5, -1.0, 1.0}.validate()), InvalidParams);
    EXPECT_THROW((ModelParams{0.5, 1.0, 0.0}.validate()), InvalidParams);
}

TEST(BuildQ, ZeroAnsatz) {
    EXPECT_EQ(build_Q(CmpsAnsatz(CMatrix::Zero(2, 2), CMatrix::Zero(2, 2))).norm(), 0.0);
}

TEST(BuildQ, ScalarCase) {
    const double kappa = 0.7;
    const Complex r{0.4, -1.1};
    const CMatrix q = build_Q(CmpsAnsatz(scalar(kappa), scalar(r)));
    EXPECT_NEAR(std::abs(q(0, 0) - Complex{-std::norm(r) / 2, -kappa}), 0.0, 1e-15);
}

TEST(BuildQProperty, GaugeResidual) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        EXPECT_LT(gauge_residual(random_ansatz(4, rng)), 1e-13);
    }
}

TEST(BuildTransfer, ScalarAndZeroCases) {
    const CMatrix t = build_transfer(CmpsAnsatz(scalar(0.3), scalar(Complex{0.8, 0.2})));
    ASSERT_EQ(t.rows(), 1);
    EXPECT_LT(std::abs(t(0, 0)), 1e-15);
    EXPECT_EQ(build_transfer(CmpsAnsatz(CMatrix::Zero(3, 3), CMatrix::Zero(3, 3))).norm(), 0.0);
}

TEST(BuildTransferProperty, IdentityIsLeftNull) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = 2 + trial % 3;
        const CMatrix t = build_transfer(random_ansatz(d, rng));
        const CRowVector one = vectorize(CMatrix::Identity(d, d)).transpose();
        EXPECT_LT((one * t).norm(), 1e-11);
    }
}

TEST(SteadyState, ScalarIsOne) {
    const SteadyState ss = steady_state(CmpsAnsatz(scalar(1.0), scalar(0.5)));
    EXPECT_NEAR(std::abs(ss.rho(0, 0) - Complex{1.0}), 0.0, 1e-14);
    EXPECT_TRUE(std::isinf(ss.gap));
}

TEST(SteadyState, NoDissipationIsDegenerate) {
    std::mt19937_64 rng(4);
    for (Eigen::Index d : {2, 3}) {
        EXPECT_THROW(steady_state(CmpsAnsatz(random_hermitian(d, rng), CMatrix::Zero(d, d))),
                     DegenerateNullSpace);
    }
}

TEST(SteadyStateProperty, InvariantsOnRandomAnsatz) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const CmpsAnsatz a = random_ansatz(4, rng);
        const SteadyState ss = steady_state(a);
        EXPECT_NEAR(ss.rho.trace().real(), 1.0, 1e-10);
        EXPECT_NEAR(ss.rho.trace().imag(), 0.0, 1e-10);
        EXPECT_LT((ss.rho - ss.rho.adjoint()).norm(), 1e-10);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(ss.rho);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
        EXPECT_LT(ss.residual, 1e-9);
        EXPECT_LT((build_transfer(a) * vectorize(ss.rho)).norm(), 1e-9);
        // the Lindblad form directly
        const CMatrix lind = Complex{0, -1} * (a.K * ss.rho - ss.rho * a.K) + a.R * ss.rho * a.R.adjoint() -
                             0.5 * (a.R.adjoint() * a.R * ss.rho + ss.rho * a.R.adjoint() * a.R);
        EXPECT_LT(lind.norm(), 1e-9);
    }
}

TEST(Observables, ScalarValues) {
    const Complex r{0.6, 0.8};  // |r| = 1... scaled below
    const CmpsAnsatz a(scalar(0.2), scalar(0.9 * r));
    const SteadyState ss = steady_state(a);
    EXPECT_NEAR(density(a, ss), 0.81, 1e-14);
    EXPECT_NEAR(kinetic_density(a, ss), 0.0, 1e-14);
    EXPECT_NEAR(pair_density(a, ss), 0.81 * 0.81, 1e-14);
}

TEST(Observables, ZeroWithoutR) {
    const CmpsAnsatz a(scalar(0.2), scalar(0.0));
    const SteadyState ss = steady_state(a);
    EXPECT_EQ(density(a, ss), 0.0);
    EXPECT_EQ(kinetic_density(a, ss), 0.0);
    EXPECT_EQ(pair_density(a, ss), 0.0);
}

TEST(Observables, NilpotentRHasNoPairs) {
    CMatrix r = CMatrix::Zero(2, 2);
    r(0, 1) = 1.0;
    CMatrix k = CMatrix::Zero(2, 2);
    k(0, 1) = k(1, 0) = 0.4;
    const CmpsAnsatz a(k, r);
    const SteadyState ss = steady_state(a);
    EXPECT_NEAR(pair_density(a, ss), 0.0, 1e-14);
    EXPECT_GT(density(a, ss), 0.0);
}

TEST(Observables, MatchNaiveReferenceProducts) {
    std::mt19937_64 rng(6);
    for (Eigen::Index d : {2, 3}) {
        const CmpsAnsatz a = random_ansatz(d, rng);
        const SteadyState ss = steady_state(a);
        const CMatrix rd = naive_adjoint(a.R);
        const CMatrix q = Complex{0, -1} * a.K - 0.5 * naive_product(rd, a.R);
        const CMatrix comm = naive_product(q, a.R) - naive_product(a.R, q);
        const double n = naive_trace_real(naive_product(naive_product(rd, a.R), ss.rho));
        const double kin =
            naive_trace_real(naive_product(naive_product(naive_adjoint(comm), comm), ss.rho));
        const CMatrix r2 = naive_product(a.R, a.R);
        const double pair = naive_trace_real(naive_product(naive_product(naive_adjoint(r2), r2), ss.rho));
        EXPECT_NEAR(density(a, ss), n, 1e-12);
        EXPECT_NEAR(kinetic_density(a, ss), kin, 1e-12);
        EXPECT_NEAR(pair_density(a, ss), pair, 1e-12);
        EXPECT_GE(kinetic_density(a, ss), 0.0);
    }
}

TEST(EnergyDensity, CoherentStateMeanField) {
    for (double kappa : {0.0, 1.3, -2.0}) {
        const ModelParams p{0.5, 1.7, 1.4};
        const CmpsAnsatz a(scalar(kappa), scalar(std::sqrt(p.rho0)));
        EXPECT_NEAR(energy_density(a, p), p.c * p.rho0 * p.rho0, 1e-12);
    }
    EXPECT_EQ(energy_density(CmpsAnsatz(scalar(0.4), scalar(1.0)), ModelParams{0.5, 0.0, 1.0}), 0.0);
}

TEST(EnergyDensity, FastPathMatchesSpectralPath) {
    std::mt19937_64 rng(7);
    const ModelParams p{0.5, 2.0, 1.0};
    for (int trial = 0; trial < 5; ++trial) {
        const CmpsAnsatz a = random_ansatz(4, rng);
        EXPECT_NEAR(evaluate_fast(a, p).energy, energy_density(a, p), 1e-10);
    }
}

TEST(Rescaling, ScalesObservablesExactly) {
    std::mt19937_64 rng(8);
    const CmpsAnsatz a = random_ansatz(3, rng);
    const double lambda = 1.7;
    const CmpsAnsatz b = a.rescaled(lambda);
    const auto oa = local_observables(a, steady_state(a).rho);
    const auto ob = local_observables(b, steady_state(b).rho);
    EXPECT_NEAR(ob.density, lambda * oa.density, 1e-10);
    EXPECT_NEAR(ob.kinetic_density, std::pow(lambda, 3) * oa.kinetic_density, 1e-9);
    EXPECT_NEAR(ob.pair_density, lambda * lambda * oa.pair_density, 1e-10);
}

TEST(GaugeCovariance, UnitaryConjugationLeavesObservables) {
    std::mt19937_64 rng(9);
    const ModelParams p{0.5, 1.3, 1.0};
    for (int trial = 0; trial < 5; ++trial) {
        const CmpsAnsatz a = random_ansatz(4, rng);
        const CMatrix u = random_unitary(4, rng);
        const CMatrix k = u * a.K * u.adjoint();
        const CmpsAnsatz b(hermitize(k), u * a.R * u.adjoint());
        const auto oa = local_observables(a, steady_state(a).rho);
        const auto ob = local_observables(b, steady_state(b).rho);
        EXPECT_NEAR(oa.density, ob.density, 1e-9);
        EXPECT_NEAR(oa.kinetic_density, ob.kinetic_density, 1e-9);
        EXPECT_NEAR(oa.pair_density, ob.pair_density, 1e-9);
        EXPECT_NEAR(energy_density(a, p), energy_density(b, p), 1e-9);
    }
}

TEST(NonnegativeTrace, ClipsNoiseAndRejectsNegatives) {
    const CMatrix rho = CMatrix::Identity(1, 1);
    EXPECT_EQ(nonnegative_trace(scalar(-1e-12), rho, "x"), 0.0);
    EXPECT_THROW(nonnegative_trace(scalar(-1e-6), rho, "x"), NegativeObservable);
}
