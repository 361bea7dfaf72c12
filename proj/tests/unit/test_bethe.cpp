#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cmpslab/bethe.hpp"
#include "cmpslab/errors.hpp"

using namespace cmpslab;

namespace {
constexpr double kTonks = std::numbers::pi * std::numbers::pi / 3.0;
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
    const auto q = gauss_legendre(8);
    double s0 = 0, s2 = 0, s14 = 0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        s0 += q.weights[i];
        s2 += q.weights[i] * q.nodes[i] * q.nodes[i];
        s14 += q.weights[i] * std::pow(q.nodes[i], 14);
    }
    EXPECT_NEAR(s0, 2.0, 1e-14);
    EXPECT_NEAR(s2, 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(s14, 2.0 / 15.0, 1e-14);
}

TEST(SolveBethe, TonksGirardeauLimit) {
    const BetheSolution s = solve_bethe(1e4);
    EXPECT_LT(std::abs(s.e_dimensionless - kTonks) / kTonks, 5e-3);
}

TEST(SolveBethe, WeakCouplingSeries) {
    const double g = 0.1;
    const double series = g - 4.0 * std::pow(g, 1.5) / (3.0 * std::numbers::pi);
    EXPECT_LT(std::abs(solve_bethe(g).e_dimensionless - series) / series, 1e-2);
}

TEST(SolveBethe, NodeDoublingConverged) {
    EXPECT_LT(std::abs(solve_bethe(2.0, 128).e_dimensionless - solve_bethe(2.0, 256).e_dimensionless), 1e-8);
    EXPECT_LT(solve_bethe(2.0).residual, 1e-8);
}

TEST(SolveBethe, SolutionIsSelfConsistent) {
    const BetheSolution s = solve_bethe(3.0);
    const auto at = bethe_at_lambda(s.lambda, s.quad_nodes);
    EXPECT_NEAR(at.gamma, 3.0, 1e-10);
    EXPECT_NEAR(at.e, s.e_dimensionless, 1e-12);
}

TEST(SolveBetheProperty, IncreasingAndBounded) {
    double prev = 0.0;
    for (double g : {0.05, 0.1, 0.3, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 1000.0}) {
        const double e = solve_bethe(g).e_dimensionless;
        EXPECT_GT(e, prev);
        EXPECT_LE(e, kTonks);
        prev = e;
    }
}

TEST(SolveBethe, Preconditions) {
    EXPECT_THROW(solve_bethe(0.0), InvalidParams);
    EXPECT_THROW(solve_bethe(-1.0), InvalidParams);
    EXPECT_THROW(solve_bethe(1.0, 32), InvalidParams);
    EXPECT_THROW(solve_bethe(2.0, 64, 1e-30), NoConvergence);
}

TEST(EnergyDensityExact, Conventions) {
    EXPECT_EQ(energy_density_exact(1.3, ModelParams{0.5, 0.0, 1.0}), 0.0);
    EXPECT_NEAR(energy_density_exact(1.0, ModelParams{0.5, 2.0, 1.0}), solve_bethe(2.0).e_dimensionless, 1e-14);
    EXPECT_NEAR(lieb_liniger_gamma(0.5, 2.0, 1.0), 2.0, 1e-15);
    EXPECT_NEAR(lieb_liniger_gamma(1.0, 2.0, 0.5), 8.0, 1e-15);
}

TEST(EnergyDensityExact, ScalingIdentity) {
    // gamma depends on c / rho only: e0(l rho; c) = l^3 e0(rho; c / l)
    const double lambda = 1.7, rho = 0.9, c = 2.3;
    const double lhs = energy_density_exact(lambda * rho, ModelParams{0.5, c, 1.0});
    const double rhs = std::pow(lambda, 3) * energy_density_exact(rho, ModelParams{0.5, c / lambda, 1.0});
    EXPECT_NEAR(lhs, rhs, 1e-8 * lhs);
}

TEST(EnergyDensityExact, MassScaling) {
    // e0 = e(2Mc/rho) rho^3 / (2M)
    const double e = energy_density_exact(1.0, ModelParams{1.0, 1.0, 1.0});
    EXPECT_NEAR(e, solve_bethe(2.0).e_dimensionless / 2.0, 1e-13);
}
