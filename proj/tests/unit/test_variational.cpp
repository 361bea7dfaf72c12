#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cmpslab/errors.hpp"
#include "cmpslab/variational.hpp"
#include "helpers.hpp"

using namespace cmpslab;
using namespace cmpslab::testing;

namespace {

CMatrix scalar(Complex x) {
    CMatrix m(1, 1);
    m(0, 0) = x;
    return m;
}

OptimizerConfig quick(int restarts = 2) {
    OptimizerConfig c;
    c.restarts = restarts;
    return c;
}

}  // namespace

TEST(OptimizerConfig, Validate) {
    EXPECT_NO_THROW(OptimizerConfig{}.validate());
    OptimizerConfig c;
    c.penalty_growth = 1.0;
    EXPECT_THROW(c.validate(), InvalidParams);
    c = {};
    c.restarts = 0;
    EXPECT_THROW(c.validate(), InvalidParams);
    c = {};
    c.grad_step = -1e-5;
    EXPECT_THROW(c.validate(), InvalidParams);
}

TEST(Objective, EqualsEnergyAtFeasiblePoint) {
    const ModelParams p{0.5, 1.5, 1.2};
    const auto problem = single_field_problem(p, 1);
    const ParamVector v = pack(CmpsAnsatz(scalar(0.3), scalar(std::sqrt(p.rho0))));
    const PenaltyState penalty{{0.0}, 50.0};
    EXPECT_NEAR(objective(problem, v.values, penalty), p.c * p.rho0 * p.rho0, 1e-12);
}

TEST(Objective, PenaltyAddsAtLeastOne) {
    const ModelParams p{0.5, 1.0, 1.0};
    const auto problem = single_field_problem(p, 1);
    const ParamVector v = pack(CmpsAnsatz(scalar(0.0), scalar(std::sqrt(1.1))));
    const double e = energy_density(unpack_single(v), p);
    EXPECT_GE(objective(problem, v.values, PenaltyState{{0.0}, 100.0}) - e, 1.0 - 1e-12);
}

TEST(GradientFd, QuadraticFunction) {
    Eigen::VectorXd v(4);
    v << 0.3, -1.2, 2.0, 0.01;
    const Eigen::VectorXd g = gradient_fd([](const Eigen::VectorXd& x) { return x.squaredNorm(); }, v, 1e-5);
    EXPECT_LT((g - 2.0 * v).norm(), 1e-8);
}

TEST(GradientFd, VanishesAtD1Minimum) {
    const ModelParams p{0.5, 1.5, 1.0};
    const auto problem = single_field_problem(p, 1);
    const ParamVector v = pack(CmpsAnsatz(scalar(0.2), scalar(std::sqrt(p.rho0))));
    // multiplier of the constrained minimum of c n^2 at n = rho0
    const PenaltyState penalty{{-2.0 * p.c * p.rho0}, 10.0};
    EXPECT_LT(gradient_fd(problem, v.values, penalty, 1e-5).norm(), 1e-4);
}

TEST(GradientFd, MatchesRichardsonEstimate) {
    std::mt19937_64 rng(3);
    const ModelParams p{0.5, 2.0, 1.0};
    const auto problem = single_field_problem(p, 3);
    const ParamVector v = random_start(problem, 17);
    const PenaltyState penalty{{0.3}, 10.0};
    const Eigen::VectorXd g = gradient_fd(problem, v.values, penalty, 1e-5);
    auto f = [&](const Eigen::VectorXd& x) { return objective(problem, x, penalty); };
    for (Eigen::Index i : {0, 1, 4}) {  // entries of the K block
        const double h = 1e-3;
        Eigen::VectorXd e = Eigen::VectorXd::Zero(v.values.size());
        e(i) = 1.0;
        const double rich = (-f(v.values + 2 * h * e) + 8 * f(v.values + h * e) - 8 * f(v.values - h * e) +
                             f(v.values - 2 * h * e)) /
                            (12 * h);
        EXPECT_LT(std::abs(g(i) - rich), 1e-5 * std::max(1.0, std::abs(rich))) << "component " << i;
    }
}

TEST(GradientFd, InfeasibleProbePropagates) {
    const ModelParams p{0.5, 1.0, 1.0};
    const auto problem = single_field_problem(p, 2);
    // R = 0 has a degenerate steady state
    const ParamVector v{Eigen::VectorXd::Zero(12), ParamLayout::single(2)};
    EXPECT_THROW(objective(problem, v.values, PenaltyState{{0.0}, 10.0}), InfeasiblePoint);
    EXPECT_THROW(gradient_fd(problem, v.values, PenaltyState{{0.0}, 10.0}, 1e-5), InfeasiblePoint);
}

TEST(RandomStart, HitsTargetDensity) {
    const ModelParams p{0.5, 1.0, 0.8};
    const auto problem = single_field_problem(p, 3);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const ParamVector v = random_start(problem, seed);
        const PointEvaluation e = problem.evaluate(v.values);
        EXPECT_NEAR(e.densities[0], p.rho0, 1e-9);
    }
    EXPECT_EQ(random_start(problem, 5).values, random_start(problem, 5).values);
}

TEST(Minimize, D1ClosedForm) {
    const ModelParams p{0.5, 1.5, 1.0};
    const OptimResult r = minimize_single(p, 1, quick());
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.energy, p.c * p.rho0 * p.rho0, 1e-6 * p.c);
    EXPECT_LT(std::abs(r.densities[0] - p.rho0), 1e-6);
}

TEST(Minimize, FreeGasHasZeroEnergy) {
    for (double rho : {0.5, 1.0, 2.0}) {
        const OptimResult r = minimize_single(ModelParams{0.5, 0.0, rho}, 2, quick());
        EXPECT_LT(r.energy, 1e-6) << "rho=" << rho;
        EXPECT_LT(std::abs(r.densities[0] - rho), 1e-6);
    }
}

TEST(Minimize, ConvergedResultsSatisfyConstraintsAndGap) {
    OptimizerConfig c = quick();
    const OptimResult r = minimize_single(ModelParams{0.5, 2.0, 1.0}, 2, c);
    ASSERT_TRUE(r.converged);
    for (double res : r.constraint_residuals) EXPECT_LE(res, c.constraint_tol);
    EXPECT_GT(r.gap, 1e-6);
}

TEST(Minimize, AcceptedStepsNeverIncreaseObjective) {
    std::size_t steps = 0;
    MinimizeHooks hooks;
    hooks.on_step = [&](const StepRecord& s) {
        ++steps;
        EXPECT_LE(s.objective_after, s.objective_before)
            << "restart " << s.restart << " stage " << s.stage << " iteration " << s.iteration;
    };
    minimize_single(ModelParams{0.5, 2.0, 1.0}, 3, quick(), std::nullopt, hooks);
    minimize_coupled(CoupledModelParams{0.5, 1.5, 0.5, 0.63, 0.63}, 2, 1, quick(1), std::nullopt, hooks);
    EXPECT_GT(steps, 100u);
}

TEST(Minimize, DeterministicUnderFixedSeed) {
    OptimizerConfig c = quick();
    c.seed = 42;
    const OptimResult a = minimize_single(ModelParams{0.5, 2.0, 1.0}, 2, c);
    const OptimResult b = minimize_single(ModelParams{0.5, 2.0, 1.0}, 2, c);
    EXPECT_EQ(a.energy, b.energy);
    EXPECT_EQ(a.params.values, b.params.values);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(a.restart, b.restart);
}

TEST(Minimize, CoupledD1ClosedForm) {
    const CoupledModelParams p{0.5, 1.5, 0.7, 0.63, 0.5};
    const OptimResult r = minimize_coupled(p, 1, 0, quick());
    const double exact = p.c * (p.rho01 * p.rho01 + p.rho02 * p.rho02) + p.g * p.rho01 * p.rho02;
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.energy, exact, 1e-6 * exact);
}

TEST(Minimize, RejectsInvalidInput) {
    EXPECT_THROW(minimize_single(ModelParams{0.5, 1.0, -1.0}, 2, quick()), InvalidParams);
    OptimizerConfig c = quick();
    c.penalty_growth = 0.5;
    EXPECT_THROW(minimize_single(ModelParams{}, 2, c), InvalidParams);
    EXPECT_THROW(minimize_single(ModelParams{}, 2, quick(), ParamVector{Eigen::VectorXd::Zero(3), ParamLayout::single(1)}),
                 LayoutMismatch);
}

TEST(WarmStartCoupled, SeparableEnergyAndLength) {
    const CoupledModelParams p{0.5, 1.5, 0.0, 0.63, 0.63};
    const OptimResult s = minimize_single(p.species(1), 2, quick());
    for (std::size_t P : {0u, 2u}) {
        const ParamVector w = warm_start_coupled(s, s, P, 7, 0.0);
        EXPECT_EQ(w.values.size(), ParamLayout::two_field(2, P).size());
        EXPECT_EQ(w.layout.paper_parameter_count(), static_cast<Eigen::Index>(4 + 2 * P) * 4);
        EXPECT_NEAR(energy_density_coupled(unpack_coupled(w), p), 2.0 * s.energy, 1e-9);
    }
    const ParamVector noisy = warm_start_coupled(s, s, 2, 7);
    const CoupledAnsatz a = unpack_coupled(noisy);
    EXPECT_GT(a.Z[0].z1.norm(), 0.0);
    EXPECT_LE(a.Z[0].z1.cwiseAbs().maxCoeff(), 1e-2 * std::sqrt(2.0) + 1e-15);
}

TEST(WarmStartCoupled, FewerIterationsThanColdStart) {
    const CoupledModelParams p{0.5, 1.5, 0.1, 0.63, 0.63};
    OptimizerConfig c = quick(1);
    const OptimResult s = minimize_single(p.species(1), 2, quick());
    std::vector<int> warm, cold;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        c.seed = seed;
        warm.push_back(minimize_coupled(p, 2, 1, c, warm_start_coupled(s, s, 1, seed)).iterations);
        cold.push_back(minimize_coupled(p, 2, 1, c).iterations);
    }
    std::nth_element(warm.begin(), warm.begin() + 2, warm.end());
    std::nth_element(cold.begin(), cold.begin() + 2, cold.end());
    EXPECT_LT(warm[2], cold[2]);
}
