#include <benchmark/benchmark.h>

#include "cmpslab/bethe.hpp"
#include "cmpslab/luttinger.hpp"
#include "cmpslab/variational.hpp"

using namespace cmpslab;

namespace {

ParamVector start(const ConstrainedProblem& problem) { return random_start(problem, 42); }

void BM_ObjectiveSingle(benchmark::State& state) {
    const auto D = state.range(0);
    const ConstrainedProblem problem = single_field_problem({0.5, 2.0, 1.0}, D);
    const ParamVector v = start(problem);
    PenaltyState penalty{{0.0}, 10.0};
    for (auto _ : state) benchmark::DoNotOptimize(objective(problem, v.values, penalty));
}
BENCHMARK(BM_ObjectiveSingle)->Arg(2)->Arg(4)->Arg(6)->Arg(8);

void BM_ObjectiveCoupled(benchmark::State& state) {
    const auto D = state.range(0);
    const ConstrainedProblem problem = coupled_field_problem({}, D, 2);
    const ParamVector v = start(problem);
    PenaltyState penalty{{0.0, 0.0}, 10.0};
    for (auto _ : state) benchmark::DoNotOptimize(objective(problem, v.values, penalty));
}
BENCHMARK(BM_ObjectiveCoupled)->Arg(2)->Arg(3);

void BM_SteadyStateEigen(benchmark::State& state) {
    const ConstrainedProblem problem = single_field_problem({0.5, 2.0, 1.0}, state.range(0));
    const CmpsAnsatz a = unpack_single(start(problem));
    for (auto _ : state) benchmark::DoNotOptimize(steady_state(a));
}
BENCHMARK(BM_SteadyStateEigen)->Arg(4)->Arg(6)->Arg(8);

void BM_SteadyStateLinearSolve(benchmark::State& state) {
    const ConstrainedProblem problem = single_field_problem({0.5, 2.0, 1.0}, state.range(0));
    const CmpsAnsatz a = unpack_single(start(problem));
    for (auto _ : state) {
        benchmark::DoNotOptimize(steady_state_linear_solve(build_transfer(a), a.bond_dim()));
    }
}
BENCHMARK(BM_SteadyStateLinearSolve)->Arg(4)->Arg(6)->Arg(8);

void BM_GradientFD(benchmark::State& state) {
    const ConstrainedProblem problem = single_field_problem({0.5, 2.0, 1.0}, state.range(0));
    const ParamVector v = start(problem);
    PenaltyState penalty{{0.0}, 10.0};
    for (auto _ : state) benchmark::DoNotOptimize(gradient_fd(problem, v.values, penalty, 1e-5));
}
BENCHMARK(BM_GradientFD)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Bethe(benchmark::State& state) {
    const int nodes = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_bethe(2.0, nodes));
}
BENCHMARK(BM_Bethe)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

// neighbouring density point of a sweep: cold restart against the rescaled neighbour
void BM_SweepPoint(benchmark::State& state) {
    const bool warm = state.range(0) != 0;
    OptimizerConfig cfg;
    cfg.restarts = 1;
    const OptimResult centre = minimize_single({0.5, 2.0, 1.0}, 3, cfg);
    for (auto _ : state) {
        std::optional<ParamVector> init;
        if (warm) init = rescaled_start(centre, 1.03);
        const OptimResult r = minimize_single({0.5, 2.0, 1.03}, 3, cfg, init);
        state.counters["iterations"] = r.iterations;
    }
}
BENCHMARK(BM_SweepPoint)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace

BENCHMARK_MAIN();
