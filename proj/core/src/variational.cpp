#include "cmpslab/variational.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "cmpslab/errors.hpp"

namespace cmpslab {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMaxStep = 1.0;
constexpr int kMaxBacktracks = 40;
constexpr int kStallCount = 3;
constexpr double kMaxSigma = 1e10;
constexpr double kMinConvergedGap = 1e-6;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(restart) + 1));
}

/// Scales K-type blocks by lambda and R/Z blocks by sqrt(lambda): x -> x / lambda.
Eigen::VectorXd rescale_params(const ParamLayout& layout, Eigen::VectorXd v, double lambda) {
    const double root = std::sqrt(lambda);
    for (const auto& block : layout.blocks()) {
        const double factor = block.name.front() == 'K' ? lambda : root;
        v.segment(block.offset, block.length) *= factor;
    }
    return v;
}

double max_violation(const ConstrainedProblem& problem, const PointEvaluation& ev) {
    double worst = 0.0;
    for (std::size_t a = 0; a < problem.targets.size(); ++a) {
        worst = std::max(worst, std::abs(ev.densities[a] - problem.targets[a]));
    }
    return worst;
}

double evaluate_or_inf(const ScalarFunction& f, const Eigen::VectorXd& x) {
    try {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const InfeasiblePoint&) {
        return std::numeric_limits<double>::infinity();
    }
}

struct InnerResult {
    Eigen::VectorXd x;
    double f{};
    int iterations{};
    bool converged{};
};

// BFGS on the inverse Hessian with Armijo backtracking; accepted steps never raise f.
InnerResult bfgs(const ScalarFunction& f, Eigen::VectorXd x, double fx, const OptimizerConfig& cfg,
                 const MinimizeHooks& hooks, int restart, int stage) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd g;
    try {
        g = gradient_fd(f, x, cfg.grad_step);
    } catch (const InfeasiblePoint&) {
        return {std::move(x), fx, 0, false};
    }
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    bool fresh = true;
    int stalled = 0;

    for (int it = 0; it < cfg.max_iters; ++it) {
        if (g.lpNorm<Eigen::Infinity>() == 0.0) {
            return {std::move(x), fx, it, true};
        }
        Eigen::VectorXd d = -H * g;
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            H.setIdentity();
            fresh = true;
            d = -g;
            slope = -g.squaredNorm();
        }
        const double length = d.norm();
        if (length > kMaxStep) {
            d *= kMaxStep / length;
            slope *= kMaxStep / length;
        }

        double alpha = 1.0;
        bool accepted = false;
        Eigen::VectorXd xn;
        double fn = fx;
        for (int k = 0; k < kMaxBacktracks; ++k) {
            xn = x + alpha * d;
            fn = evaluate_or_inf(f, xn);
            if (fn <= fx + kArmijo * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (!fresh) {
                H.setIdentity();
                fresh = true;
                continue;
            }
            // No descent along -g at finite-difference resolution.
            return {std::move(x), fx, it, true};
        }

        Eigen::VectorXd gn;
        try {
            gn = gradient_fd(f, xn, cfg.grad_step);
        } catch (const InfeasiblePoint&) {
            return {std::move(xn), fn, it + 1, false};
        }
        if (hooks.on_step) {
            hooks.on_step({restart, stage, it, fx, fn});
        }

        const Eigen::VectorXd s = xn - x;
        const Eigen::VectorXd y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (fresh) {
                H *= sy / y.squaredNorm();
                fresh = false;
            }
            const Eigen::VectorXd hy = H * y;
            const double yhy = y.dot(hy);
            H += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
                 (hy * s.transpose() + s * hy.transpose()) / sy;
        }

        const double decrease = fx - fn;
        x = std::move(xn);
        fx = fn;
        g = std::move(gn);
        if (decrease <= cfg.energy_tol * (1.0 + std::abs(fx))) {
            if (++stalled >= kStallCount) {
                return {std::move(x), fx, it + 1, true};
            }
        } else {
            stalled = 0;
        }
    }
    return {std::move(x), fx, cfg.max_iters, false};
}

struct StageResult {
    Eigen::VectorXd x;
    PointEvaluation eval;
    int iterations{};
    bool converged{};
};

StageResult augmented_lagrangian(const ConstrainedProblem& problem, Eigen::VectorXd x,
                                 const OptimizerConfig& cfg, const MinimizeHooks& hooks,
                                 int restart) {
    PenaltyState penalty{std::vector<double>(problem.targets.size(), 0.0), cfg.penalty_init};
    PointEvaluation eval = problem.evaluate(x);
    int iterations = 0;
    bool inner_converged = false;
    double violation = max_violation(problem, eval);
    double previous = std::numeric_limits<double>::infinity();

    for (int stage = 0; stage < cfg.max_outer; ++stage) {
        const ScalarFunction f = [&](const Eigen::VectorXd& v) {
            return objective(problem, v, penalty);
        };
        InnerResult inner = bfgs(f, std::move(x), f(x), cfg, hooks, restart, stage);
        x = std::move(inner.x);
        iterations += inner.iterations;
        inner_converged = inner.converged;
        eval = problem.evaluate(x);
        violation = max_violation(problem, eval);
        spdlog::debug("restart {} stage {}: e={:.15g} violation={:.3g} sigma={:.3g} iters={}",
                      restart, stage, eval.energy, violation, penalty.sigma, inner.iterations);
        if (violation <= cfg.constraint_tol && inner_converged) {
            break;
        }
        for (std::size_t a = 0; a < problem.targets.size(); ++a) {
            penalty.multipliers[a] += 2.0 * penalty.sigma * (eval.densities[a] - problem.targets[a]);
        }
        if (violation > 0.25 * previous) {
            penalty.sigma = std::min(penalty.sigma * cfg.penalty_growth, kMaxSigma);
        }
        previous = violation;
    }

    if (problem.project) {
        Eigen::VectorXd projected = problem.project(x, eval);
        try {
            PointEvaluation pe = problem.evaluate(projected);
            x = std::move(projected);
            eval = std::move(pe);
            violation = max_violation(problem, eval);
        } catch (const InfeasiblePoint&) {
        }
    }
    return {std::move(x), std::move(eval), iterations,
            violation <= cfg.constraint_tol && inner_converged};
}

OptimResult finalize(const ConstrainedProblem& problem, StageResult stage, int restart) {
    OptimResult out;
    out.params = ParamVector{stage.x, problem.layout};
    out.iterations = stage.iterations;
    out.restart = restart;
    out.converged = stage.converged;
    out.energy = stage.eval.energy;
    out.densities = stage.eval.densities;

    // Certify with the full spectrum; this also supplies the gap.
    try {
        if (problem.layout.coupled) {
            CoupledAnsatz ansatz = unpack_coupled(out.params);
            const SteadyState ss = steady_state_coupled(ansatz);
            const CoupledObservables obs = observables_coupled(ansatz, ss.rho);
            out.gap = ss.gap;
            out.correlation = density_correlation(obs);
            out.densities = {obs.n1, obs.n2};
            out.ansatz = std::move(ansatz);
        } else {
            CmpsAnsatz ansatz = unpack_single(out.params);
            const SteadyState ss = steady_state(ansatz);
            out.gap = ss.gap;
            out.densities = {local_observables(ansatz, ss.rho).density};
            out.ansatz = std::move(ansatz);
        }
    } catch (const Error& e) {
        spdlog::warn("restart {}: final steady-state certification failed: {}", restart, e.what());
        out.converged = false;
        out.gap = 0.0;
        if (problem.layout.coupled) {
            out.ansatz = unpack_coupled(out.params);
        } else {
            out.ansatz = unpack_single(out.params);
        }
    }
    if (out.gap <= kMinConvergedGap) {
        out.converged = false;
    }
    for (std::size_t a = 0; a < problem.targets.size(); ++a) {
        out.constraint_residuals.push_back(std::abs(out.densities[a] - problem.targets[a]));
    }
    return out;
}

}  // namespace

void OptimizerConfig::validate() const {
    auto fail = [](const char* what) { throw InvalidParams(std::string("OptimizerConfig: ") + what); };
    if (max_iters <= 0) fail("max_iters must be > 0");
    if (!(grad_step > 0.0)) fail("grad_step must be > 0");
    if (!(energy_tol > 0.0)) fail("energy_tol must be > 0");
    if (!(constraint_tol > 0.0)) fail("constraint_tol must be > 0");
    if (!(penalty_init > 0.0)) fail("penalty_init must be > 0");
    if (!(penalty_growth > 1.0)) fail("penalty_growth must be > 1");
    if (restarts <= 0) fail("restarts must be > 0");
    if (max_outer <= 0) fail("max_outer must be > 0");
}

ConstrainedProblem single_field_problem(const ModelParams& params, Eigen::Index D) {
    params.validate();
    if (D <= 0) {
        throw InvalidParams("single_field_problem: D must be positive");
    }
    ConstrainedProblem problem;
    problem.layout = ParamLayout::single(D);
    problem.targets = {params.rho0};
    problem.evaluate = [params, layout = problem.layout](const Eigen::VectorXd& v) {
        try {
            const SingleEvaluation e = evaluate_fast(unpack_single({v, layout}), params);
            return PointEvaluation{e.energy, {e.observables.density}};
        } catch (const DegenerateNullSpace& ex) {
            throw InfeasiblePoint(ex.what());
        } catch (const NonPositiveSteadyState& ex) {
            throw InfeasiblePoint(ex.what());
        } catch (const NegativeObservable& ex) {
            throw InfeasiblePoint(ex.what());
        }
    };
    // The exact rescaling x -> x / lambda lands on the target density.
    problem.project = [params, layout = problem.layout](const Eigen::VectorXd& v,
                                                        const PointEvaluation& ev) {
        if (!(ev.densities[0] > 0.0)) {
            return v;
        }
        return rescale_params(layout, v, params.rho0 / ev.densities[0]);
    };
    return problem;
}

ConstrainedProblem coupled_field_problem(const CoupledModelParams& params, Eigen::Index D,
                                         std::size_t P) {
    params.validate();
    if (D <= 0) {
        throw InvalidParams("coupled_field_problem: D must be positive");
    }
    ConstrainedProblem problem;
    problem.layout = ParamLayout::two_field(D, P);
    problem.targets = {params.rho01, params.rho02};
    problem.evaluate = [params, layout = problem.layout](const Eigen::VectorXd& v) {
        try {
            const CoupledEvaluation e = evaluate_fast(unpack_coupled({v, layout}), params);
            return PointEvaluation{e.energy, {e.observables.n1, e.observables.n2}};
        } catch (const DegenerateNullSpace& ex) {
            throw InfeasiblePoint(ex.what());
        } catch (const NonPositiveSteadyState& ex) {
            throw InfeasiblePoint(ex.what());
        } catch (const NegativeObservable& ex) {
            throw InfeasiblePoint(ex.what());
        }
    };
    return problem;
}

double objective(const ConstrainedProblem& problem, const Eigen::VectorXd& v,
                 const PenaltyState& penalty) {
    const PointEvaluation ev = problem.evaluate(v);
    double value = ev.energy;
    for (std::size_t a = 0; a < problem.targets.size(); ++a) {
        const double dev = ev.densities[a] - problem.targets[a];
        const double mu = a < penalty.multipliers.size() ? penalty.multipliers[a] : 0.0;
        value += mu * dev + penalty.sigma * dev * dev;
    }
    return value;
}

Eigen::VectorXd gradient_fd(const ScalarFunction& f, const Eigen::VectorXd& v, double h) {
    Eigen::VectorXd grad(v.size());
    Eigen::VectorXd probe = v;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        probe(i) = v(i) + h;
        const double up = f(probe);
        probe(i) = v(i) - h;
        const double down = f(probe);
        probe(i) = v(i);
        grad(i) = (up - down) / (2.0 * h);
    }
    return grad;
}

Eigen::VectorXd gradient_fd(const ConstrainedProblem& problem, const Eigen::VectorXd& v,
                            const PenaltyState& penalty, double h) {
    return gradient_fd([&](const Eigen::VectorXd& x) { return objective(problem, x, penalty); }, v,
                       h);
}

ParamVector random_start(const ConstrainedProblem& problem, std::uint64_t seed, double z_scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-0.5, 0.5);
    const auto blocks = problem.layout.blocks();
    double target = 0.0;
    for (double t : problem.targets) target += t;

    for (int attempt = 0; attempt < 64; ++attempt) {
        Eigen::VectorXd v(problem.layout.size());
        for (const auto& block : blocks) {
            const double scale = block.name.front() == 'Z' ? z_scale : 1.0;
            for (Eigen::Index i = 0; i < block.length; ++i) {
                v(block.offset + i) = scale * uniform(rng);
            }
        }
        try {
            const PointEvaluation ev = problem.evaluate(v);
            double total = 0.0;
            for (double n : ev.densities) total += n;
            if (!(total > 0.0)) {
                continue;
            }
            Eigen::VectorXd scaled = rescale_params(problem.layout, std::move(v), target / total);
            problem.evaluate(scaled);
            return {std::move(scaled), problem.layout};
        } catch (const InfeasiblePoint&) {
        }
    }
    throw AllRestartsInfeasible("random_start: no feasible random point in 64 draws");
}

OptimResult minimize(const ConstrainedProblem& problem, const std::optional<ParamVector>& initial,
                     const OptimizerConfig& config, const MinimizeHooks& hooks) {
    config.validate();
    if (initial && !(initial->layout == problem.layout &&
                     initial->values.size() == problem.layout.size())) {
        throw LayoutMismatch("minimize: initial vector does not match the problem layout");
    }

    std::optional<OptimResult> best;
    for (int r = 0; r < config.restarts; ++r) {
        const std::uint64_t seed = restart_seed(config.seed, r);
        OptimResult candidate;
        try {
            Eigen::VectorXd x0 = (r == 0 && initial) ? initial->values
                                                     : random_start(problem, seed).values;
            candidate = finalize(problem, augmented_lagrangian(problem, std::move(x0), config, hooks, r),
                                 r);
        } catch (const InfeasiblePoint& e) {
            spdlog::debug("restart {} rejected: {}", r, e.what());
            continue;
        } catch (const AllRestartsInfeasible& e) {
            spdlog::debug("restart {} rejected: {}", r, e.what());
            continue;
        }
        spdlog::debug("restart {}: e={:.15g} converged={} gap={:.3g} iters={}", r, candidate.energy,
                      candidate.converged, candidate.gap, candidate.iterations);
        const bool better =
            !best || (candidate.converged && !best->converged) ||
            (candidate.converged == best->converged && candidate.energy < best->energy);
        if (better) {
            best = std::move(candidate);
        }
    }
    if (!best) {
        throw AllRestartsInfeasible("minimize: every restart hit an infeasible point");
    }
    return std::move(*best);
}

OptimResult minimize_single(const ModelParams& params, Eigen::Index D,
                            const OptimizerConfig& config, const std::optional<ParamVector>& initial,
                            const MinimizeHooks& hooks) {
    return minimize(single_field_problem(params, D), initial, config, hooks);
}

OptimResult minimize_coupled(const CoupledModelParams& params, Eigen::Index D, std::size_t P,
                             const OptimizerConfig& config,
                             const std::optional<ParamVector>& initial,
                             const MinimizeHooks& hooks) {
    return minimize(coupled_field_problem(params, D, P), initial, config, hooks);
}

ParamVector warm_start_coupled(const OptimResult& single1, const OptimResult& single2,
                               std::size_t P, std::uint64_t seed, double z_scale) {
    const CmpsAnsatz& a = single1.single();
    const CmpsAnsatz& b = single2.single();
    if (a.bond_dim() != b.bond_dim()) {
        throw InvalidAnsatz("warm_start_coupled: single-field bond dimensions differ");
    }
    ParamVector v = pack(CoupledAnsatz::separable(a, b, P));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (const auto& block : v.layout.blocks()) {
        if (block.name.front() != 'Z') continue;
        for (Eigen::Index i = 0; i < block.length; ++i) {
            v.values(block.offset + i) = z_scale * uniform(rng);
        }
    }
    return v;
}

}  // namespace cmpslab
