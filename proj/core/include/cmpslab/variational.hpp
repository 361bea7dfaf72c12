#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "cmpslab/cmps_coupled.hpp"
#include "cmpslab/cmps_single.hpp"
#include "cmpslab/param_layout.hpp"

namespace cmpslab {

struct OptimizerConfig {
    int max_iters{3000};          // quasi-Newton iterations per augmented-Lagrangian stage
    double grad_step{1e-5};       // central finite-difference step
    double energy_tol{1e-13};     // relative objective decrease that counts as stalled
    double constraint_tol{1e-8};  // max |n_alpha - rho0_alpha| for convergence
    double penalty_init{10.0};
    double penalty_growth{10.0};
    int restarts{8};
    std::uint64_t seed{1};
    int max_outer{30};  // augmented-Lagrangian stages

    /// Throws InvalidParams unless every field is positive and penalty_growth > 1.
    void validate() const;
};

/// Multipliers and quadratic penalty weight of the augmented Lagrangian.
struct PenaltyState {
    std::vector<double> multipliers;
    double sigma{10.0};
};

struct PointEvaluation {
    double energy{};
    std::vector<double> densities;
};

/// Energy functional with density targets over a flat parameter layout.
struct ConstrainedProblem {
    ParamLayout layout;
    std::vector<double> targets;
    /// Throws InfeasiblePoint when the steady state is degenerate or unusable.
    std::function<PointEvaluation(const Eigen::VectorXd&)> evaluate;
    /// Optional exact map onto the constraint surface, applied once after the last stage.
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const PointEvaluation&)> project;
};

ConstrainedProblem single_field_problem(const ModelParams& params, Eigen::Index D);
ConstrainedProblem coupled_field_problem(const CoupledModelParams& params, Eigen::Index D,
                                         std::size_t P);

/// e(v) + sum_alpha [ mu_alpha (n_alpha - rho0_alpha) + sigma (n_alpha - rho0_alpha)^2 ]
double objective(const ConstrainedProblem& problem, const Eigen::VectorXd& v,
                 const PenaltyState& penalty);

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;

/// Central differences (f(v + h e_i) - f(v - h e_i)) / 2h. Exceptions from f propagate.
Eigen::VectorXd gradient_fd(const ScalarFunction& f, const Eigen::VectorXd& v, double h);
Eigen::VectorXd gradient_fd(const ConstrainedProblem& problem, const Eigen::VectorXd& v,
                            const PenaltyState& penalty, double h);

/// One accepted quasi-Newton step, reported to MinimizeHooks::on_step.
struct StepRecord {
    int restart{};
    int stage{};
    int iteration{};
    double objective_before{};
    double objective_after{};
};

struct MinimizeHooks {
    std::function<void(const StepRecord&)> on_step;
};

struct OptimResult {
    std::variant<CmpsAnsatz, CoupledAnsatz> ansatz;
    ParamVector params;
    double energy{};
    std::vector<double> densities;
    std::vector<double> constraint_residuals;  // |n_alpha - rho0_alpha|
    int iterations{};
    bool converged{false};
    double gap{};
    double correlation{};  // |Delta rho^2| for coupled results, 0 otherwise
    int restart{};         // index of the restart that produced this result

    const CmpsAnsatz& single() const { return std::get<CmpsAnsatz>(ansatz); }
    const CoupledAnsatz& coupled() const { return std::get<CoupledAnsatz>(ansatz); }
};

/// Random start: entries uniform in [-0.5, 0.5] (Z entries scaled by z_scale), then the
/// exact rescaling (lambda K, sqrt(lambda) R) that puts the mean density on target.
ParamVector random_start(const ConstrainedProblem& problem, std::uint64_t seed,
                         double z_scale = 0.1);

/// Augmented-Lagrangian minimization with BFGS inner loops. The first restart starts
/// from `initial` when given; the others from random_start with derived seeds. The best
/// result (converged first, then lowest energy) is returned; converged=false if none
/// converged. Throws AllRestartsInfeasible when no restart yields a feasible point.
OptimResult minimize(const ConstrainedProblem& problem, const std::optional<ParamVector>& initial,
                     const OptimizerConfig& config, const MinimizeHooks& hooks = {});

OptimResult minimize_single(const ModelParams& params, Eigen::Index D,
                            const OptimizerConfig& config,
                            const std::optional<ParamVector>& initial = std::nullopt,
                            const MinimizeHooks& hooks = {});

OptimResult minimize_coupled(const CoupledModelParams& params, Eigen::Index D, std::size_t P,
                             const OptimizerConfig& config,
                             const std::optional<ParamVector>& initial = std::nullopt,
                             const MinimizeHooks& hooks = {});

/// Coupled starting point from two single-field optima: K and R copied, Z entries
/// zero-mean uniform with magnitude up to z_scale.
ParamVector warm_start_coupled(const OptimResult& single1, const OptimResult& single2,
                               std::size_t P, std::uint64_t seed, double z_scale = 1e-2);

}  // namespace cmpslab
