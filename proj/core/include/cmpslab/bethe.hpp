#pragma once

#include <optional>
#include <vector>

#include "cmpslab/cmps_single.hpp"

namespace cmpslab {

inline constexpr int kDefaultBetheNodes = 256;

/// Ground state of the Lieb-Liniger gas from the Bethe-ansatz integral equation
///
///   g(x) - (1/2pi) int_{-1}^{1} 2 lambda g(y) / (lambda^2 + (x-y)^2) dy = 1/(2pi),
///   gamma = lambda / int g,   e(gamma) = (gamma/lambda)^3 int x^2 g,
///
/// in units hbar = 2M = rho = 1, so that the energy density is e(gamma) rho^3 / (2M).
struct BetheSolution {
    double gamma{};
    double lambda{};          // rapidity cutoff ratio solving gamma(lambda) = gamma
    double e_dimensionless{};
    int quad_nodes{};
    double residual{};        // |e(n) - e(2n)|
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n);

/// Nystrom solve at fixed lambda: returns (gamma, e) on n nodes.
struct BetheAtLambda {
    double gamma{};
    double e{};
};
BetheAtLambda bethe_at_lambda(double lambda, int n_nodes);

/// Requires gamma > 0 and n_nodes >= 64. Throws NoConvergence if the root search for
/// lambda fails or the node-doubling residual exceeds `tolerance` (when given).
BetheSolution solve_bethe(double gamma, int n_nodes = kDefaultBetheNodes,
                          std::optional<double> tolerance = std::nullopt);

/// Dimensionless coupling of the Hamiltonian (1/2M) dpsi^+ dpsi + c psi^+2 psi^2 at density
/// rho: gamma = 2 M c / rho (reduces to c / rho at M = 1/2).
double lieb_liniger_gamma(double M, double c, double rho);

/// Exact energy density e(gamma) rho^3 / (2M); zero when c == 0.
double energy_density_exact(double rho, const ModelParams& params,
                            int n_nodes = kDefaultBetheNodes);

}  // namespace cmpslab
