#include "cmpslab/bethe.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "cmpslab/errors.hpp"

namespace cmpslab {

GaussLegendre gauss_legendre(int n) {
    if (n < 1) {
        throw InvalidParams("gauss_legendre: n must be >= 1");
    }
    GaussLegendre rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double pn = n == 1 ? x : p1;
            const double pm = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pm) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    }
    return rule;
}

BetheAtLambda bethe_at_lambda(double lambda, int n_nodes) {
    const GaussLegendre rule = gauss_legendre(n_nodes);
    const Eigen::Index n = n_nodes;
    Eigen::Map<const Eigen::VectorXd> x(rule.nodes.data(), n);
    Eigen::Map<const Eigen::VectorXd> w(rule.weights.data(), n);
    const Eigen::VectorXd sw = w.cwiseSqrt();

    // Symmetrized Nystrom system for h = sqrt(w) g: (1 - W^1/2 Kern W^1/2) h = W^1/2 / 2pi.
    Eigen::MatrixXd a(n, n);
    const double inv_pi = 1.0 / std::numbers::pi;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double dx = x(i) - x(j);
            a(i, j) = -sw(i) * sw(j) * inv_pi * lambda / (lambda * lambda + dx * dx);
        }
        a(i, i) += 1.0;
    }
    const Eigen::VectorXd rhs = sw * (0.5 * inv_pi);
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        throw NoConvergence("bethe: Nystrom matrix is not positive definite");
    }
    const Eigen::VectorXd h = llt.solve(rhs);

    double norm = 0.0;
    double second = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double wg = sw(i) * h(i);  // w_i g_i
        norm += wg;
        second += x(i) * x(i) * wg;
    }
    const double gamma = lambda / norm;
    const double ratio = gamma / lambda;
    return {gamma, ratio * ratio * ratio * second};
}

namespace {

double solve_lambda(double gamma, int n_nodes, double lo, double hi) {
    auto f = [&](double log_lambda) {
        return std::log(bethe_at_lambda(std::exp(log_lambda), n_nodes).gamma / gamma);
    };
    double a = std::log(lo);
    double b = std::log(hi);
    double fa = f(a);
    double fb = f(b);
    for (int k = 0; k < 60 && fa > 0.0; ++k) {
        b = a;
        fb = fa;
        a -= std::log(2.0);
        fa = f(a);
    }
    for (int k = 0; k < 60 && fb < 0.0; ++k) {
        a = b;
        fa = fb;
        b += std::log(2.0);
        fb = f(b);
    }
    if (fa > 0.0 || fb < 0.0) {
        throw NoConvergence("bethe: could not bracket lambda");
    }
    if (fa == 0.0) return std::exp(a);
    if (fb == 0.0) return std::exp(b);
    std::uintmax_t max_iter = 200;
    const auto [l, r] = boost::math::tools::toms748_solve(
        f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), max_iter);
    if (max_iter >= 200) {
        throw NoConvergence("bethe: lambda root search did not converge");
    }
    return std::exp(0.5 * (l + r));
}

}  // namespace

BetheSolution solve_bethe(double gamma, int n_nodes, std::optional<double> tolerance) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidParams("solve_bethe: gamma must be > 0");
    }
    if (n_nodes < 64) {
        throw InvalidParams("solve_bethe: n_nodes must be >= 64");
    }
    // Weak coupling: lambda ~ sqrt(gamma)/2; strong coupling: lambda ~ gamma/pi.
    const double guess = gamma < 1.0 ? 0.5 * std::sqrt(gamma) : gamma / std::numbers::pi;
    const double lambda = solve_lambda(gamma, n_nodes, 0.8 * guess, 1.25 * guess);
    const double lambda2 = solve_lambda(gamma, 2 * n_nodes, lambda * (1 - 1e-6), lambda * (1 + 1e-6));

    BetheSolution sol;
    sol.gamma = gamma;
    sol.lambda = lambda;
    sol.quad_nodes = n_nodes;
    sol.e_dimensionless = bethe_at_lambda(lambda, n_nodes).e;
    sol.residual = std::abs(sol.e_dimensionless - bethe_at_lambda(lambda2, 2 * n_nodes).e);
    if (tolerance && sol.residual > *tolerance) {
        std::ostringstream msg;
        msg << "solve_bethe: node-doubling residual " << sol.residual << " exceeds " << *tolerance;
        throw NoConvergence(msg.str());
    }
    return sol;
}

double lieb_liniger_gamma(double M, double c, double rho) { return 2.0 * M * c / rho; }

double energy_density_exact(double rho, const ModelParams& params, int n_nodes) {
    params.validate();
    if (!(rho > 0.0)) {
        throw InvalidParams("energy_density_exact: rho must be > 0");
    }
    if (params.c == 0.0) {
        return 0.0;
    }
    const BetheSolution sol = solve_bethe(lieb_liniger_gamma(params.M, params.c, rho), n_nodes);
    return sol.e_dimensionless * rho * rho * rho / (2.0 * params.M);
}

}  // namespace cmpslab
