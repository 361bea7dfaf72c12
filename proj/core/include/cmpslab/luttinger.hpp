#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cmpslab/spline.hpp"
#include "cmpslab/variational.hpp"

namespace cmpslab {

struct SurfaceSample {
    std::array<double, 2> point{};  // (rho) or (rho1, rho2)
    double energy{};
    bool converged{true};
    double gap{};
};

/// Sampled ground-state energy density e0(rho) or e0(rho1, rho2) with its spline.
class EnergySurface {
public:
    /// 1D surface from strictly increasing densities.
    static EnergySurface one_d(std::vector<SurfaceSample> samples);
    /// 2D surface on the grid rho1 x rho2; samples in row-major (i over rho1, j over rho2).
    static EnergySurface two_d(std::vector<double> rho1, std::vector<double> rho2,
                               std::vector<SurfaceSample> samples);

    int dims() const noexcept { return dims_; }
    const std::vector<SurfaceSample>& samples() const noexcept { return samples_; }
    const std::vector<double>& axis(int k) const { return k == 0 ? x_ : y_; }

    /// Interpolated energy.
    double value(double rho1, double rho2 = 0.0) const;

    /// Throws InvalidSurface unless every axis has >= min_nodes samples spanning at
    /// least +-span (relative) around `center` and every sample converged.
    void validate(std::array<double, 2> center, int min_nodes = 9, double span = 0.15) const;

    /// Every second node (offset 0 or 1); used for the derivative-spread estimate.
    std::optional<EnergySurface> decimated(int offset) const;

    /// Same surface with a constant added to every energy.
    EnergySurface shifted(double constant) const;

    const CubicSpline& spline_1d() const { return spline1_; }
    const TensorSpline2D& spline_2d() const { return spline2_; }

private:
    int dims_{1};
    std::vector<double> x_, y_;
    std::vector<SurfaceSample> samples_;
    CubicSpline spline1_;
    TensorSpline2D spline2_;
};

enum class Direction {
    Rho1,   // along the first density axis
    Rho2,   // along the second density axis
    Plus,   // along (1, 1)/sqrt(2)
    Minus,  // along (1, -1)/sqrt(2)
};

/// Second derivative of the spline. Throws OutOfHull outside the sampled range and
/// InvalidSurface for a 2D direction on a 1D surface.
double second_derivative(const EnergySurface& surface, std::array<double, 2> at,
                         Direction direction = Direction::Rho1);

enum class Channel { Single, Plus, Minus };
std::string to_string(Channel channel);

/// Reference density for the normal-mode relations at equal filling.
enum class RhoRefPolicy {
    Total,       // rho01 + rho02 (default)
    PerSpecies,  // rho01
};
std::string to_string(RhoRefPolicy policy);
RhoRefPolicy rho_ref_policy_from_string(const std::string& name);

struct LuttingerResult {
    double v{};
    double K{};
    Channel channel{Channel::Single};
    double second_derivative{};
    double rho_ref{};
    RhoRefPolicy policy{RhoRefPolicy::Total};  // meaningful for the Plus/Minus channels
    /// Largest change of the second derivative when re-extracting on node-decimated
    /// surfaces (0 when no decimated surface covers the evaluation point).
    double second_derivative_spread{};
};

/// v^2 = (s rho_ref / M) e'' and K^2 = (pi^2 rho_ref / (s M)) / e'' with s = 1 for the single
/// field and s = 2 for the normal modes. Throws NegativeCompressibility if e'' <= 0.
LuttingerResult luttinger_from_curvature(double curvature, double rho_ref, double M,
                                         Channel channel);

LuttingerResult luttinger_single(const EnergySurface& surface, double rho0, double M);

/// Normal-mode parameters at equal filling; throws UnequalFilling unless rho01 == rho02.
LuttingerResult luttinger_coupled(const EnergySurface& surface, double rho01, double rho02,
                                  double M, Channel channel,
                                  RhoRefPolicy policy = RhoRefPolicy::Total);

/// Sweep ordering: start at the density closest to `center`, then walk outward,
/// each point warm-started from the neighbour already computed.
struct SweepStep {
    std::size_t index{};
    std::optional<std::size_t> warm_from;
};
std::vector<SweepStep> sweep_order(const std::vector<double>& densities, double center);

/// 2D grid ordering by Manhattan distance from the centre node; returns flat row-major
/// indices with the nearest already-visited grid neighbour as warm start.
std::vector<SweepStep> sweep_order_2d(std::size_t n1, std::size_t n2, std::size_t center1,
                                      std::size_t center2);

/// Warm start for density rho from a neighbour's optimum via the exact rescaling.
ParamVector rescaled_start(const OptimResult& neighbour, double rho);

struct SingleSweep {
    EnergySurface surface;
    std::vector<OptimResult> points;  // same order as the densities
};

/// One optimization per density (c, M fixed from `base`). The starting point uses the full
/// config; the others a single warm-started run. Throws SweepPointFailed with the
/// densities that did not converge.
SingleSweep sweep_single(const ModelParams& base, const std::vector<double>& densities,
                         Eigen::Index D, const OptimizerConfig& config);

struct CoupledSweep {
    EnergySurface surface;
    std::vector<OptimResult> points;  // row-major over (rho1, rho2)
};

/// Coupled analogue of sweep_single on the grid rho1 x rho2 (c, g, M fixed from `base`).
/// The centre node starts from `start` when given.
CoupledSweep sweep_coupled(const CoupledModelParams& base, const std::vector<double>& rho1,
                           const std::vector<double>& rho2, Eigen::Index D, std::size_t P,
                           const OptimizerConfig& config,
                           const std::optional<ParamVector>& start = std::nullopt);

/// Exact Bethe-ansatz surface on the given densities.
EnergySurface bethe_surface(const ModelParams& base, const std::vector<double>& densities,
                            int n_nodes = 256);

/// Densities rho0 * (1 + span * t) for n equally spaced t in [-1, 1].
std::vector<double> density_grid(double rho0, double span, int n);

}  // namespace cmpslab
