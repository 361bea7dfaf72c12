#include "cmpslab/luttinger.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <spdlog/spdlog.h>

#include "cmpslab/bethe.hpp"
#include "cmpslab/errors.hpp"

namespace cmpslab {

namespace {

constexpr double kRelTol = 1e-9;

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
    return seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
}

void check_axis(const std::vector<double>& axis, const char* name) {
    for (std::size_t i = 1; i < axis.size(); ++i) {
        if (!(axis[i] > axis[i - 1])) {
            throw InvalidSurface(std::string("surface: ") + name + " axis is not strictly increasing");
        }
    }
}

void check_axis_coverage(const std::vector<double>& axis, double center, int min_nodes,
                         double span, const char* name) {
    if (static_cast<int>(axis.size()) < min_nodes) {
        std::ostringstream msg;
        msg << "surface: " << name << " axis has " << axis.size() << " nodes, need " << min_nodes;
        throw InvalidSurface(msg.str());
    }
    const double lo = center * (1.0 - span);
    const double hi = center * (1.0 + span);
    const double slack = kRelTol * std::abs(center);
    if (axis.front() > lo + slack || axis.back() < hi - slack) {
        std::ostringstream msg;
        msg << "surface: " << name << " axis [" << axis.front() << ", " << axis.back()
            << "] does not span +-" << span * 100 << "% around " << center;
        throw InvalidSurface(msg.str());
    }
}

}  // namespace

EnergySurface EnergySurface::one_d(std::vector<SurfaceSample> samples) {
    EnergySurface s;
    s.dims_ = 1;
    s.samples_ = std::move(samples);
    std::vector<double> e;
    for (const auto& sample : s.samples_) {
        s.x_.push_back(sample.point[0]);
        e.push_back(sample.energy);
    }
    check_axis(s.x_, "density");
    s.spline1_ = CubicSpline(s.x_, std::move(e));
    return s;
}

EnergySurface EnergySurface::two_d(std::vector<double> rho1, std::vector<double> rho2,
                                   std::vector<SurfaceSample> samples) {
    if (samples.size() != rho1.size() * rho2.size()) {
        throw InvalidSurface("surface: sample count does not match the grid");
    }
    check_axis(rho1, "rho1");
    check_axis(rho2, "rho2");
    EnergySurface s;
    s.dims_ = 2;
    s.x_ = std::move(rho1);
    s.y_ = std::move(rho2);
    s.samples_ = std::move(samples);
    Eigen::MatrixXd grid(static_cast<Eigen::Index>(s.x_.size()),
                         static_cast<Eigen::Index>(s.y_.size()));
    for (std::size_t i = 0; i < s.x_.size(); ++i) {
        for (std::size_t j = 0; j < s.y_.size(); ++j) {
            grid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                s.samples_[i * s.y_.size() + j].energy;
        }
    }
    s.spline2_ = TensorSpline2D(s.x_, s.y_, std::move(grid));
    return s;
}

double EnergySurface::value(double rho1, double rho2) const {
    return dims_ == 1 ? spline1_(rho1) : spline2_(rho1, rho2);
}

void EnergySurface::validate(std::array<double, 2> center, int min_nodes, double span) const {
    check_axis_coverage(x_, center[0], min_nodes, span, dims_ == 1 ? "density" : "rho1");
    if (dims_ == 2) {
        check_axis_coverage(y_, center[1], min_nodes, span, "rho2");
    }
    for (const auto& sample : samples_) {
        if (!sample.converged) {
            std::ostringstream msg;
            msg << "surface: sample at (" << sample.point[0] << ", " << sample.point[1]
                << ") did not converge";
            throw InvalidSurface(msg.str());
        }
    }
}

std::optional<EnergySurface> EnergySurface::decimated(int offset) const {
    auto keep = [&](std::size_t i) { return static_cast<int>(i % 2) == offset; };
    if (dims_ == 1) {
        std::vector<SurfaceSample> kept;
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            if (keep(i)) kept.push_back(samples_[i]);
        }
        if (kept.size() < 3) return std::nullopt;
        return one_d(std::move(kept));
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < x_.size(); ++i)
        if (keep(i)) x.push_back(x_[i]);
    for (std::size_t j = 0; j < y_.size(); ++j)
        if (keep(j)) y.push_back(y_[j]);
    if (x.size() < 3 || y.size() < 3) return std::nullopt;
    std::vector<SurfaceSample> kept;
    for (std::size_t i = 0; i < x_.size(); ++i) {
        for (std::size_t j = 0; j < y_.size(); ++j) {
            if (keep(i) && keep(j)) kept.push_back(samples_[i * y_.size() + j]);
        }
    }
    return two_d(std::move(x), std::move(y), std::move(kept));
}

EnergySurface EnergySurface::shifted(double constant) const {
    std::vector<SurfaceSample> moved = samples_;
    for (auto& sample : moved) sample.energy += constant;
    return dims_ == 1 ? one_d(std::move(moved)) : two_d(x_, y_, std::move(moved));
}

double second_derivative(const EnergySurface& surface, std::array<double, 2> at,
                         Direction direction) {
    if (surface.dims() == 1) {
        if (direction != Direction::Rho1) {
            throw InvalidSurface("second_derivative: 1D surface only has the density direction");
        }
        return surface.spline_1d().derivative(at[0], 2);
    }
    const TensorSpline2D& s = surface.spline_2d();
    switch (direction) {
        case Direction::Rho1:
            return s.derivative(at[0], at[1], 2, 0);
        case Direction::Rho2:
            return s.derivative(at[0], at[1], 0, 2);
        case Direction::Plus:
        case Direction::Minus: {
            const double sign = direction == Direction::Plus ? 1.0 : -1.0;
            const double exx = s.derivative(at[0], at[1], 2, 0);
            const double eyy = s.derivative(at[0], at[1], 0, 2);
            const double exy = s.derivative(at[0], at[1], 1, 1);
            return 0.5 * (exx + eyy) + sign * exy;
        }
    }
    throw InvalidSurface("second_derivative: unknown direction");
}

std::string to_string(Channel channel) {
    switch (channel) {
        case Channel::Single: return "single";
        case Channel::Plus: return "plus";
        case Channel::Minus: return "minus";
    }
    return "unknown";
}

std::string to_string(RhoRefPolicy policy) {
    return policy == RhoRefPolicy::Total ? "total" : "per_species";
}

RhoRefPolicy rho_ref_policy_from_string(const std::string& name) {
    if (name == "total") return RhoRefPolicy::Total;
    if (name == "per_species") return RhoRefPolicy::PerSpecies;
    throw InvalidParams("unknown rho_ref policy '" + name + "' (expected total or per_species)");
}

LuttingerResult luttinger_from_curvature(double curvature, double rho_ref, double M,
                                         Channel channel) {
    if (!(curvature > 0.0)) {
        std::ostringstream msg;
        msg << "energy surface curvature " << curvature << " is not positive";
        throw NegativeCompressibility(msg.str());
    }
    const double s = channel == Channel::Single ? 1.0 : 2.0;
    LuttingerResult out;
    out.channel = channel;
    out.second_derivative = curvature;
    out.rho_ref = rho_ref;
    out.v = std::sqrt(s * rho_ref / M * curvature);
    out.K = std::sqrt(std::numbers::pi * std::numbers::pi * rho_ref / (s * M) / curvature);
    return out;
}

namespace {

double decimation_spread(const EnergySurface& surface, std::array<double, 2> at,
                         Direction direction, double reference) {
    double spread = 0.0;
    for (int offset = 0; offset < 2; ++offset) {
        auto coarse = surface.decimated(offset);
        if (!coarse) continue;
        try {
            spread = std::max(spread, std::abs(second_derivative(*coarse, at, direction) - reference));
        } catch (const OutOfHull&) {
        }
    }
    return spread;
}

}  // namespace

LuttingerResult luttinger_single(const EnergySurface& surface, double rho0, double M) {
    if (surface.dims() != 1) {
        throw InvalidSurface("luttinger_single: expected a 1D surface");
    }
    surface.validate({rho0, 0.0});
    const double e2 = second_derivative(surface, {rho0, 0.0});
    LuttingerResult out = luttinger_from_curvature(e2, rho0, M, Channel::Single);
    out.second_derivative_spread = decimation_spread(surface, {rho0, 0.0}, Direction::Rho1, e2);
    return out;
}

LuttingerResult luttinger_coupled(const EnergySurface& surface, double rho01, double rho02,
                                  double M, Channel channel, RhoRefPolicy policy) {
    if (surface.dims() != 2) {
        throw InvalidSurface("luttinger_coupled: expected a 2D surface");
    }
    if (channel == Channel::Single) {
        throw InvalidParams("luttinger_coupled: channel must be plus or minus");
    }
    if (std::abs(rho01 - rho02) > kRelTol * std::max(rho01, rho02)) {
        std::ostringstream msg;
        msg << "luttinger_coupled: unequal filling " << rho01 << " != " << rho02;
        throw UnequalFilling(msg.str());
    }
    surface.validate({rho01, rho02});
    const Direction dir = channel == Channel::Plus ? Direction::Plus : Direction::Minus;
    const double e2 = second_derivative(surface, {rho01, rho02}, dir);
    const double rho_ref = policy == RhoRefPolicy::Total ? rho01 + rho02 : rho01;
    LuttingerResult out = luttinger_from_curvature(e2, rho_ref, M, channel);
    out.policy = policy;
    out.second_derivative_spread = decimation_spread(surface, {rho01, rho02}, dir, e2);
    return out;
}

std::vector<SweepStep> sweep_order(const std::vector<double>& densities, double center) {
    std::vector<SweepStep> order;
    if (densities.empty()) return order;
    std::size_t start = 0;
    for (std::size_t i = 1; i < densities.size(); ++i) {
        if (std::abs(densities[i] - center) < std::abs(densities[start] - center)) start = i;
    }
    order.push_back({start, std::nullopt});
    for (std::size_t i = start + 1; i < densities.size(); ++i) order.push_back({i, i - 1});
    for (std::size_t i = start; i-- > 0;) order.push_back({i, i + 1});
    return order;
}

std::vector<SweepStep> sweep_order_2d(std::size_t n1, std::size_t n2, std::size_t center1,
                                      std::size_t center2) {
    auto dist = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
    std::vector<std::size_t> flat(n1 * n2);
    for (std::size_t k = 0; k < flat.size(); ++k) flat[k] = k;
    std::stable_sort(flat.begin(), flat.end(), [&](std::size_t a, std::size_t b) {
        const std::size_t da = dist(a / n2, center1) + dist(a % n2, center2);
        const std::size_t db = dist(b / n2, center1) + dist(b % n2, center2);
        return da < db;
    });
    std::vector<SweepStep> order;
    std::vector<bool> done(flat.size(), false);
    for (std::size_t k : flat) {
        SweepStep step{k, std::nullopt};
        std::size_t best = flat.size();
        for (std::size_t m = 0; m < flat.size(); ++m) {
            if (!done[m]) continue;
            const std::size_t d = dist(m / n2, k / n2) + dist(m % n2, k % n2);
            if (best == flat.size() ||
                d < dist(best / n2, k / n2) + dist(best % n2, k % n2)) {
                best = m;
            }
        }
        if (best != flat.size()) step.warm_from = best;
        done[k] = true;
        order.push_back(step);
    }
    return order;
}

ParamVector rescaled_start(const OptimResult& neighbour, double rho) {
    const CmpsAnsatz& a = neighbour.single();
    const double n = neighbour.densities.at(0);
    if (!(n > 0.0)) {
        throw InvalidAnsatz("rescaled_start: neighbour has zero density");
    }
    return pack(a.rescaled(rho / n));
}

SingleSweep sweep_single(const ModelParams& base, const std::vector<double>& densities,
                         Eigen::Index D, const OptimizerConfig& config) {
    base.validate();
    if (densities.empty()) {
        throw InvalidParams("sweep_single: no densities");
    }
    for (std::size_t i = 0; i < densities.size(); ++i) {
        if (!(densities[i] > 0.0) || (i > 0 && !(densities[i] > densities[i - 1]))) {
            throw InvalidParams("sweep_single: densities must be positive and increasing");
        }
    }
    std::vector<std::optional<OptimResult>> results(densities.size());
    for (const SweepStep& step : sweep_order(densities, base.rho0)) {
        ModelParams p = base;
        p.rho0 = densities[step.index];
        OptimizerConfig cfg = config;
        cfg.seed = point_seed(config.seed, step.index);
        std::optional<ParamVector> start;
        if (step.warm_from) {
            start = rescaled_start(*results[*step.warm_from], p.rho0);
            cfg.restarts = 1;
        }
        results[step.index] = minimize_single(p, D, cfg, start);
        spdlog::info("sweep point rho={:.6g}: e={:.12g} converged={}", p.rho0,
                     results[step.index]->energy, results[step.index]->converged);
    }

    SingleSweep out;
    std::vector<SurfaceSample> samples;
    std::vector<double> failed;
    for (std::size_t i = 0; i < densities.size(); ++i) {
        const OptimResult& r = *results[i];
        samples.push_back({{densities[i], 0.0}, r.energy, r.converged, r.gap});
        if (!r.converged) failed.push_back(densities[i]);
        out.points.push_back(r);
    }
    out.surface = EnergySurface::one_d(std::move(samples));
    if (!failed.empty()) {
        std::ostringstream msg;
        msg << "sweep_single: " << failed.size() << " point(s) did not converge";
        throw SweepPointFailed(msg.str(), failed);
    }
    return out;
}

CoupledSweep sweep_coupled(const CoupledModelParams& base, const std::vector<double>& rho1,
                           const std::vector<double>& rho2, Eigen::Index D, std::size_t P,
                           const OptimizerConfig& config,
                           const std::optional<ParamVector>& start) {
    base.validate();
    if (rho1.empty() || rho2.empty()) {
        throw InvalidParams("sweep_coupled: empty density grid");
    }
    auto nearest = [](const std::vector<double>& axis, double x) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < axis.size(); ++i)
            if (std::abs(axis[i] - x) < std::abs(axis[best] - x)) best = i;
        return best;
    };
    const std::size_t n2 = rho2.size();
    std::vector<std::optional<OptimResult>> results(rho1.size() * n2);
    for (const SweepStep& step :
         sweep_order_2d(rho1.size(), n2, nearest(rho1, base.rho01), nearest(rho2, base.rho02))) {
        CoupledModelParams p = base;
        p.rho01 = rho1[step.index / n2];
        p.rho02 = rho2[step.index % n2];
        OptimizerConfig cfg = config;
        cfg.seed = point_seed(config.seed, step.index);
        std::optional<ParamVector> init = start;
        if (step.warm_from) {
            init = results[*step.warm_from]->params;
            cfg.restarts = 1;
        }
        results[step.index] = minimize_coupled(p, D, P, cfg, init);
    }

    CoupledSweep out;
    std::vector<SurfaceSample> samples;
    std::vector<double> failed;
    for (std::size_t k = 0; k < results.size(); ++k) {
        const OptimResult& r = *results[k];
        samples.push_back({{rho1[k / n2], rho2[k % n2]}, r.energy, r.converged, r.gap});
        if (!r.converged) {
            failed.push_back(rho1[k / n2]);
        }
        out.points.push_back(r);
    }
    out.surface = EnergySurface::two_d(rho1, rho2, std::move(samples));
    if (!failed.empty()) {
        std::ostringstream msg;
        msg << "sweep_coupled: " << failed.size() << " point(s) did not converge";
        throw SweepPointFailed(msg.str(), failed);
    }
    return out;
}

EnergySurface bethe_surface(const ModelParams& base, const std::vector<double>& densities,
                            int n_nodes) {
    std::vector<SurfaceSample> samples;
    for (double rho : densities) {
        samples.push_back({{rho, 0.0}, energy_density_exact(rho, base, n_nodes), true,
                           std::numeric_limits<double>::infinity()});
    }
    return EnergySurface::one_d(std::move(samples));
}

std::vector<double> density_grid(double rho0, double span, int n) {
    if (n < 2 || !(rho0 > 0.0) || !(span > 0.0) || !(span < 1.0)) {
        throw InvalidParams("density_grid: need n >= 2, rho0 > 0 and 0 < span < 1");
    }
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = -1.0 + 2.0 * i / (n - 1);
        grid[static_cast<std::size_t>(i)] = rho0 * (1.0 + span * t);
    }
    return grid;
}

}  // namespace cmpslab
