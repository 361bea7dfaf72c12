#pragma once

#include <vector>

#include <Eigen/Dense>

namespace cmpslab {

enum class SplineEnd {
    NotAKnot,  // continuous third derivative at the second and second-to-last knots
    Natural,   // zero second derivative at both ends
};

/// Interpolating cubic spline through strictly increasing knots. The default not-a-knot
/// ends reproduce any cubic exactly. Evaluation outside [front, back] throws OutOfHull.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y, SplineEnd end = SplineEnd::NotAKnot);

    double operator()(double x) const { return derivative(x, 0); }

    /// order 0..3; the third derivative is piecewise constant.
    double derivative(double x, int order) const;

    bool contains(double x) const noexcept;
    const std::vector<double>& knots() const noexcept { return x_; }
    const std::vector<double>& values() const noexcept { return y_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;  // second derivatives at the knots
};

/// Tensor-product bicubic spline on a rectilinear grid; values(i, j) = f(x_i, y_j).
class TensorSpline2D {
public:
    TensorSpline2D() = default;
    TensorSpline2D(std::vector<double> x, std::vector<double> y, Eigen::MatrixXd values,
                   SplineEnd end = SplineEnd::NotAKnot);

    /// d^(dx+dy) f / dx^dx dy^dy at (x, y).
    double derivative(double x, double y, int dx, int dy) const;
    double operator()(double x, double y) const { return derivative(x, y, 0, 0); }

    bool contains(double x, double y) const noexcept;
    const std::vector<double>& x_knots() const noexcept { return x_; }
    const std::vector<double>& y_knots() const noexcept { return y_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    SplineEnd end_{SplineEnd::NotAKnot};
    std::vector<CubicSpline> along_x_;  // one per y_j
};

}  // namespace cmpslab
