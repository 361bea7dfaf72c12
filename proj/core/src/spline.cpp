#include "cmpslab/spline.hpp"

#include <algorithm>
#include <sstream>

#include "cmpslab/errors.hpp"

namespace cmpslab {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y, SplineEnd end)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) {
        throw InvalidSurface("spline: need at least two knots and one value per knot");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) {
            throw InvalidSurface("spline: knots must be strictly increasing");
        }
    }
    m_.assign(n, 0.0);
    if (n == 2) {
        return;
    }
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(N, N);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
    auto h = [&](Eigen::Index i) { return x_[static_cast<std::size_t>(i + 1)] - x_[static_cast<std::size_t>(i)]; };
    for (Eigen::Index i = 1; i + 1 < N; ++i) {
        const auto k = static_cast<std::size_t>(i);
        a(i, i - 1) = h(i - 1);
        a(i, i) = 2.0 * (h(i - 1) + h(i));
        a(i, i + 1) = h(i);
        rhs(i) = 6.0 * ((y_[k + 1] - y_[k]) / h(i) - (y_[k] - y_[k - 1]) / h(i - 1));
    }
    if (end == SplineEnd::Natural) {
        a(0, 0) = 1.0;
        a(N - 1, N - 1) = 1.0;
    } else if (n == 3) {
        // a single parabola
        a(0, 0) = 1.0;
        a(0, 1) = -1.0;
        a(2, 1) = 1.0;
        a(2, 2) = -1.0;
    } else {
        a(0, 0) = h(1);
        a(0, 1) = -(h(0) + h(1));
        a(0, 2) = h(0);
        a(N - 1, N - 3) = h(N - 2);
        a(N - 1, N - 2) = -(h(N - 3) + h(N - 2));
        a(N - 1, N - 1) = h(N - 3);
    }
    const Eigen::VectorXd m = a.partialPivLu().solve(rhs);
    for (std::size_t i = 0; i < n; ++i) m_[i] = m(static_cast<Eigen::Index>(i));
}

bool CubicSpline::contains(double x) const noexcept {
    return !x_.empty() && x >= x_.front() && x <= x_.back();
}

double CubicSpline::derivative(double x, int order) const {
    if (!contains(x)) {
        std::ostringstream msg;
        msg << "spline: " << x << " is outside [" << (x_.empty() ? 0.0 : x_.front()) << ", "
            << (x_.empty() ? 0.0 : x_.back()) << "]";
        throw OutOfHull(msg.str());
    }
    if (order < 0 || order > 3) {
        throw InvalidSurface("spline: derivative order must be in 0..3");
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);

    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    const double m0 = m_[i];
    const double m1 = m_[i + 1];
    switch (order) {
        case 0:
            return a * y_[i] + b * y_[i + 1] +
                   ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        case 1:
            return (y_[i + 1] - y_[i]) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 +
                   (3.0 * b * b - 1.0) * h * m1 / 6.0;
        case 2:
            return a * m0 + b * m1;
        default:
            return (m1 - m0) / h;
    }
}

TensorSpline2D::TensorSpline2D(std::vector<double> x, std::vector<double> y,
                               Eigen::MatrixXd values, SplineEnd end)
    : x_(std::move(x)), y_(std::move(y)), end_(end) {
    if (values.rows() != static_cast<Eigen::Index>(x_.size()) ||
        values.cols() != static_cast<Eigen::Index>(y_.size())) {
        throw InvalidSurface("tensor spline: value grid does not match the knot vectors");
    }
    if (y_.size() < 2) {
        throw InvalidSurface("tensor spline: need at least two knots per axis");
    }
    for (std::size_t i = 1; i < y_.size(); ++i) {
        if (!(y_[i] > y_[i - 1])) throw InvalidSurface("tensor spline: knots must increase");
    }
    along_x_.reserve(y_.size());
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        std::vector<double> column(values.col(j).data(), values.col(j).data() + values.rows());
        along_x_.emplace_back(x_, std::move(column), end_);
    }
}

bool TensorSpline2D::contains(double x, double y) const noexcept {
    return !x_.empty() && !y_.empty() && x >= x_.front() && x <= x_.back() && y >= y_.front() &&
           y <= y_.back();
}

double TensorSpline2D::derivative(double x, double y, int dx, int dy) const {
    if (!contains(x, y)) {
        std::ostringstream msg;
        msg << "tensor spline: (" << x << ", " << y << ") is outside the sampled grid";
        throw OutOfHull(msg.str());
    }
    std::vector<double> slice;
    slice.reserve(along_x_.size());
    for (const auto& s : along_x_) {
        slice.push_back(s.derivative(x, dx));
    }
    return CubicSpline(y_, std::move(slice), end_).derivative(y, dy);
}

}  // namespace cmpslab
