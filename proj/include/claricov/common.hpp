#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace claricov {

using Vec2 = Eigen::Vector2d;

/// Malformed or inconsistent input data (CSV schema, missing files, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or contradictory configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure (factorization breakdown, optimizer non-convergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Axis-aligned mission area, coordinates in km.
struct DomainBox {
    Vec2 lo{0.0, 0.0};
    Vec2 hi{1.0, 1.0};

    double width() const { return hi.x() - lo.x(); }
    double height() const { return hi.y() - lo.y(); }
    double area() const { return width() * height(); }

    bool contains(const Vec2& p, double tol = 1e-9) const {
        return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol &&
               p.y() >= lo.y() - tol && p.y() <= hi.y() + tol;
    }

    Vec2 clamp(const Vec2& p) const {
        return {std::clamp(p.x(), lo.x(), hi.x()),
                std::clamp(p.y(), lo.y(), hi.y())};
    }
};

} // namespace claricov
