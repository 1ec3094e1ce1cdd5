#pragma once

#include <span>
#include <vector>

namespace nmfg {

/// Cubic spline through values y_i at uniformly spaced nodes offset + i*h
/// on a ring of period m*h. Evaluation wraps periodically.
class PeriodicCubicSpline {
public:
    PeriodicCubicSpline(std::span<const double> values, double offset, double spacing);
    double operator()(double x) const;
    /// Spline slope, used for analytic field gradients.
    double derivative(double x) const;

private:
    std::vector<double> y_;
    std::vector<double> m_;  ///< second derivatives at the nodes
    double offset_ = 0.0;
    double h_ = 1.0;
    double period_ = 1.0;
};

/// Piecewise-linear periodic interpolation on the same node layout.
double periodic_linear_interp(std::span<const double> values, double offset, double spacing,
                              double x);

/// Natural cubic spline on a bounded interval; clamps x to [x_0, x_last].
class NaturalCubicSpline {
public:
    NaturalCubicSpline(std::span<const double> values, double offset, double spacing);
    double operator()(double x) const;

private:
    std::vector<double> y_;
    std::vector<double> m_;
    double offset_ = 0.0;
    double h_ = 1.0;
};

/// Linear interpolation with constant extension outside the node range.
double clamped_linear_interp(std::span<const double> values, double offset, double spacing,
                             double x);

}  // namespace nmfg
