#include "nmfg/interpolate.hpp"

#include <algorithm>
#include <cmath>

#include "nmfg/errors.hpp"

namespace nmfg {

namespace {

/// Thomas algorithm for a tridiagonal system with constant bands
/// (sub, diag, super) except user-modified first/last diagonal entries.
std::vector<double> solve_tridiagonal(double sub, std::vector<double> diag, double super,
                                      std::vector<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub / diag[i - 1];
        diag[i] -= w * super;
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - super * rhs[i + 1]) / diag[i];
    return rhs;
}

}  // namespace

PeriodicCubicSpline::PeriodicCubicSpline(std::span<const double> values, double offset,
                                         double spacing)
    : y_(values.begin(), values.end()), offset_(offset), h_(spacing) {
    const std::size_t m = y_.size();
    if (m < 3) throw InvalidParameterError("periodic spline needs at least 3 nodes");
    if (!(spacing > 0.0)) throw InvalidParameterError("periodic spline needs positive spacing");
    period_ = h_ * static_cast<double>(m);

    // (1/6) M_{i-1} + (2/3) M_i + (1/6) M_{i+1} = (y_{i+1} - 2 y_i + y_{i-1}) / h^2,
    // cyclic; solved by Sherman-Morrison over the Thomas algorithm.
    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double ym = y_[(i + m - 1) % m];
        const double yp = y_[(i + 1) % m];
        rhs[i] = (yp - 2.0 * y_[i] + ym) / (h_ * h_);
    }
    const double sub = 1.0 / 6.0, diag = 2.0 / 3.0, super = 1.0 / 6.0;
    const double gamma = -diag;
    std::vector<double> d1(m, diag);
    d1[0] = diag - gamma;
    d1[m - 1] = diag - sub * super / gamma;
    std::vector<double> u(m, 0.0);
    u[0] = gamma;
    u[m - 1] = super;  // corner value c_{m-1} coupling node m-1 to node 0
    const std::vector<double> x1 = solve_tridiagonal(sub, d1, super, rhs);
    const std::vector<double> x2 = solve_tridiagonal(sub, d1, super, u);
    const double vx1 = x1[0] + (sub / gamma) * x1[m - 1];
    const double vx2 = x2[0] + (sub / gamma) * x2[m - 1];
    const double factor = vx1 / (1.0 + vx2);
    m_.resize(m);
    for (std::size_t i = 0; i < m; ++i) m_[i] = x1[i] - factor * x2[i];
}

double PeriodicCubicSpline::operator()(double x) const {
    const std::size_t m = y_.size();
    double s = std::fmod(x - offset_, period_);
    if (s < 0.0) s += period_;
    std::size_t i = std::min(static_cast<std::size_t>(s / h_), m - 1);
    const double t = (s - h_ * static_cast<double>(i)) / h_;
    const std::size_t ip = (i + 1) % m;
    const double a = 1.0 - t;
    return y_[i] * a + y_[ip] * t +
           (h_ * h_ / 6.0) * ((a * a * a - a) * m_[i] + (t * t * t - t) * m_[ip]);
}

double PeriodicCubicSpline::derivative(double x) const {
    const std::size_t m = y_.size();
    double s = std::fmod(x - offset_, period_);
    if (s < 0.0) s += period_;
    std::size_t i = std::min(static_cast<std::size_t>(s / h_), m - 1);
    const double t = (s - h_ * static_cast<double>(i)) / h_;
    const std::size_t ip = (i + 1) % m;
    const double a = 1.0 - t;
    return (y_[ip] - y_[i]) / h_ +
           (h_ / 6.0) * ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * t * t - 1.0) * m_[ip]);
}

double periodic_linear_interp(std::span<const double> values, double offset, double spacing,
                              double x) {
    const std::size_t m = values.size();
    const double period = spacing * static_cast<double>(m);
    double s = std::fmod(x - offset, period);
    if (s < 0.0) s += period;
    std::size_t i = std::min(static_cast<std::size_t>(s / spacing), m - 1);
    const double t = (s - spacing * static_cast<double>(i)) / spacing;
    return values[i] * (1.0 - t) + values[(i + 1) % m] * t;
}

NaturalCubicSpline::NaturalCubicSpline(std::span<const double> values, double offset,
                                       double spacing)
    : y_(values.begin(), values.end()), offset_(offset), h_(spacing) {
    const std::size_t m = y_.size();
    if (m < 2) throw InvalidParameterError("spline needs at least 2 nodes");
    m_.assign(m, 0.0);
    if (m == 2) return;  // degenerates to linear
    // interior equations only; natural ends M_0 = M_{m-1} = 0
    std::vector<double> diag(m - 2, 2.0 / 3.0), rhs(m - 2);
    for (std::size_t i = 1; i + 1 < m; ++i)
        rhs[i - 1] = (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / (h_ * h_);
    const std::vector<double> sol = solve_tridiagonal(1.0 / 6.0, diag, 1.0 / 6.0, rhs);
    for (std::size_t i = 1; i + 1 < m; ++i) m_[i] = sol[i - 1];
}

double NaturalCubicSpline::operator()(double x) const {
    const std::size_t m = y_.size();
    double s = std::clamp(x - offset_, 0.0, h_ * static_cast<double>(m - 1));
    std::size_t i = std::min(static_cast<std::size_t>(s / h_), m - 2);
    const double t = (s - h_ * static_cast<double>(i)) / h_;
    const double a = 1.0 - t;
    return y_[i] * a + y_[i + 1] * t +
           (h_ * h_ / 6.0) * ((a * a * a - a) * m_[i] + (t * t * t - t) * m_[i + 1]);
}

double clamped_linear_interp(std::span<const double> values, double offset, double spacing,
                             double x) {
    const std::size_t m = values.size();
    if (m == 1) return values[0];
    double s = std::clamp(x - offset, 0.0, spacing * static_cast<double>(m - 1));
    std::size_t i = std::min(static_cast<std::size_t>(s / spacing), m - 2);
    const double t = (s - spacing * static_cast<double>(i)) / spacing;
    return values[i] * (1.0 - t) + values[i + 1] * t;
}

}  // namespace nmfg
