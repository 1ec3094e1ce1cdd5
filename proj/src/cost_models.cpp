#include "nmfg/cost_models.hpp"

#include <algorithm>
#include <cmath>

#include "nmfg/errors.hpp"

namespace nmfg {

void validate_class_params(const ClassParams& p) {
    if (!(p.u_max > 0.0) || !(p.rho_jam > 0.0) || !(p.vehicle_length > 0.0) ||
        !(p.section_length > 0.0))
        throw InvalidParameterError("class params: all fields must be positive");
    const double implied = p.section_length / p.vehicle_length;
    if (std::abs(p.rho_jam - implied) > 1e-12 * std::max(p.rho_jam, implied))
        throw InvalidParameterError("class params: rho_jam must equal section_length / vehicle_length");
}

bool is_one_class_kind(CostKind kind) {
    return kind == CostKind::LWR1 || kind == CostKind::SEP1 || kind == CostKind::NONSEP1;
}

std::string_view cost_kind_name(CostKind kind) {
    switch (kind) {
        case CostKind::GLWR: return "glwr";
        case CostKind::GS: return "gs";
        case CostKind::GNS: return "gns";
        case CostKind::LWR1: return "lwr";
        case CostKind::SEP1: return "separable";
        case CostKind::NONSEP1: return "nonseparable";
    }
    return "?";
}

CostKind cost_kind_from_name(std::string_view name) {
    for (CostKind k : {CostKind::GLWR, CostKind::GS, CostKind::GNS, CostKind::LWR1,
                       CostKind::SEP1, CostKind::NONSEP1})
        if (name == cost_kind_name(k)) return k;
    throw InvalidParameterError("unknown cost kind: " + std::string(name));
}

CostModel::CostModel(CostKind kind, std::vector<ClassParams> classes,
                     std::function<double(double)> terminal_cost)
    : kind_(kind), classes_(std::move(classes)), terminal_cost_(std::move(terminal_cost)) {
    const std::size_t expected = is_one_class_kind(kind_) ? 1 : 2;
    if (classes_.size() != expected)
        throw InvalidParameterError("cost model: kind " + std::string(cost_kind_name(kind_)) +
                                    " requires " + std::to_string(expected) + " class(es)");
    for (const auto& p : classes_) validate_class_params(p);
    jam_sum_ = 0.0;
    for (const auto& p : classes_) jam_sum_ += p.rho_jam * p.vehicle_length;
}

const ClassParams& CostModel::class_params(int j) const {
    check_class(j);
    return classes_[static_cast<std::size_t>(j)];
}

void CostModel::check_class(int j) const {
    if (j < 0 || j >= n_classes())
        throw InvalidParameterError("cost model: class index " + std::to_string(j) +
                                    " out of range");
}

double CostModel::occupancy(std::array<double, 2> rho) const {
    double s = 0.0;
    for (int m = 0; m < n_classes(); ++m)
        s += rho[static_cast<std::size_t>(m)] * classes_[static_cast<std::size_t>(m)].vehicle_length;
    return s;
}

double CostModel::relative_density(std::array<double, 2> rho) const {
    return occupancy(rho) / jam_sum_;
}

double CostModel::desired_speed(int j, std::array<double, 2> rho) const {
    check_class(j);
    return classes_[static_cast<std::size_t>(j)].u_max * (1.0 - occupancy(rho));
}

CostModel::Quadratic CostModel::control_quadratic(int j, std::array<double, 2> rho) const {
    const double u_max = classes_[static_cast<std::size_t>(j)].u_max;
    switch (kind_) {
        case CostKind::GLWR:
        case CostKind::LWR1: {
            // f = (U - alpha)^2 / 2 with U = u_max (1 - s)
            const double desired = u_max * (1.0 - occupancy(rho));
            return {1.0, -desired, 0.5 * desired * desired};
        }
        case CostKind::GS:
        case CostKind::SEP1: {
            // f = (alpha/u)^2 / 2 - alpha/u + R
            return {1.0 / (u_max * u_max), -1.0 / u_max, relative_density(rho)};
        }
        case CostKind::GNS:
        case CostKind::NONSEP1: {
            // f = (alpha/u)^2 / 2 - alpha/u + (alpha/u) R
            const double r = relative_density(rho);
            return {1.0 / (u_max * u_max), (r - 1.0) / u_max, 0.0};
        }
    }
    return {};
}

CostModel::QuadraticGrads CostModel::quadratic_grads(int j) const {
    const double u_max = classes_[static_cast<std::size_t>(j)].u_max;
    QuadraticGrads g;
    for (int m = 0; m < n_classes(); ++m) {
        const double l_m = classes_[static_cast<std::size_t>(m)].vehicle_length;
        switch (kind_) {
            case CostKind::GLWR:
            case CostKind::LWR1:
                // dU/drho^m = -u_max l_m, b = -U, c = U^2/2; c's gradient
                // carries the state-dependent factor U and is filled by callers.
                g.db[static_cast<std::size_t>(m)] = u_max * l_m;
                g.dc[static_cast<std::size_t>(m)] = 0.0;  // set to U * dU below
                break;
            case CostKind::GS:
            case CostKind::SEP1:
                g.db[static_cast<std::size_t>(m)] = 0.0;
                g.dc[static_cast<std::size_t>(m)] = l_m / jam_sum_;
                break;
            case CostKind::GNS:
            case CostKind::NONSEP1:
                g.db[static_cast<std::size_t>(m)] = l_m / (jam_sum_ * u_max);
                g.dc[static_cast<std::size_t>(m)] = 0.0;
                break;
        }
    }
    return g;
}

double CostModel::running_cost(int j, double u, std::array<double, 2> rho) const {
    check_class(j);
    const Quadratic q = control_quadratic(j, rho);
    return 0.5 * q.a * u * u + q.b * u + q.c;
}

double CostModel::running_cost_du(int j, double u, std::array<double, 2> rho) const {
    check_class(j);
    const Quadratic q = control_quadratic(j, rho);
    return q.a * u + q.b;
}

std::array<double, 2> CostModel::running_cost_drho(int j, double u,
                                                   std::array<double, 2> rho) const {
    check_class(j);
    QuadraticGrads g = quadratic_grads(j);
    std::array<double, 2> out{0.0, 0.0};
    const bool greenshields = (kind_ == CostKind::GLWR || kind_ == CostKind::LWR1);
    const double desired = greenshields ? desired_speed(j, rho) : 0.0;
    for (int m = 0; m < n_classes(); ++m) {
        const auto mm = static_cast<std::size_t>(m);
        double dc = g.dc[mm];
        if (greenshields) {
            const double l_m = classes_[mm].vehicle_length;
            const double u_max = classes_[static_cast<std::size_t>(j)].u_max;
            dc = desired * (-u_max * l_m);
        }
        out[mm] = g.db[mm] * u + dc;
    }
    return out;
}

double CostModel::running_cost_grad_x(int j, double u, std::array<double, 2> rho,
                                      std::array<double, 2> drho_dx) const {
    const std::array<double, 2> d = running_cost_drho(j, u, rho);
    double sum = 0.0;
    for (int m = 0; m < n_classes(); ++m)
        sum += d[static_cast<std::size_t>(m)] * drho_dx[static_cast<std::size_t>(m)];
    return sum;
}

double CostModel::optimal_velocity(int j, double p, std::array<double, 2> rho) const {
    check_class(j);
    const double u_max = classes_[static_cast<std::size_t>(j)].u_max;
    const Quadratic q = control_quadratic(j, rho);
    const double stationary = -(q.b + p) / q.a;
    return std::clamp(stationary, 0.0, u_max);
}

double CostModel::hamiltonian(int j, double p, std::array<double, 2> rho) const {
    check_class(j);
    const Quadratic q = control_quadratic(j, rho);
    const double u_max = classes_[static_cast<std::size_t>(j)].u_max;
    const double alpha = std::clamp(-(q.b + p) / q.a, 0.0, u_max);
    return 0.5 * q.a * alpha * alpha + q.b * alpha + q.c + alpha * p;
}

CostModel::HamiltonianGrads CostModel::hamiltonian_grads(int j, double p,
                                                         std::array<double, 2> rho) const {
    check_class(j);
    const double alpha = optimal_velocity(j, p, rho);
    HamiltonianGrads out;
    out.dp = alpha;  // envelope theorem; also exact on the clamped pieces
    const std::array<double, 2> drho = running_cost_drho(j, alpha, rho);
    out.drho = drho;
    return out;
}

CostModel::VelocityGrads CostModel::velocity_grads(int j, double p,
                                                   std::array<double, 2> rho) const {
    check_class(j);
    const double u_max = classes_[static_cast<std::size_t>(j)].u_max;
    const Quadratic q = control_quadratic(j, rho);
    const double stationary = -(q.b + p) / q.a;
    VelocityGrads out;
    // Strictly outside [0, u_max] the clamp is active and H* is locally
    // constant; exactly on the boundary we take the interior one-sided value.
    if (stationary < 0.0 || stationary > u_max) return out;
    out.dp = -1.0 / q.a;
    const QuadraticGrads g = quadratic_grads(j);
    for (int m = 0; m < n_classes(); ++m)
        out.drho[static_cast<std::size_t>(m)] = -g.db[static_cast<std::size_t>(m)] / q.a;
    return out;
}

}  // namespace nmfg
