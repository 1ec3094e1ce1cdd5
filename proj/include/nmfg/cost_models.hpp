#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace nmfg {

/// Physical constants of one vehicle class.
struct ClassParams {
    double u_max = 0.0;           ///< free-flow speed
    double rho_jam = 0.0;         ///< jam density
    double vehicle_length = 0.0;  ///< l_j
    double section_length = 0.0;  ///< L_j, with rho_jam = L_j / l_j
};

void validate_class_params(const ClassParams& p);

enum class CostKind { GLWR, GS, GNS, LWR1, SEP1, NONSEP1 };

bool is_one_class_kind(CostKind kind);
std::string_view cost_kind_name(CostKind kind);
CostKind cost_kind_from_name(std::string_view name);

/// Running cost f_j, Hamiltonian H_j and optimal-velocity map H*_j for one
/// of the six cost functionals. Every f_j is a strictly convex quadratic in
/// the control, so H_j has the closed form "clamp the stationary point to
/// [0, u_max], then evaluate".
class CostModel {
public:
    CostModel(CostKind kind, std::vector<ClassParams> classes,
              std::function<double(double)> terminal_cost = {});

    CostKind kind() const { return kind_; }
    int n_classes() const { return static_cast<int>(classes_.size()); }
    const ClassParams& class_params(int j) const;
    const std::vector<ClassParams>& classes() const { return classes_; }

    /// V_T(x); zero unless a terminal preference was supplied.
    double terminal_cost(double x) const { return terminal_cost_ ? terminal_cost_(x) : 0.0; }

    /// Fraction of road occupancy s = sum_m rho^m l_m.
    double occupancy(std::array<double, 2> rho) const;

    /// Aggregate rho / rho_jam with rho_jam = sum_m rho^m_jam l_m.
    double relative_density(std::array<double, 2> rho) const;

    /// Greenshields-type desired speed U_j = u_max^j (1 - s); the target
    /// speed of the GLWR/LWR running cost.
    double desired_speed(int j, std::array<double, 2> rho) const;

    /// f_j(u, rho^1, rho^2).
    double running_cost(int j, double u, std::array<double, 2> rho) const;

    /// df_j/du and df_j/drho^m at (u, rho).
    double running_cost_du(int j, double u, std::array<double, 2> rho) const;
    std::array<double, 2> running_cost_drho(int j, double u, std::array<double, 2> rho) const;

    /// Chain-rule spatial derivative sum_m (df_j/drho^m)(drho^m/dx).
    double running_cost_grad_x(int j, double u, std::array<double, 2> rho,
                               std::array<double, 2> drho_dx) const;

    /// H_j(p, rho) = min over alpha in [0, u_max^j] of f_j(alpha, rho) + alpha p.
    double hamiltonian(int j, double p, std::array<double, 2> rho) const;

    /// The argmin of the Hamiltonian minimization, clamped to [0, u_max^j].
    double optimal_velocity(int j, double p, std::array<double, 2> rho) const;

    /// First derivatives of H_j; dH/dp equals the clamped minimizer itself.
    struct HamiltonianGrads {
        double dp = 0.0;
        std::array<double, 2> drho{0.0, 0.0};
    };
    HamiltonianGrads hamiltonian_grads(int j, double p, std::array<double, 2> rho) const;

    /// First derivatives of H*_j. Where the clamp is active these are zero;
    /// exactly on a clamp boundary the interior one-sided value is used.
    struct VelocityGrads {
        double dp = 0.0;
        std::array<double, 2> drho{0.0, 0.0};
    };
    VelocityGrads velocity_grads(int j, double p, std::array<double, 2> rho) const;

private:
    /// f_j(alpha) = a/2 alpha^2 + b alpha + c at fixed densities.
    struct Quadratic {
        double a = 0.0;
        double b = 0.0;
        double c = 0.0;
    };
    Quadratic control_quadratic(int j, std::array<double, 2> rho) const;

    /// d b / d rho^m and d c / d rho^m of the control quadratic.
    struct QuadraticGrads {
        std::array<double, 2> db{0.0, 0.0};
        std::array<double, 2> dc{0.0, 0.0};
    };
    QuadraticGrads quadratic_grads(int j) const;

    void check_class(int j) const;

    CostKind kind_;
    std::vector<ClassParams> classes_;
    std::function<double(double)> terminal_cost_;
    double jam_sum_ = 0.0;  ///< sum_m rho^m_jam l_m
};

}  // namespace nmfg
