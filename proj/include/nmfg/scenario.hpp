#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "nmfg/cost_models.hpp"
#include "nmfg/grid.hpp"

namespace nmfg {

/// One truncated Gaussian bump of the initial density:
/// rho_a + (rho_b - rho_a) exp(-(x - theta)^2 / (2 gamma^2)) on [x1, x2],
/// zero contribution outside. theta defaults to the interval midpoint.
struct DensityBump {
    double x1 = 0.0;
    double x2 = 0.0;
    double rho_a = 0.0;
    double rho_b = 0.0;
    double gamma = 0.15;
    double theta = 0.0;
};

struct InitialDensitySpec {
    std::vector<DensityBump> bumps;
};

/// zeta_0(x): sum of the masked bumps.
double density_at(const InitialDensitySpec& spec, double x);

/// Exact-to-quadrature cell averages of zeta_0 over cells [x_k, x_{k+1}],
/// 5-point Gauss-Legendre per cell.
std::vector<double> cell_averages(const InitialDensitySpec& spec, const Grid& grid);

enum class ScenarioName { TC, CT, TCT, ONE_CLASS };

std::string_view scenario_name_str(ScenarioName name);
ScenarioName scenario_name_from_str(std::string_view s);

/// A complete problem setup: classes, ring geometry, horizon and the
/// per-class initial densities.
struct Scenario {
    ScenarioName name = ScenarioName::TC;
    std::vector<ClassParams> classes;
    std::vector<int> section_multiplicity;  ///< alpha_j
    double road_length = 0.0;               ///< L = sum alpha_j L_j
    double horizon = 3.0;                   ///< T
    std::vector<InitialDensitySpec> initial_density;  ///< one spec per class

    int n_classes() const { return static_cast<int>(classes.size()); }
};

void validate_scenario(const Scenario& s);

/// Builds a preset scenario. n = 1 gives the macroscopic unit-section
/// geometry; n > 1 gives the micro-scaled version with L_j = n, jam
/// densities n / l_j, free-flow speeds multiplied by n, and all bump
/// coordinates stretched by n so that L = N_1 + N_2.
Scenario build_scenario(ScenarioName name, int n = 1);

/// Largest per-class speeds, used for CFL bounds.
std::vector<double> max_speeds(const Scenario& s);

/// Cost model matching a scenario: two-class kinds pair with TC/CT/TCT,
/// one-class kinds with ONE_CLASS.
CostModel make_cost_model(CostKind kind, const Scenario& s);

}  // namespace nmfg
