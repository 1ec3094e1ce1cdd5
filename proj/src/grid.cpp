#include "nmfg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nmfg/errors.hpp"

namespace nmfg {

Grid::Grid(double length, double time_horizon, int nx_cells, int nt_steps)
    : road_length(length), horizon(time_horizon), nx(nx_cells), nt(nt_steps) {
    if (!(length > 0.0) || !(time_horizon > 0.0))
        throw InvalidParameterError("grid: road length and horizon must be positive");
    if (nx < 3) throw InvalidParameterError("grid: nx must be at least 3");
    if (nt < 1) throw InvalidParameterError("grid: nt must be at least 1");
    dx = length / nx;
    dt = time_horizon / nt;
}

void validate_step_rule(const StepRule& rule) {
    if (!(rule.cfl_factor > 0.0) || rule.cfl_factor > 1.0)
        throw InvalidParameterError("step rule: cfl factor must lie in (0, 1]");
    if (!(rule.viscous_factor > 0.0) || rule.viscous_factor > 0.5)
        throw InvalidParameterError("step rule: viscous factor must lie in (0, 1/2]");
    if (rule.viscosity < 0.0 || rule.viscosity > 0.05)
        throw InvalidParameterError("step rule: viscosity must lie in [0, 0.05]");
}

double cfl_dt(double dx, std::span<const double> max_speeds, double cfl_factor) {
    if (!(dx > 0.0)) throw InvalidParameterError("cfl_dt: dx must be positive");
    if (max_speeds.empty()) throw InvalidParameterError("cfl_dt: empty speed list");
    double fastest = 0.0;
    for (double s : max_speeds) {
        if (!(s > 0.0)) throw InvalidParameterError("cfl_dt: speeds must be positive");
        fastest = std::max(fastest, s);
    }
    return cfl_factor * dx / fastest;
}

double viscous_dt(double dx, double nu, double beta) {
    if (!(nu > 0.0))
        throw InvalidParameterError("viscous_dt: nu must be positive (nu=0 needs no viscous bound)");
    if (!(beta > 0.0) || beta > 0.5)
        throw InvalidParameterError("viscous_dt: beta must lie in (0, 1/2]");
    return beta * dx * dx / nu;
}

Grid make_grid_from_step_rule(double road_length, double horizon, int nx,
                              std::span<const double> max_speeds, const StepRule& rule) {
    validate_step_rule(rule);
    const double dx = road_length / nx;
    double bound = cfl_dt(dx, max_speeds, rule.cfl_factor);
    if (rule.viscosity > 0.0)
        bound = std::min(bound, viscous_dt(dx, rule.viscosity, rule.viscous_factor));
    int nt = std::max(1, static_cast<int>(std::ceil(horizon / bound)));
    // Rounding can leave dt a hair above the bound; bump nt until it is not.
    while (horizon / nt > bound) ++nt;
    return Grid(road_length, horizon, nx, nt);
}

}  // namespace nmfg
