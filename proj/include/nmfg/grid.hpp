#pragma once

#include <span>
#include <vector>

namespace nmfg {

/// Uniform space-time discretization of the ring road [0, L] x [0, T].
/// Spatial index k lives on the periodic node set x_k = k * dx,
/// k = 0 .. nx-1; node nx is identified with node 0.
struct Grid {
    double road_length = 0.0;  ///< L
    double horizon = 0.0;      ///< T
    int nx = 0;                ///< spatial cells
    int nt = 0;                ///< time steps
    double dx = 0.0;           ///< L / nx
    double dt = 0.0;           ///< T / nt

    Grid() = default;
    Grid(double length, double time_horizon, int nx_cells, int nt_steps);

    double x(int k) const { return dx * k; }
    double t(int n) const { return dt * n; }
};

/// Step-size safety factors for the explicit schemes.
struct StepRule {
    double cfl_factor = 1.0;      ///< c in (0, 1]
    double viscous_factor = 0.5;  ///< beta in (0, 1/2]
    double viscosity = 0.0;       ///< nu in [0, 0.05]
};

void validate_step_rule(const StepRule& rule);

/// Largest stable dt for the Lax-Friedrichs step: c * dx / max speed.
double cfl_dt(double dx, std::span<const double> max_speeds, double cfl_factor = 1.0);

/// Largest stable dt for the explicit viscosity term: beta * dx^2 / nu.
double viscous_dt(double dx, double nu, double beta);

/// k modulo nx, always in [0, nx).
inline int wrap_index(int k, int nx) {
    int m = k % nx;
    return m < 0 ? m + nx : m;
}

/// Builds a grid with nx cells and the largest integer-step dt that
/// satisfies both stability bounds: dt = min(cfl, viscous), then nt is
/// rounded up so that dt = T / nt never exceeds either bound.
Grid make_grid_from_step_rule(double road_length, double horizon, int nx,
                              std::span<const double> max_speeds, const StepRule& rule);

}  // namespace nmfg
