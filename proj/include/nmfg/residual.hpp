#pragma once

#include <vector>

#include "nmfg/cost_models.hpp"
#include "nmfg/grid.hpp"
#include "nmfg/layout.hpp"
#include "nmfg/scenario.hpp"
#include "nmfg/sparse.hpp"

namespace nmfg {

enum class JacobianMode { EXACT, DECOUPLED };

/// One fully discretized solve instance: cost model, grid, viscosity and
/// the per-class initial cell averages.
struct DiscreteProblem {
    CostModel model;
    Grid grid;
    double nu = 0.0;
    std::vector<std::vector<double>> initial_cells;  ///< per class, length nx

    UnknownLayout layout() const {
        return UnknownLayout(model.n_classes(), grid.nx, grid.nt);
    }
};

/// Builds the problem for a scenario: cell-averages the initial densities
/// on the given grid.
DiscreteProblem make_problem(const Scenario& scenario, CostKind kind, const Grid& grid,
                             double nu);

/// F(w): Lax-Friedrichs continuity rows, upwind HJB rows with optional
/// artificial viscosity, feedback rows, initial and terminal condition
/// rows, all in rate form and with periodic wraparound. Assembly is
/// parallel over time slices; output is identical for any worker count.
std::vector<double> residual(const DiscreteProblem& problem, const SolverState& state,
                             int workers = 1);

/// dF/dw. DECOUPLED drops every partial of the Hamiltonian term in HJB
/// rows and of the optimal-velocity term in feedback rows, which makes the
/// matrix lower triangular in this unknown ordering.
CsrMatrix jacobian(const DiscreteProblem& problem, const SolverState& state, JacobianMode mode,
                   int workers = 1);

/// dx * sum_k rho^{j,n}_k as a time series, n = 0..nt.
std::vector<double> mass(const SolverState& state, const Grid& grid, int j);

/// Euclidean norm.
double norm2(const std::vector<double>& v);

}  // namespace nmfg
