#pragma once

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "nmfg/lgmres.hpp"
#include "nmfg/residual.hpp"
#include "nmfg/sparse.hpp"

namespace nmfg {

struct NewtonSettings {
    int max_newton_iters = 1000;
    double residual_tol = 6e-6;
    int krylov_restart = 30;
    int augmentation_depth = 3;
    double krylov_tol = 1e-8;
    int krylov_max_iters = 200;
    JacobianMode jacobian_mode = JacobianMode::DECOUPLED;
    bool refactor_each_iteration = false;  ///< default: factor once, first iteration
    double divergence_factor = 1e6;
    int workers = 1;
};

struct SolveReport {
    int iterations = 0;
    long krylov_iterations = 0;
    double final_residual = 0.0;
    double wall_time_seconds = 0.0;
    bool converged = false;
    std::optional<double> rmse_vs_reference;
    // grid context, filled by drivers for reporting
    int nx = 0;
    int nt = 0;
    double nu = 0.0;
};

/// Newton blew past the divergence guard; carries the last iterate.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, SolverState state)
        : Error(what), last_state(std::make_shared<SolverState>(std::move(state))) {}
    std::shared_ptr<SolverState> last_state;
};

/// LU-backed application of J_approx^{-1}.
class Preconditioner {
public:
    Preconditioner(const CsrMatrix& j_approx, std::span<const std::size_t> order = {});
    void apply(std::span<const double> b, std::span<double> x) const;
    std::size_t dimension() const { return lu_.dimension(); }
    LinearOperator as_operator() const;

private:
    SparseLu lu_;
};

Preconditioner build_preconditioner(const CsrMatrix& j_approx,
                                    std::span<const std::size_t> order = {});

/// Symmetric ordering that groups unknowns by time slice; keeps the LU of
/// the fully coupled Jacobian banded.
std::vector<std::size_t> time_interleaved_order(const UnknownLayout& layout);

/// Undamped inexact Newton: w <- w + delta with J(w) delta = -F(w) solved
/// by LGMRES, preconditioned with the LU of the (mode-selected) Jacobian
/// factored at the first iteration only.
std::pair<SolverState, SolveReport> newton_solve(const DiscreteProblem& problem,
                                                 SolverState initial_guess,
                                                 const NewtonSettings& settings = {});

/// Root mean square difference over all unknowns.
double rmse(const SolverState& a, const SolverState& b);

}  // namespace nmfg
