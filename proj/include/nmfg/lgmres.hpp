#pragma once

#include <functional>
#include <span>
#include <vector>

namespace nmfg {

/// y = op(x); callers guarantee matching dimensions.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct LgmresSettings {
    int restart = 30;            ///< Krylov vectors per cycle (m)
    int augmentation_depth = 3;  ///< retained error approximations (a)
    double rel_tol = 1e-8;       ///< stop when ||b - A x|| <= rel_tol * ||b||
    int max_iters = 200;         ///< total operator applications
};

struct LgmresResult {
    std::vector<double> x;
    bool converged = false;
    int iterations = 0;  ///< operator applications performed
    double relative_residual = 0.0;
};

/// Restarted GMRES(m) augmented with the `a` most recent approximate error
/// vectors ("loose" GMRES). `precond` is applied on the right: the Krylov
/// space is built for A M, and the returned x already includes the final
/// M application. Pass an empty function for no preconditioning.
///
/// On Arnoldi breakdown the current iterate is returned with the converged
/// flag reflecting its true residual.
LgmresResult lgmres_solve(const LinearOperator& a, std::span<const double> b,
                          const LinearOperator& precond, std::size_t dimension,
                          const LgmresSettings& settings = {});

}  // namespace nmfg
