#include "nmfg/newton.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "nmfg/errors.hpp"

namespace nmfg {

Preconditioner::Preconditioner(const CsrMatrix& j_approx, std::span<const std::size_t> order)
    : lu_(CscMatrix::from_csr(j_approx), order) {
    if (j_approx.rows != j_approx.cols)
        throw InvalidParameterError("preconditioner: matrix must be square");
}

void Preconditioner::apply(std::span<const double> b, std::span<double> x) const {
    lu_.solve(b, x);
}

LinearOperator Preconditioner::as_operator() const {
    return [this](std::span<const double> in, std::span<double> out) { apply(in, out); };
}

Preconditioner build_preconditioner(const CsrMatrix& j_approx,
                                    std::span<const std::size_t> order) {
    return Preconditioner(j_approx, order);
}

std::vector<std::size_t> time_interleaved_order(const UnknownLayout& layout) {
    std::vector<std::size_t> order;
    order.reserve(layout.size());
    for (int n = 0; n <= layout.nt; ++n)
        for (int j = 0; j < layout.n_classes; ++j) {
            for (int k = 0; k < layout.nx; ++k) order.push_back(layout.rho_index(j, n, k));
            if (n < layout.nt)
                for (int k = 0; k < layout.nx; ++k) order.push_back(layout.u_index(j, n, k));
            for (int k = 0; k < layout.nx; ++k) order.push_back(layout.v_index(j, n, k));
        }
    return order;
}

double rmse(const SolverState& a, const SolverState& b) {
    if (a.w.size() != b.w.size()) throw DimensionMismatchError("rmse: state sizes differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.w.size(); ++i) {
        const double d = a.w[i] - b.w[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(a.w.size()));
}

std::pair<SolverState, SolveReport> newton_solve(const DiscreteProblem& problem,
                                                 SolverState state,
                                                 const NewtonSettings& settings) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport report;
    report.nx = problem.grid.nx;
    report.nt = problem.grid.nt;
    report.nu = problem.nu;

    std::vector<double> F = residual(problem, state, settings.workers);
    double res = norm2(F);
    const double res0 = res;

    std::optional<Preconditioner> precond;
    std::vector<std::size_t> order;
    if (settings.jacobian_mode == JacobianMode::EXACT)
        order = time_interleaved_order(state.layout);

    LgmresSettings krylov;
    krylov.restart = settings.krylov_restart;
    krylov.augmentation_depth = settings.augmentation_depth;
    krylov.rel_tol = settings.krylov_tol;
    krylov.max_iters = settings.krylov_max_iters;

    while (res > settings.residual_tol && report.iterations < settings.max_newton_iters) {
        if (!std::isfinite(res) || res > settings.divergence_factor * std::max(res0, 1.0))
            throw DivergenceError("newton diverged: residual " + std::to_string(res), state);

        const CsrMatrix J = jacobian(problem, state, JacobianMode::EXACT, settings.workers);
        if (!precond || settings.refactor_each_iteration) {
            if (settings.jacobian_mode == JacobianMode::DECOUPLED) {
                const CsrMatrix approx =
                    jacobian(problem, state, JacobianMode::DECOUPLED, settings.workers);
                precond.emplace(approx);
            } else {
                precond.emplace(J, order);
            }
        }

        std::vector<double> rhs(F.size());
        for (std::size_t i = 0; i < F.size(); ++i) rhs[i] = -F[i];
        const LinearOperator apply_j = [&J](std::span<const double> in, std::span<double> out) {
            J.multiply(in, out);
        };
        const LgmresResult step =
            lgmres_solve(apply_j, rhs, precond->as_operator(), state.w.size(), krylov);
        report.krylov_iterations += step.iterations;

        for (std::size_t i = 0; i < state.w.size(); ++i) state.w[i] += step.x[i];
        ++report.iterations;

        F = residual(problem, state, settings.workers);
        res = norm2(F);
    }

    report.final_residual = res;
    report.converged = res <= settings.residual_tol;
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(state), report};
}

}  // namespace nmfg
