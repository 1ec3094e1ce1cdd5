#include "nmfg/residual.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "nmfg/errors.hpp"
#include "nmfg/parallel.hpp"

namespace nmfg {

namespace {

void check_state(const DiscreteProblem& problem, const SolverState& state) {
    const UnknownLayout expected = problem.layout();
    if (state.layout.n_classes != expected.n_classes || state.layout.nx != expected.nx ||
        state.layout.nt != expected.nt || state.w.size() != expected.size())
        throw InvalidParameterError("state layout does not match problem grid/model");
    if (problem.initial_cells.size() != static_cast<std::size_t>(expected.n_classes))
        throw InvalidParameterError("problem needs one initial-density row per class");
    for (const auto& cells : problem.initial_cells)
        if (cells.size() != static_cast<std::size_t>(expected.nx))
            throw InvalidParameterError("initial cell averages must have nx entries");
}

inline std::array<double, 2> densities_at(const SolverState& s, int n, int k) {
    std::array<double, 2> rho{0.0, 0.0};
    for (int j = 0; j < s.layout.n_classes; ++j) rho[static_cast<std::size_t>(j)] = s.rho(j, n, k);
    return rho;
}

/// Fixed-capacity sorted (column, value) row under construction.
struct RowEntries {
    std::array<std::pair<std::size_t, double>, 8> e;
    int n = 0;

    void add(std::size_t col, double val) {
        int i = n++;
        while (i > 0 && e[static_cast<std::size_t>(i - 1)].first > col) {
            e[static_cast<std::size_t>(i)] = e[static_cast<std::size_t>(i - 1)];
            --i;
        }
        e[static_cast<std::size_t>(i)] = {col, val};
    }
};

}  // namespace

DiscreteProblem make_problem(const Scenario& scenario, CostKind kind, const Grid& grid,
                             double nu) {
    if (std::abs(grid.road_length - scenario.road_length) > 1e-12 * scenario.road_length ||
        std::abs(grid.horizon - scenario.horizon) > 1e-12 * scenario.horizon)
        throw InvalidParameterError("grid does not cover the scenario domain");
    DiscreteProblem p{make_cost_model(kind, scenario), grid, nu, {}};
    p.initial_cells.reserve(scenario.initial_density.size());
    for (const auto& spec : scenario.initial_density)
        p.initial_cells.push_back(cell_averages(spec, grid));
    return p;
}

std::vector<double> residual(const DiscreteProblem& problem, const SolverState& state,
                             int workers) {
    check_state(problem, state);
    const UnknownLayout& L = state.layout;
    const Grid& g = problem.grid;
    const CostModel& model = problem.model;
    const double inv_dt = 1.0 / g.dt;
    const double inv_2dx = 0.5 / g.dx;
    const double visc = problem.nu / (g.dx * g.dx);

    std::vector<double> F(L.size(), 0.0);
    parallel_for_chunks(static_cast<std::size_t>(g.nt) + 1, workers, [&](std::size_t b,
                                                                         std::size_t e) {
        for (std::size_t ns = b; ns < e; ++ns) {
            const int n = static_cast<int>(ns);
            for (int j = 0; j < L.n_classes; ++j) {
                if (n == 0)
                    for (int k = 0; k < g.nx; ++k)
                        F[L.row_initial(j, k)] =
                            state.rho(j, 0, k) -
                            problem.initial_cells[static_cast<std::size_t>(j)]
                                                 [static_cast<std::size_t>(k)];
                if (n == g.nt) {
                    for (int k = 0; k < g.nx; ++k)
                        F[L.row_terminal(j, k)] = state.v(j, g.nt, k) - model.terminal_cost(g.x(k));
                    continue;
                }
                for (int k = 0; k < g.nx; ++k) {
                    const int km = wrap_index(k - 1, g.nx);
                    const int kp = wrap_index(k + 1, g.nx);
                    const std::array<double, 2> rho = densities_at(state, n, k);

                    // Lax-Friedrichs continuity, rate form
                    F[L.row_continuity(j, n, k)] =
                        (state.rho(j, n + 1, k) -
                         0.5 * (state.rho(j, n, km) + state.rho(j, n, kp))) *
                            inv_dt +
                        (state.rho(j, n, kp) * state.u(j, n, kp) -
                         state.rho(j, n, km) * state.u(j, n, km)) *
                            inv_2dx;

                    // Upwind HJB with optional viscosity, rate form
                    const double p = (state.v(j, n + 1, kp) - state.v(j, n + 1, k)) / g.dx;
                    F[L.row_hjb(j, n, k)] =
                        (state.v(j, n + 1, k) - state.v(j, n, k)) * inv_dt +
                        model.hamiltonian(j, p, rho) +
                        visc * (state.v(j, n + 1, kp) - 2.0 * state.v(j, n + 1, k) +
                                state.v(j, n + 1, km));

                    // Feedback law
                    F[L.row_feedback(j, n, k)] =
                        state.u(j, n, k) - model.optimal_velocity(j, p, rho);
                }
            }
        }
    });

    for (std::size_t i = 0; i < F.size(); ++i)
        if (!std::isfinite(F[i]))
            throw NumericalOverflowError("non-finite residual in " + L.row_block_name(i));
    return F;
}

CsrMatrix jacobian(const DiscreteProblem& problem, const SolverState& state, JacobianMode mode,
                   int workers) {
    check_state(problem, state);
    const UnknownLayout& L = state.layout;
    const Grid& g = problem.grid;
    const CostModel& model = problem.model;
    const bool exact = (mode == JacobianMode::EXACT);
    const double inv_dt = 1.0 / g.dt;
    const double inv_dx = 1.0 / g.dx;
    const double inv_2dx = 0.5 / g.dx;
    const double visc = problem.nu / (g.dx * g.dx);

    CsrMatrix A;
    A.rows = A.cols = L.size();
    A.row_ptr.assign(A.rows + 1, 0);

    const std::size_t ce_nnz = 5;
    const std::size_t hjb_nnz = 4 + (exact ? static_cast<std::size_t>(L.n_classes) : 0);
    const std::size_t fb_nnz = 1 + (exact ? 2 + static_cast<std::size_t>(L.n_classes) : 0);

    // Row sizes first, then a prefix sum gives row_ptr.
    for (int j = 0; j < L.n_classes; ++j) {
        for (int k = 0; k < g.nx; ++k) {
            A.row_ptr[L.row_initial(j, k) + 1] = 1;
            A.row_ptr[L.row_terminal(j, k) + 1] = 1;
        }
        for (int n = 0; n < g.nt; ++n)
            for (int k = 0; k < g.nx; ++k) {
                A.row_ptr[L.row_continuity(j, n, k) + 1] = ce_nnz;
                A.row_ptr[L.row_hjb(j, n, k) + 1] = hjb_nnz;
                A.row_ptr[L.row_feedback(j, n, k) + 1] = fb_nnz;
            }
    }
    for (std::size_t i = 0; i < A.rows; ++i) A.row_ptr[i + 1] += A.row_ptr[i];
    A.col.resize(A.row_ptr.back());
    A.val.resize(A.row_ptr.back());

    auto write_row = [&A](std::size_t row, const RowEntries& entries) {
        std::size_t p = A.row_ptr[row];
        for (int i = 0; i < entries.n; ++i, ++p) {
            A.col[p] = static_cast<int>(entries.e[static_cast<std::size_t>(i)].first);
            A.val[p] = entries.e[static_cast<std::size_t>(i)].second;
        }
    };

    parallel_for_chunks(static_cast<std::size_t>(g.nt) + 1, workers, [&](std::size_t b,
                                                                         std::size_t e) {
        for (std::size_t ns = b; ns < e; ++ns) {
            const int n = static_cast<int>(ns);
            for (int j = 0; j < L.n_classes; ++j) {
                if (n == 0)
                    for (int k = 0; k < g.nx; ++k) {
                        RowEntries r;
                        r.add(L.rho_index(j, 0, k), 1.0);
                        write_row(L.row_initial(j, k), r);
                    }
                if (n == g.nt) {
                    for (int k = 0; k < g.nx; ++k) {
                        RowEntries r;
                        r.add(L.v_index(j, g.nt, k), 1.0);
                        write_row(L.row_terminal(j, k), r);
                    }
                    continue;
                }
                for (int k = 0; k < g.nx; ++k) {
                    const int km = wrap_index(k - 1, g.nx);
                    const int kp = wrap_index(k + 1, g.nx);
                    const std::array<double, 2> rho = densities_at(state, n, k);
                    const double p = (state.v(j, n + 1, kp) - state.v(j, n + 1, k)) * inv_dx;

                    {  // continuity row
                        RowEntries r;
                        r.add(L.rho_index(j, n + 1, k), inv_dt);
                        r.add(L.rho_index(j, n, km), -0.5 * inv_dt - state.u(j, n, km) * inv_2dx);
                        r.add(L.rho_index(j, n, kp), -0.5 * inv_dt + state.u(j, n, kp) * inv_2dx);
                        r.add(L.u_index(j, n, km), -state.rho(j, n, km) * inv_2dx);
                        r.add(L.u_index(j, n, kp), state.rho(j, n, kp) * inv_2dx);
                        write_row(L.row_continuity(j, n, k), r);
                    }
                    {  // hjb row
                        RowEntries r;
                        double h_p = 0.0;
                        if (exact) {
                            const auto hg = model.hamiltonian_grads(j, p, rho);
                            h_p = hg.dp;
                            for (int m = 0; m < L.n_classes; ++m)
                                r.add(L.rho_index(m, n, k), hg.drho[static_cast<std::size_t>(m)]);
                        }
                        r.add(L.v_index(j, n, k), -inv_dt);
                        r.add(L.v_index(j, n + 1, k), inv_dt - 2.0 * visc - h_p * inv_dx);
                        r.add(L.v_index(j, n + 1, kp), visc + h_p * inv_dx);
                        r.add(L.v_index(j, n + 1, km), visc);
                        write_row(L.row_hjb(j, n, k), r);
                    }
                    {  // feedback row
                        RowEntries r;
                        r.add(L.u_index(j, n, k), 1.0);
                        if (exact) {
                            const auto vg = model.velocity_grads(j, p, rho);
                            for (int m = 0; m < L.n_classes; ++m)
                                r.add(L.rho_index(m, n, k), -vg.drho[static_cast<std::size_t>(m)]);
                            r.add(L.v_index(j, n + 1, k), vg.dp * inv_dx);
                            r.add(L.v_index(j, n + 1, kp), -vg.dp * inv_dx);
                        }
                        write_row(L.row_feedback(j, n, k), r);
                    }
                }
            }
        }
    });
    return A;
}

std::vector<double> mass(const SolverState& state, const Grid& grid, int j) {
    if (j < 0 || j >= state.layout.n_classes)
        throw InvalidParameterError("mass: class index out of range");
    std::vector<double> out(static_cast<std::size_t>(grid.nt) + 1, 0.0);
    for (int n = 0; n <= grid.nt; ++n) {
        double sum = 0.0;
        for (int k = 0; k < grid.nx; ++k) sum += state.rho(j, n, k);
        out[static_cast<std::size_t>(n)] = grid.dx * sum;
    }
    return out;
}

double norm2(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum);
}

}  // namespace nmfg
