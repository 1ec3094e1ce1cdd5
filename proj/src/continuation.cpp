#include "nmfg/continuation.hpp"

#include <algorithm>
#include <cmath>

#include "nmfg/errors.hpp"
#include "nmfg/interpolate.hpp"

namespace nmfg {

namespace {

int field_levels(Field f, int nt) { return f == Field::U ? nt : nt + 1; }

double read_field(const SolverState& s, Field f, int j, int n, int k) {
    switch (f) {
        case Field::Rho: return s.rho(j, n, k);
        case Field::U: return s.u(j, n, k);
        case Field::V: return s.v(j, n, k);
    }
    return 0.0;
}

void write_field(SolverState& s, Field f, int j, int n, int k, double value) {
    switch (f) {
        case Field::Rho: s.rho(j, n, k) = value; break;
        case Field::U: s.u(j, n, k) = value; break;
        case Field::V: s.v(j, n, k) = value; break;
    }
}

}  // namespace

SolverState prolong(const SolverState& state, const Grid& from, const Grid& to,
                    const ProlongOptions& options) {
    if (to.nx < from.nx || to.nt < from.nt)
        throw InvalidParameterError("prolong: target grid must be at least as fine");
    if (std::abs(from.road_length - to.road_length) > 1e-12 ||
        std::abs(from.horizon - to.horizon) > 1e-12)
        throw InvalidParameterError("prolong: grids must cover the same domain");
    const int classes = state.layout.n_classes;
    SolverState out(UnknownLayout(classes, to.nx, to.nt));

    for (int j = 0; j < classes; ++j) {
        for (Field f : {Field::Rho, Field::U, Field::V}) {
            const int levels_from = field_levels(f, from.nt);
            const int levels_to = field_levels(f, to.nt);

            // space pass: coarse profiles evaluated at the fine nodes
            std::vector<std::vector<double>> fine_space(
                static_cast<std::size_t>(levels_from),
                std::vector<double>(static_cast<std::size_t>(to.nx)));
            std::vector<double> profile(static_cast<std::size_t>(from.nx));
            for (int n = 0; n < levels_from; ++n) {
                for (int k = 0; k < from.nx; ++k)
                    profile[static_cast<std::size_t>(k)] = read_field(state, f, j, n, k);
                if (options.space == InterpKind::Cubic) {
                    const PeriodicCubicSpline spline(profile, 0.0, from.dx);
                    for (int k = 0; k < to.nx; ++k)
                        fine_space[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] =
                            spline(to.x(k));
                } else {
                    for (int k = 0; k < to.nx; ++k)
                        fine_space[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] =
                            periodic_linear_interp(profile, 0.0, from.dx, to.x(k));
                }
            }

            // time pass per fine cell; u has no level nt and clamps there
            std::vector<double> column(static_cast<std::size_t>(levels_from));
            for (int k = 0; k < to.nx; ++k) {
                for (int n = 0; n < levels_from; ++n)
                    column[static_cast<std::size_t>(n)] =
                        fine_space[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
                if (options.time == InterpKind::Cubic && levels_from >= 3) {
                    const NaturalCubicSpline spline(column, 0.0, from.dt);
                    for (int n = 0; n < levels_to; ++n)
                        write_field(out, f, j, n, k, spline(to.t(n)));
                } else {
                    for (int n = 0; n < levels_to; ++n)
                        write_field(out, f, j, n, k,
                                    clamped_linear_interp(column, 0.0, from.dt, to.t(n)));
                }
            }
        }
    }
    return out;
}

SolverState restrict_state(const SolverState& state, const Grid& from, const Grid& to) {
    if (from.nx % to.nx != 0 || from.nt % to.nt != 0)
        throw InvalidParameterError("restrict: coarse grid must nest in the fine grid");
    const int rx = from.nx / to.nx;
    const int rt = from.nt / to.nt;
    const int classes = state.layout.n_classes;
    SolverState out(UnknownLayout(classes, to.nx, to.nt));
    for (int j = 0; j < classes; ++j)
        for (Field f : {Field::Rho, Field::U, Field::V}) {
            const int levels = field_levels(f, to.nt);
            for (int n = 0; n < levels; ++n)
                for (int k = 0; k < to.nx; ++k) {
                    const int nf = std::min(n * rt, field_levels(f, from.nt) - 1);
                    write_field(out, f, j, n, k, read_field(state, f, j, nf, k * rx));
                }
        }
    return out;
}

void validate_schedule(const ContinuationSchedule& schedule) {
    if (schedule.rungs.empty()) throw InvalidParameterError("schedule: needs at least one rung");
    for (std::size_t i = 0; i < schedule.rungs.size(); ++i) {
        const auto& r = schedule.rungs[i];
        if (r.nx < 3 || r.nt < 1) throw InvalidParameterError("schedule: rung grid too small");
        if (r.nu < 0.0 || r.nu > 0.05)
            throw InvalidParameterError("schedule: nu must lie in [0, 0.05]");
        if (i > 0) {
            if (r.nx <= schedule.rungs[i - 1].nx)
                throw InvalidParameterError("schedule: nx must be strictly increasing");
            if (r.nu > schedule.rungs[i - 1].nu)
                throw InvalidParameterError("schedule: nu must be nonincreasing");
        }
    }
}

std::pair<SolverState, std::vector<SolveReport>> run_schedule(
    const ContinuationSchedule& schedule, CostKind kind, const Scenario& scenario,
    const NewtonSettings& settings) {
    validate_schedule(schedule);
    std::vector<SolveReport> reports;
    SolverState current;
    Grid prev_grid;

    for (std::size_t i = 0; i < schedule.rungs.size(); ++i) {
        const auto& rung = schedule.rungs[i];
        const Grid grid(scenario.road_length, scenario.horizon, rung.nx, rung.nt);
        const DiscreteProblem problem = make_problem(scenario, kind, grid, rung.nu);

        SolverState guess;
        if (i == 0)
            guess = SolverState(problem.layout());
        else
            guess = prolong(current, prev_grid, grid, schedule.prolong_options);

        try {
            auto [solved, report] = newton_solve(problem, guess, settings);
            if (i > 0) report.rmse_vs_reference = rmse(guess, solved);
            reports.push_back(report);
            current = std::move(solved);
        } catch (const SingularPreconditionerError& e) {
            throw ScheduleAbortedError(
                "continuation aborted at rung " + std::to_string(i) + ": " + e.what(),
                static_cast<int>(i), std::move(reports),
                std::make_shared<SolverState>(std::move(current)));
        } catch (const DivergenceError& e) {
            throw ScheduleAbortedError(
                "continuation aborted at rung " + std::to_string(i) + ": " + e.what(),
                static_cast<int>(i), std::move(reports), e.last_state);
        }
        prev_grid = grid;
    }
    return {std::move(current), std::move(reports)};
}

ContinuationSchedule lwr_ladder(int max_rungs) {
    ContinuationSchedule s;
    s.rungs.push_back({15, 60, 0.0});
    const int ladder_nx[] = {30, 60, 120, 240, 480, 960};
    for (int i = 0; i < std::min<int>(max_rungs, 6); ++i)
        s.rungs.push_back({ladder_nx[i], 4 * ladder_nx[i], 0.0});
    return s;
}

ContinuationSchedule regularized_ladder(int max_rungs) {
    ContinuationSchedule s;
    s.rungs.push_back({15, 60, 0.04});
    const ContinuationRung ladder[] = {
        {30, 240, 0.04}, {60, 720, 0.03}, {120, 1920, 0.02}, {240, 3840, 0.01}};
    for (int i = 0; i < std::min<int>(max_rungs, 4); ++i) s.rungs.push_back(ladder[i]);
    return s;
}

ContinuationSchedule bridge_ladder() {
    // refinement chain tuned for the micro bridge: viscosity descends as
    // far as the refined rungs still converge quickly, keeping the
    // regularization bias seen by the sampled vehicles low
    ContinuationSchedule s;
    s.rungs = {{15, 60, 0.04},
               {30, 120, 0.015},
               {60, 240, 0.006},
               {120, 480, 0.0025}};
    return s;
}

ContinuationSchedule two_class_ladder(int nx_final, double nu_start, double nu_end,
                                      int nt_per_nx, double road_length, double horizon) {
    if (nx_final < 15 || nu_end > nu_start)
        throw InvalidParameterError("two_class_ladder: bad parameters");
    std::vector<int> ladder;
    for (int nx = nx_final; nx >= 30; nx /= 2) ladder.push_back(nx);
    ladder.push_back(15);
    std::reverse(ladder.begin(), ladder.end());
    ContinuationSchedule s;
    const int n = static_cast<int>(ladder.size());
    double prev_nu = nu_start;
    // a zero target still descends through regularized intermediate rungs
    const double nu_floor = std::max(nu_end, nu_start / 16.0);
    for (int i = 0; i < n; ++i) {
        const double frac = (n == 1) ? 1.0 : static_cast<double>(i) / (n - 1);
        // geometric descent from nu_start towards nu_end
        double nu = (nu_start == 0.0) ? 0.0 : nu_start * std::pow(nu_floor / nu_start, frac);
        // the zero-guess bootstrap rung gets a gentler time step
        const int ratio = (i == 0) ? std::max(4, nt_per_nx) : nt_per_nx;
        const int nx = ladder[static_cast<std::size_t>(i)];
        const int nt = ratio * nx;
        // keep the explicit march comfortably stable: the advection part
        // lambda u_max plus the viscosity part 2 nu dt / dx^2 must stay
        // below one with margin (unit free-flow speed in macro units)
        const double dx = road_length / nx;
        const double dt = horizon / nt;
        const double advection = dt / dx;
        const double headroom = std::max(0.85 - advection, 0.05);
        nu = std::min({nu, headroom * dx * dx / (2.0 * dt), prev_nu});
        if (nu_end == 0.0 && i == n - 1) nu = 0.0;
        s.rungs.push_back({nx, nt, nu});
        prev_nu = nu;
    }
    return s;
}

}  // namespace nmfg
