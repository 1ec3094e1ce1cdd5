#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "nmfg/newton.hpp"
#include "nmfg/residual.hpp"
#include "nmfg/scenario.hpp"

namespace nmfg {

enum class InterpKind { Linear, Cubic };

struct ProlongOptions {
    InterpKind space = InterpKind::Cubic;
    InterpKind time = InterpKind::Linear;
};

/// Interpolates every field of a coarse solution onto a finer grid:
/// periodic interpolation in space, clamped interpolation in time. The
/// result is the nested-iteration initial guess.
SolverState prolong(const SolverState& state, const Grid& from, const Grid& to,
                    const ProlongOptions& options = {});

/// Samples a fine state at the nodes of a coarser grid; requires the
/// coarse nodes and time levels to be subsets of the fine ones.
SolverState restrict_state(const SolverState& state, const Grid& from, const Grid& to);

/// One rung of the two-grid / viscosity continuation ladder.
struct ContinuationRung {
    int nx = 0;
    int nt = 0;
    double nu = 0.0;
};

struct ContinuationSchedule {
    std::vector<ContinuationRung> rungs;  ///< coarsest first
    ProlongOptions prolong_options;
};

void validate_schedule(const ContinuationSchedule& schedule);

/// A rung failed hard (singular preconditioner or divergence); carries what
/// completed before the failure.
class ScheduleAbortedError : public Error {
public:
    ScheduleAbortedError(const std::string& what, int rung_index,
                         std::vector<SolveReport> completed, std::shared_ptr<SolverState> state)
        : Error(what), rung(rung_index), completed_reports(std::move(completed)),
          last_state(std::move(state)) {}
    int rung;
    std::vector<SolveReport> completed_reports;
    std::shared_ptr<SolverState> last_state;
};

/// Solves rung 0 from the zero state, then each later rung from the
/// prolonged previous solution at that rung's viscosity. Each report's
/// rmse_vs_reference holds the RMSE between the prolonged guess and that
/// rung's converged solution.
std::pair<SolverState, std::vector<SolveReport>> run_schedule(
    const ContinuationSchedule& schedule, CostKind kind, const Scenario& scenario,
    const NewtonSettings& settings = {});

/// Ladder presets. `lwr_ladder` is the two-grid ladder 15x60 .. 240x960 at
/// nu = 0; `regularized_ladder` bootstraps at 15x60 then follows the
/// (30x240, 0.04) .. (240x3840, 0.01) viscosity-continuation rungs,
/// truncated to `max_rungs` measured rungs.
ContinuationSchedule lwr_ladder(int max_rungs = 4);
ContinuationSchedule regularized_ladder(int max_rungs = 4);
/// Ladder for the two-class runs: doubling grids at fixed nt/nx ratio with
/// a geometric viscosity descent from nu_start to nu_end. The default time
/// ratio runs the Lax-Friedrichs step at three quarters of the CFL limit,
/// which keeps its numerical dissipation low; each rung's nu is clamped so
/// the combined advection-diffusion explicit step stays stable.
ContinuationSchedule two_class_ladder(int nx_final, double nu_start, double nu_end,
                                      int nt_per_nx = 4, double road_length = 2.0,
                                      double horizon = 3.0);
/// Chain used by the micro-bridge presets: refines to 120x480 with a
/// small final viscosity, the practical frontier at which the refined
/// rungs still converge quickly.
ContinuationSchedule bridge_ladder();

}  // namespace nmfg
