#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nmfg/cost_models.hpp"
#include "nmfg/grid.hpp"
#include "nmfg/interpolate.hpp"
#include "nmfg/layout.hpp"
#include "nmfg/scenario.hpp"

namespace nmfg {

/// Gaussian-kernel density estimate on the ring: probability-normalized,
/// nearest-image distance plus the two +-L image terms.
double kde_density(std::span<const double> positions, double sigma, double ring_length,
                   double x);
double kde_density_grad(std::span<const double> positions, double sigma, double ring_length,
                        double x);

struct KdeSettings {
    /// Bandwidth multiplier: sigma = bandwidth_factor * N_j at micro scale,
    /// i.e. bandwidth_factor * N_j / n in macro units.
    double bandwidth_factor = 0.05;
};

struct BestResponseSettings {
    double step = 0.1;       ///< fixed gradient step tau (normalized control units)
    double tol = 1e-4;       ///< stop when the projected gradient inf-norm drops below
    int max_iters = 500;
    double stagnation = 1e-10;  ///< stop when successive iterates agree to this
};

struct MicroSettings {
    std::uint64_t seed = 1;
    KdeSettings kde;
    BestResponseSettings best_response;
    int workers = 1;
};

/// Sampled vehicles with trajectories, constructed controls, best
/// responses and per-vehicle costs. All positions and speeds are kept in
/// macroscopic units; the micro road is the macro ring stretched by
/// scale_n, so micro values are these times scale_n.
struct MicroEnsemble {
    Scenario scenario;  ///< macro (n = 1) scenario
    Grid grid;          ///< macro grid whose time levels drive the integration
    int scale_n = 1;
    std::vector<int> counts;              ///< N_j per class
    std::vector<int> first;               ///< first vehicle index per class, total appended
    std::vector<double> sigma;            ///< KDE bandwidth per class, macro units
    std::vector<double> class_mass;       ///< integral of zeta_0^j, macro units
    std::vector<std::vector<double>> x;      ///< [vehicle][0..nt]
    std::vector<std::vector<double>> v_hat;  ///< [vehicle][0..nt-1]
    std::vector<std::vector<double>> v_bar;  ///< [vehicle][0..nt-1]
    std::vector<double> j_hat;
    std::vector<double> j_bar;
    std::vector<double> eps;
    std::vector<char> best_response_converged;

    int total() const { return first.empty() ? 0 : first.back(); }
    int vehicle_class(int i) const;
};

/// Inverse-CDF samples from the normalized initial densities, one list per
/// class; deterministic for a fixed seed.
std::vector<std::vector<double>> sample_initial_positions(const Scenario& scenario,
                                                          std::uint64_t seed,
                                                          std::span<const int> counts);

/// The frozen KDE density fields of an ensemble, tabulated per time level
/// on a fine spatial grid and interpolated with periodic cubic splines, so
/// cost and adjoint evaluations see one smooth field.
class DensityFields {
public:
    DensityFields() = default;
    DensityFields(const MicroEnsemble& ensemble, int grid_points = 1024);
    double density(int m, int n, double x) const;       ///< macro-unit density
    double density_grad(int m, int n, double x) const;  ///< d density / dx

private:
    std::vector<PeriodicCubicSpline> splines_;  ///< [class * (nt+1) + time]
    int classes_ = 0;
    int levels_ = 0;
};

/// Integrates x' = u*(t, x) by forward Euler on the macro time grid and
/// records the constructed controls v_hat along each trajectory.
MicroEnsemble constructed_controls(const SolverState& macro, const Scenario& scenario,
                                   const Grid& grid, int scale_n,
                                   const std::vector<std::vector<double>>& initial_positions,
                                   const KdeSettings& kde = {});

/// Left-endpoint quadrature of f_j along one trajectory against the frozen
/// ensemble fields.
double vehicle_cost(std::span<const double> trajectory, std::span<const double> controls,
                    const DensityFields& fields, const CostModel& model, int j,
                    const Grid& grid);

struct BestResponseResult {
    std::vector<double> controls;  ///< macro-unit speed series
    bool converged = false;
    int iterations = 0;
    double cost = 0.0;
};

/// Projected gradient descent on vehicle i's normalized control, all other
/// vehicles frozen at their constructed controls; adjoint-based gradient.
BestResponseResult best_response(const MicroEnsemble& ensemble, const DensityFields& fields,
                                 const CostModel& model, int vehicle,
                                 const BestResponseSettings& settings);

/// The adjoint gradient of vehicle_cost with respect to the normalized
/// control series, as used inside best_response (exposed for testing).
std::vector<double> best_response_gradient(const MicroEnsemble& ensemble,
                                           const DensityFields& fields, const CostModel& model,
                                           int vehicle, std::span<const double> normalized);

struct AccuracyReport {
    double max_ra = 0.0;
    double mean_ra = 0.0;
};

/// eps_i = J(v_hat) - J(v_bar); MaxRA and MeanRA over all vehicles.
AccuracyReport epsilon_report(const MicroEnsemble& ensemble);

/// Least-squares slopes of log MaxRA and log MeanRA against log N, negated:
/// metric ~ N^-mu, N^-eta.
std::pair<double, double> fit_slopes(std::span<const double> n_values,
                                     std::span<const double> max_ra,
                                     std::span<const double> mean_ra);

/// ||v_hat - v_bar||_inf for one vehicle, normalized by the class u_max.
double control_gap(const MicroEnsemble& ensemble, int vehicle);

/// Full bridge for one vehicle count: sample, integrate, best-respond and
/// report. The macro state must be a converged solve of (scenario, kind)
/// on `grid`.
struct BridgeResult {
    MicroEnsemble ensemble;
    AccuracyReport accuracy;
    double mean_ev = 0.0;
    double max_ev = 0.0;
    int non_converged = 0;
};
BridgeResult run_micro_bridge(const SolverState& macro, const Scenario& scenario, CostKind kind,
                              const Grid& grid, int scale_n, const MicroSettings& settings);

}  // namespace nmfg
