#include "nmfg/micro.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>

#include "nmfg/errors.hpp"
#include "nmfg/parallel.hpp"

namespace nmfg {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double gauss_kernel(double s) { return kInvSqrt2Pi * std::exp(-0.5 * s * s); }

double wrap_position(double x, double length) {
    double y = std::fmod(x, length);
    return y < 0.0 ? y + length : y;
}

/// Nearest-image signed distance on the ring, in [-L/2, L/2).
double ring_distance(double x, double xi, double length) {
    double d = std::fmod(x - xi, length);
    if (d < -0.5 * length) d += length;
    if (d >= 0.5 * length) d -= length;
    return d;
}

/// SplitMix64; used instead of std::uniform_real_distribution so samples
/// are identical across standard libraries.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

double class_mass_integral(const InitialDensitySpec& spec, double length) {
    // fine trapezoid; the integrand is bounded and near-smooth
    const int n = 20000;
    const double h = length / n;
    double sum = 0.5 * (density_at(spec, 0.0) + density_at(spec, length));
    for (int i = 1; i < n; ++i) sum += density_at(spec, h * i);
    return sum * h;
}

}  // namespace

double kde_density(std::span<const double> positions, double sigma, double ring_length,
                   double x) {
    if (!(sigma > 0.0)) throw InvalidParameterError("kde: bandwidth must be positive");
    if (positions.empty()) throw InvalidParameterError("kde: empty position list");
    double sum = 0.0;
    for (double xi : positions) {
        const double d = ring_distance(x, xi, ring_length);
        sum += gauss_kernel(d / sigma) + gauss_kernel((d - ring_length) / sigma) +
               gauss_kernel((d + ring_length) / sigma);
    }
    return sum / (sigma * static_cast<double>(positions.size()));
}

double kde_density_grad(std::span<const double> positions, double sigma, double ring_length,
                        double x) {
    if (!(sigma > 0.0)) throw InvalidParameterError("kde: bandwidth must be positive");
    double sum = 0.0;
    for (double xi : positions) {
        const double d = ring_distance(x, xi, ring_length);
        for (double img : {d, d - ring_length, d + ring_length})
            sum += -img / (sigma * sigma) * gauss_kernel(img / sigma);
    }
    return sum / (sigma * static_cast<double>(positions.size()));
}

int MicroEnsemble::vehicle_class(int i) const {
    for (std::size_t j = 0; j + 1 < first.size(); ++j)
        if (i < first[j + 1]) return static_cast<int>(j);
    throw InvalidParameterError("vehicle index out of range");
}

std::vector<std::vector<double>> sample_initial_positions(const Scenario& scenario,
                                                          std::uint64_t seed,
                                                          std::span<const int> counts) {
    if (counts.size() != scenario.initial_density.size())
        throw InvalidParameterError("sample: one count per class required");
    const int table = 10000;
    std::vector<std::vector<double>> out(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) {
        const auto& spec = scenario.initial_density[j];
        // cumulative trapezoid of zeta_0 on a uniform table
        std::vector<double> cdf(static_cast<std::size_t>(table) + 1, 0.0);
        const double h = scenario.road_length / table;
        double prev = density_at(spec, 0.0);
        for (int i = 1; i <= table; ++i) {
            const double cur = density_at(spec, h * i);
            cdf[static_cast<std::size_t>(i)] =
                cdf[static_cast<std::size_t>(i - 1)] + 0.5 * (prev + cur) * h;
            prev = cur;
        }
        const double total = cdf.back();
        if (!(total > 0.0))
            throw InvalidParameterError("sample: initial density of class " + std::to_string(j) +
                                        " has zero mass");
        SplitMix64 rng(seed * 0x100000001b3ULL + j + 1);
        auto& positions = out[j];
        positions.reserve(static_cast<std::size_t>(counts[j]));
        for (int i = 0; i < counts[j]; ++i) {
            const double target = rng.uniform01() * total;
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
            const std::size_t hi = std::min<std::size_t>(
                static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
            const std::size_t lo = hi - 1;
            const double seg = cdf[hi] - cdf[lo];
            const double frac = seg > 0.0 ? (target - cdf[lo]) / seg : 0.0;
            positions.push_back(h * (static_cast<double>(lo) + frac));
        }
    }
    return out;
}

DensityFields::DensityFields(const MicroEnsemble& ensemble, int grid_points) {
    classes_ = static_cast<int>(ensemble.counts.size());
    levels_ = ensemble.grid.nt + 1;
    const double length = ensemble.scenario.road_length;
    const double dxg = length / grid_points;
    splines_.reserve(static_cast<std::size_t>(classes_ * levels_));
    std::vector<double> table(static_cast<std::size_t>(grid_points));
    for (int m = 0; m < classes_; ++m) {
        const double sigma = ensemble.sigma[static_cast<std::size_t>(m)];
        const double scale = ensemble.class_mass[static_cast<std::size_t>(m)] /
                             (sigma * ensemble.counts[static_cast<std::size_t>(m)]);
        const int window = static_cast<int>(std::ceil(6.0 * sigma / dxg));
        for (int n = 0; n < levels_; ++n) {
            std::fill(table.begin(), table.end(), 0.0);
            for (int i = ensemble.first[static_cast<std::size_t>(m)];
                 i < ensemble.first[static_cast<std::size_t>(m) + 1]; ++i) {
                const double xi = ensemble.x[static_cast<std::size_t>(i)]
                                            [static_cast<std::size_t>(n)];
                const int center = static_cast<int>(std::floor(xi / dxg));
                for (int g = center - window; g <= center + window + 1; ++g) {
                    const double d = dxg * g - xi;
                    table[static_cast<std::size_t>(wrap_index(g, grid_points))] +=
                        scale * gauss_kernel(d / sigma);
                }
            }
            splines_.emplace_back(table, 0.0, dxg);
        }
    }
}

double DensityFields::density(int m, int n, double x) const {
    if (m >= classes_) return 0.0;
    return splines_[static_cast<std::size_t>(m * levels_ + n)](x);
}

double DensityFields::density_grad(int m, int n, double x) const {
    if (m >= classes_) return 0.0;
    return splines_[static_cast<std::size_t>(m * levels_ + n)].derivative(x);
}

MicroEnsemble constructed_controls(const SolverState& macro, const Scenario& scenario,
                                   const Grid& grid, int scale_n,
                                   const std::vector<std::vector<double>>& initial_positions,
                                   const KdeSettings& kde) {
    const int classes = scenario.n_classes();
    if (macro.layout.n_classes != classes || macro.layout.nx != grid.nx ||
        macro.layout.nt != grid.nt)
        throw InvalidParameterError("constructed_controls: macro state does not match grid");
    if (static_cast<int>(initial_positions.size()) != classes)
        throw InvalidParameterError("constructed_controls: positions per class required");

    MicroEnsemble e;
    e.scenario = scenario;
    e.grid = grid;
    e.scale_n = scale_n;
    e.first.assign(static_cast<std::size_t>(classes) + 1, 0);
    for (int j = 0; j < classes; ++j) {
        e.counts.push_back(static_cast<int>(initial_positions[static_cast<std::size_t>(j)].size()));
        e.first[static_cast<std::size_t>(j) + 1] =
            e.first[static_cast<std::size_t>(j)] + e.counts.back();
        e.sigma.push_back(kde.bandwidth_factor * e.counts.back() / static_cast<double>(scale_n));
        e.class_mass.push_back(
            class_mass_integral(scenario.initial_density[static_cast<std::size_t>(j)],
                                scenario.road_length));
    }
    const int total = e.first.back();
    e.x.assign(static_cast<std::size_t>(total),
               std::vector<double>(static_cast<std::size_t>(grid.nt) + 1, 0.0));
    e.v_hat.assign(static_cast<std::size_t>(total),
                   std::vector<double>(static_cast<std::size_t>(grid.nt), 0.0));

    for (int j = 0; j < classes; ++j)
        for (int i = 0; i < e.counts[static_cast<std::size_t>(j)]; ++i)
            e.x[static_cast<std::size_t>(e.first[static_cast<std::size_t>(j)] + i)][0] =
                wrap_position(initial_positions[static_cast<std::size_t>(j)]
                                               [static_cast<std::size_t>(i)],
                              scenario.road_length);

    std::vector<double> profile(static_cast<std::size_t>(grid.nx));
    for (int n = 0; n < grid.nt; ++n) {
        for (int j = 0; j < classes; ++j) {
            for (int k = 0; k < grid.nx; ++k)
                profile[static_cast<std::size_t>(k)] = macro.u(j, n, k);
            for (int i = e.first[static_cast<std::size_t>(j)];
                 i < e.first[static_cast<std::size_t>(j) + 1]; ++i) {
                auto& traj = e.x[static_cast<std::size_t>(i)];
                const double speed = periodic_linear_interp(
                    profile, 0.0, grid.dx, traj[static_cast<std::size_t>(n)]);
                if (!std::isfinite(speed))
                    throw NumericalOverflowError("constructed control diverged at vehicle " +
                                                 std::to_string(i) + ", step " +
                                                 std::to_string(n));
                e.v_hat[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] = speed;
                traj[static_cast<std::size_t>(n) + 1] = wrap_position(
                    traj[static_cast<std::size_t>(n)] + grid.dt * speed, scenario.road_length);
            }
        }
    }
    return e;
}

double vehicle_cost(std::span<const double> trajectory, std::span<const double> controls,
                    const DensityFields& fields, const CostModel& model, int j,
                    const Grid& grid) {
    if (trajectory.size() != static_cast<std::size_t>(grid.nt) + 1 ||
        controls.size() != static_cast<std::size_t>(grid.nt))
        throw InvalidParameterError("vehicle_cost: series must match the time grid");
    double total = 0.0;
    for (int n = 0; n < grid.nt; ++n) {
        const double x = trajectory[static_cast<std::size_t>(n)];
        const std::array<double, 2> rho{fields.density(0, n, x), fields.density(1, n, x)};
        total += model.running_cost(j, controls[static_cast<std::size_t>(n)], rho);
    }
    return total * grid.dt;
}

namespace {

/// Forward state solve, cost, and adjoint gradient for one vehicle in one
/// pass pair. `normalized` is the control in [0, 1]; the gradient is the
/// running-in-time (L2) gradient: dJ/dw_n = dt * g_n.
struct PathEval {
    double cost = 0.0;
    std::vector<double> gradient;
};

PathEval evaluate_path(const MicroEnsemble& ensemble, const DensityFields& fields,
                       const CostModel& model, int vehicle, std::span<const double> normalized,
                       bool want_gradient) {
    const Grid& grid = ensemble.grid;
    const int j = ensemble.vehicle_class(vehicle);
    const double u_max = model.class_params(j).u_max;
    const int nt = grid.nt;

    std::vector<double> xs(static_cast<std::size_t>(nt) + 1);
    xs[0] = ensemble.x[static_cast<std::size_t>(vehicle)][0];
    for (int n = 0; n < nt; ++n)
        xs[static_cast<std::size_t>(n) + 1] =
            xs[static_cast<std::size_t>(n)] + grid.dt * u_max * normalized[static_cast<std::size_t>(n)];

    PathEval out;
    std::vector<double> f_v(want_gradient ? static_cast<std::size_t>(nt) : 0);
    std::vector<double> f_x(want_gradient ? static_cast<std::size_t>(nt) : 0);
    for (int n = 0; n < nt; ++n) {
        const double x = xs[static_cast<std::size_t>(n)];
        const double v = u_max * normalized[static_cast<std::size_t>(n)];
        const std::array<double, 2> rho{fields.density(0, n, x), fields.density(1, n, x)};
        out.cost += model.running_cost(j, v, rho);
        if (want_gradient) {
            const std::array<double, 2> drho{fields.density_grad(0, n, x),
                                             fields.density_grad(1, n, x)};
            f_v[static_cast<std::size_t>(n)] = model.running_cost_du(j, v, rho);
            f_x[static_cast<std::size_t>(n)] = model.running_cost_grad_x(j, v, rho, drho);
        }
    }
    out.cost *= grid.dt;
    if (!want_gradient) return out;

    // lambda_n = dJ/dx_n (discrete adjoint of the forward Euler chain)
    out.gradient.assign(static_cast<std::size_t>(nt), 0.0);
    double lambda_next = 0.0;  // lambda_{nt} = 0, no terminal preference
    for (int n = nt - 1; n >= 0; --n) {
        out.gradient[static_cast<std::size_t>(n)] =
            u_max * (f_v[static_cast<std::size_t>(n)] + lambda_next);
        lambda_next += grid.dt * f_x[static_cast<std::size_t>(n)];
    }
    return out;
}

}  // namespace

std::vector<double> best_response_gradient(const MicroEnsemble& ensemble,
                                           const DensityFields& fields, const CostModel& model,
                                           int vehicle, std::span<const double> normalized) {
    return evaluate_path(ensemble, fields, model, vehicle, normalized, true).gradient;
}

BestResponseResult best_response(const MicroEnsemble& ensemble, const DensityFields& fields,
                                 const CostModel& model, int vehicle,
                                 const BestResponseSettings& settings) {
    const Grid& grid = ensemble.grid;
    const int j = ensemble.vehicle_class(vehicle);
    const double u_max = model.class_params(j).u_max;
    const int nt = grid.nt;

    std::vector<double> w(static_cast<std::size_t>(nt));
    for (int n = 0; n < nt; ++n)
        w[static_cast<std::size_t>(n)] = std::clamp(
            ensemble.v_hat[static_cast<std::size_t>(vehicle)][static_cast<std::size_t>(n)] / u_max,
            0.0, 1.0);

    BestResponseResult result;
    std::vector<double> best_w = w;
    double current_cost = evaluate_path(ensemble, fields, model, vehicle, w, false).cost;
    double best_cost = current_cost;
    std::vector<double> trial(static_cast<std::size_t>(nt));

    for (int it = 0; it < settings.max_iters; ++it) {
        const PathEval eval = evaluate_path(ensemble, fields, model, vehicle, w, true);
        current_cost = eval.cost;
        result.iterations = it + 1;
        if (eval.cost < best_cost) {
            best_cost = eval.cost;
            best_w = w;
        }
        // projected gradient: the movement a unit step could still make
        double pg_norm = 0.0;
        for (int n = 0; n < nt; ++n) {
            const double g = eval.gradient[static_cast<std::size_t>(n)];
            const double wi = w[static_cast<std::size_t>(n)];
            pg_norm = std::max(pg_norm, std::abs(wi - std::clamp(wi - g, 0.0, 1.0)));
        }
        if (pg_norm <= settings.tol) {
            result.converged = true;
            break;
        }
        // fixed step tau, halved while it fails to decrease the cost; the
        // sampled density fields are stiff enough that a pure fixed step
        // overshoots for some vehicles
        double tau = settings.step;
        double step_change = 0.0;
        bool accepted = false;
        for (int halving = 0; halving < 30; ++halving) {
            step_change = 0.0;
            for (int n = 0; n < nt; ++n) {
                const double wn = std::clamp(
                    w[static_cast<std::size_t>(n)] -
                        tau * eval.gradient[static_cast<std::size_t>(n)],
                    0.0, 1.0);
                step_change = std::max(step_change,
                                       std::abs(wn - w[static_cast<std::size_t>(n)]));
                trial[static_cast<std::size_t>(n)] = wn;
            }
            if (step_change <= settings.stagnation) break;
            const double trial_cost =
                evaluate_path(ensemble, fields, model, vehicle, trial, false).cost;
            if (trial_cost < current_cost) {
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted || step_change <= settings.stagnation) {
            result.converged = true;  // no further descent at working precision
            break;
        }
        w.swap(trial);
    }
    if (current_cost < best_cost) {
        best_cost = current_cost;
        best_w = w;
    }

    result.cost = best_cost;
    result.controls.resize(static_cast<std::size_t>(nt));
    for (int n = 0; n < nt; ++n)
        result.controls[static_cast<std::size_t>(n)] = u_max * best_w[static_cast<std::size_t>(n)];
    return result;
}

AccuracyReport epsilon_report(const MicroEnsemble& ensemble) {
    if (ensemble.eps.size() != static_cast<std::size_t>(ensemble.total()) ||
        ensemble.j_hat.size() != ensemble.eps.size())
        throw InvalidParameterError("epsilon_report: costs and best responses missing");
    double max_eps = 0.0, max_j = 0.0, sum_eps = 0.0, sum_j = 0.0;
    for (std::size_t i = 0; i < ensemble.eps.size(); ++i) {
        max_eps = std::max(max_eps, std::abs(ensemble.eps[i]));
        max_j = std::max(max_j, std::abs(ensemble.j_hat[i]));
        sum_eps += std::abs(ensemble.eps[i]);
        sum_j += std::abs(ensemble.j_hat[i]);
    }
    if (max_j == 0.0 || sum_j == 0.0)
        throw UndefinedMetricError("epsilon_report: constructed-control costs are all zero");
    return {max_eps / max_j, sum_eps / sum_j};
}

std::pair<double, double> fit_slopes(std::span<const double> n_values,
                                     std::span<const double> max_ra,
                                     std::span<const double> mean_ra) {
    if (n_values.size() < 3 || max_ra.size() != n_values.size() ||
        mean_ra.size() != n_values.size())
        throw InvalidParameterError("fit_slopes: need at least 3 aligned data points");
    auto slope = [&](std::span<const double> metric) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        const double m = static_cast<double>(n_values.size());
        for (std::size_t i = 0; i < n_values.size(); ++i) {
            if (!(n_values[i] > 0.0) || !(metric[i] > 0.0))
                throw InvalidParameterError("fit_slopes: values must be positive");
            const double lx = std::log(n_values[i]);
            const double ly = std::log(metric[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        return (m * sxy - sx * sy) / (m * sxx - sx * sx);
    };
    return {-slope(max_ra), -slope(mean_ra)};
}

double control_gap(const MicroEnsemble& ensemble, int vehicle) {
    const int j = ensemble.vehicle_class(vehicle);
    const double u_max = ensemble.scenario.classes[static_cast<std::size_t>(j)].u_max;
    double gap = 0.0;
    for (std::size_t n = 0; n < ensemble.v_hat[static_cast<std::size_t>(vehicle)].size(); ++n)
        gap = std::max(gap,
                       std::abs(ensemble.v_hat[static_cast<std::size_t>(vehicle)][n] -
                                ensemble.v_bar[static_cast<std::size_t>(vehicle)][n]));
    return gap / u_max;
}

BridgeResult run_micro_bridge(const SolverState& macro, const Scenario& scenario, CostKind kind,
                              const Grid& grid, int scale_n, const MicroSettings& settings) {
    const CostModel model = make_cost_model(kind, scenario);
    std::vector<int> counts;
    for (int j = 0; j < scenario.n_classes(); ++j)
        counts.push_back(scenario.section_multiplicity[static_cast<std::size_t>(j)] * scale_n);

    const auto positions = sample_initial_positions(scenario, settings.seed, counts);
    BridgeResult out;
    out.ensemble =
        constructed_controls(macro, scenario, grid, scale_n, positions, settings.kde);
    MicroEnsemble& e = out.ensemble;
    const DensityFields fields(e);

    const int total = e.total();
    e.j_hat.assign(static_cast<std::size_t>(total), 0.0);
    e.j_bar.assign(static_cast<std::size_t>(total), 0.0);
    e.eps.assign(static_cast<std::size_t>(total), 0.0);
    e.v_bar.assign(static_cast<std::size_t>(total),
                   std::vector<double>(static_cast<std::size_t>(grid.nt), 0.0));
    e.best_response_converged.assign(static_cast<std::size_t>(total), 0);

    std::mutex error_mutex;
    std::exception_ptr first_error;
    parallel_for_chunks(static_cast<std::size_t>(total), settings.workers,
                        [&](std::size_t b, std::size_t end) {
                            try {
                                for (std::size_t i = b; i < end; ++i) {
                                    const int vi = static_cast<int>(i);
                                    const int j = e.vehicle_class(vi);
                                    e.j_hat[i] = vehicle_cost(e.x[i], e.v_hat[i], fields, model,
                                                              j, grid);
                                    const BestResponseResult br = best_response(
                                        e, fields, model, vi, settings.best_response);
                                    e.v_bar[i] = br.controls;
                                    e.j_bar[i] = br.cost;
                                    e.eps[i] = e.j_hat[i] - e.j_bar[i];
                                    e.best_response_converged[i] = br.converged ? 1 : 0;
                                }
                            } catch (...) {
                                std::lock_guard<std::mutex> lock(error_mutex);
                                if (!first_error) first_error = std::current_exception();
                            }
                        });
    if (first_error) std::rethrow_exception(first_error);

    out.accuracy = epsilon_report(e);
    double sum_ev = 0.0;
    for (int i = 0; i < total; ++i) {
        const double ev = control_gap(e, i);
        sum_ev += ev;
        out.max_ev = std::max(out.max_ev, ev);
        if (!e.best_response_converged[static_cast<std::size_t>(i)]) ++out.non_converged;
    }
    out.mean_ev = total > 0 ? sum_ev / total : 0.0;
    return out;
}

}  // namespace nmfg
