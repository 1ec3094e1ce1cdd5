#include "nmfg/artifacts.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "nmfg/errors.hpp"

namespace nmfg {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    return out;
}

json report_to_json(const SolveReport& r) {
    json j;
    j["nx"] = r.nx;
    j["nt"] = r.nt;
    j["nu"] = r.nu;
    j["iterations"] = r.iterations;
    j["krylov_iterations"] = r.krylov_iterations;
    j["final_residual"] = r.final_residual;
    j["converged"] = r.converged;
    j["wall_time_seconds"] = r.wall_time_seconds;
    if (r.rmse_vs_reference)
        j["rmse"] = *r.rmse_vs_reference;
    else
        j["rmse"] = nullptr;
    return j;
}

}  // namespace

void write_macro_fields_csv(const std::string& path, const SolverState& state,
                            const Grid& grid) {
    auto out = open_out(path);
    out << "class,n,k,t,x,rho,u,V\n";
    for (int j = 0; j < state.layout.n_classes; ++j)
        for (int n = 0; n <= grid.nt; ++n)
            for (int k = 0; k < grid.nx; ++k) {
                out << (j + 1) << ',' << n << ',' << k << ',' << format_double(grid.t(n)) << ','
                    << format_double(grid.x(k)) << ',' << format_double(state.rho(j, n, k))
                    << ',';
                if (n < grid.nt) out << format_double(state.u(j, n, k));
                out << ',' << format_double(state.v(j, n, k)) << '\n';
            }
}

void write_fundamental_csv(const std::string& path, const SolverState& state, const Grid& grid) {
    auto out = open_out(path);
    out << "class,rho_self,rho_other,flow,speed\n";
    for (int j = 0; j < state.layout.n_classes; ++j) {
        const int other = state.layout.n_classes == 2 ? 1 - j : -1;
        for (int n = 0; n < grid.nt; ++n)
            for (int k = 0; k < grid.nx; ++k) {
                const double rho = state.rho(j, n, k);
                const double u = state.u(j, n, k);
                out << (j + 1) << ',' << format_double(rho) << ','
                    << format_double(other >= 0 ? state.rho(other, n, k) : 0.0) << ','
                    << format_double(rho * u) << ',' << format_double(u) << '\n';
            }
    }
}

void write_solve_report_json(const std::string& path, const std::vector<SolveReport>& reports,
                             const RunConfig& config, bool aborted, int aborted_rung) {
    json j;
    j["schema_version"] = 1;
    j["preset"] = config.preset;
    j["scenario"] = std::string(scenario_name_str(config.scenario));
    j["cost"] = std::string(cost_kind_name(config.cost));
    j["aborted"] = aborted;
    if (aborted) j["aborted_rung"] = aborted_rung;
    j["rungs"] = json::array();
    for (const auto& r : reports) j["rungs"].push_back(report_to_json(r));
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_micro_vehicles_csv(const std::string& path, const MicroEnsemble& e) {
    auto out = open_out(path);
    out << "class,vehicle,t,x,v_hat,v_bar\n";
    const double scale = static_cast<double>(e.scale_n);
    for (int i = 0; i < e.total(); ++i) {
        const int j = e.vehicle_class(i);
        for (int n = 0; n < e.grid.nt; ++n) {
            out << (j + 1) << ',' << i << ',' << format_double(e.grid.t(n)) << ','
                << format_double(e.x[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] *
                                 scale)
                << ','
                << format_double(
                       e.v_hat[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] * scale)
                << ','
                << format_double(
                       e.v_bar[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] * scale)
                << '\n';
        }
    }
}

void write_micro_costs_csv(const std::string& path, const MicroEnsemble& e) {
    auto out = open_out(path);
    out << "class,vehicle,J_hat,J_bar,eps\n";
    for (int i = 0; i < e.total(); ++i) {
        out << (e.vehicle_class(i) + 1) << ',' << i << ','
            << format_double(e.j_hat[static_cast<std::size_t>(i)]) << ','
            << format_double(e.j_bar[static_cast<std::size_t>(i)]) << ','
            << format_double(e.eps[static_cast<std::size_t>(i)]) << '\n';
    }
}

void write_accuracy_json(const std::string& path, const std::vector<MicroRunMetrics>& metrics,
                         double mu, double eta) {
    json j;
    j["schema_version"] = 1;
    j["runs"] = json::array();
    for (const auto& m : metrics) {
        json r;
        r["n"] = m.n;
        r["vehicles"] = m.total;
        r["max_ra"] = m.max_ra;
        r["mean_ra"] = m.mean_ra;
        r["mean_ev"] = m.mean_ev;
        r["max_ev"] = m.max_ev;
        j["runs"].push_back(r);
    }
    if (metrics.size() >= 3) {
        j["mu"] = mu;
        j["eta"] = eta;
    } else {
        j["mu"] = nullptr;
        j["eta"] = nullptr;
    }
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_failure_json(const std::string& path, const std::string& message, int rung) {
    json j;
    j["error"] = message;
    j["rung"] = rung;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

int run(const RunConfig& config, std::ostream& log) {
    fs::create_directories(config.output_dir);
    const auto artifact = [&](const char* name) {
        return (fs::path(config.output_dir) / name).string();
    };

    const Scenario scenario = build_scenario(config.scenario, 1);
    NewtonSettings newton = config.newton;
    newton.workers = config.workers;

    SolverState state;
    std::vector<SolveReport> reports;
    try {
        auto [solved, rungs] = run_schedule(config.schedule, config.cost, scenario, newton);
        state = std::move(solved);
        reports = std::move(rungs);
    } catch (const ScheduleAbortedError& e) {
        log << "solver failed: " << e.what() << '\n';
        write_solve_report_json(artifact("solve_report.json"), e.completed_reports, config, true,
                                e.rung);
        write_failure_json(artifact("failure.json"), e.what(), e.rung);
        return 1;
    }

    const auto& final_rung = config.schedule.rungs.back();
    const Grid grid(scenario.road_length, scenario.horizon, final_rung.nx, final_rung.nt);
    write_macro_fields_csv(artifact("macro_fields.csv"), state, grid);
    write_fundamental_csv(artifact("fundamental.csv"), state, grid);
    write_solve_report_json(artifact("solve_report.json"), reports, config);
    for (const auto& r : reports)
        log << "rung " << r.nx << "x" << r.nt << " nu=" << r.nu << ": iter=" << r.iterations
            << " res=" << r.final_residual << (r.converged ? "" : " (not converged)") << '\n';
    if (!reports.empty() && !reports.back().converged) {
        write_failure_json(artifact("failure.json"),
                           "final rung did not reach the residual tolerance",
                           static_cast<int>(reports.size()) - 1);
        return 1;
    }

    if (!config.micro.enabled) return 0;

    MicroSettings micro;
    micro.seed = config.micro.seed;
    micro.kde.bandwidth_factor = config.micro.kde_bandwidth_factor;
    micro.best_response.step = config.micro.step;
    micro.best_response.tol = config.micro.tol;
    micro.best_response.max_iters = config.micro.max_iters;
    micro.workers = config.workers;

    std::vector<MicroRunMetrics> metrics;
    std::vector<double> ns, max_ras, mean_ras;
    BridgeResult last;
    for (int n : config.micro.n_ladder) {
        last = run_micro_bridge(state, scenario, config.cost, grid, n, micro);
        MicroRunMetrics m;
        m.n = n;
        m.total = last.ensemble.total();
        m.max_ra = last.accuracy.max_ra;
        m.mean_ra = last.accuracy.mean_ra;
        m.mean_ev = last.mean_ev;
        m.max_ev = last.max_ev;
        metrics.push_back(m);
        ns.push_back(static_cast<double>(m.total));
        max_ras.push_back(m.max_ra);
        mean_ras.push_back(m.mean_ra);
        log << "micro n=" << n << " (N=" << m.total << "): MaxRA=" << m.max_ra
            << " MeanRA=" << m.mean_ra << " mean_ev=" << m.mean_ev << '\n';
    }
    double mu = 0.0, eta = 0.0;
    if (metrics.size() >= 3) std::tie(mu, eta) = fit_slopes(ns, max_ras, mean_ras);
    // the per-vehicle files carry the largest-N run
    write_micro_vehicles_csv(artifact("micro_vehicles.csv"), last.ensemble);
    write_micro_costs_csv(artifact("micro_costs.csv"), last.ensemble);
    write_accuracy_json(artifact("accuracy.json"), metrics, mu, eta);
    if (metrics.size() >= 3) log << "fitted slopes: mu=" << mu << " eta=" << eta << '\n';
    return 0;
}

int summarize_run(const std::string& dir, std::ostream& out) {
    const fs::path base(dir);
    const fs::path report = base / "solve_report.json";
    if (!fs::exists(report)) {
        out << "no solve_report.json under " << dir << '\n';
        return 1;
    }
    std::ifstream in(report);
    json j = json::parse(in);
    out << "run: preset=" << j.value("preset", std::string{})
        << " scenario=" << j.value("scenario", std::string{})
        << " cost=" << j.value("cost", std::string{}) << '\n';
    for (const auto& r : j.at("rungs")) {
        out << "  " << r.at("nx").get<int>() << "x" << r.at("nt").get<int>()
            << " nu=" << r.at("nu").get<double>() << " iter=" << r.at("iterations").get<int>()
            << " res=" << r.at("final_residual").get<double>();
        if (!r.at("rmse").is_null()) out << " rmse=" << r.at("rmse").get<double>();
        out << (r.at("converged").get<bool>() ? "" : " NOT CONVERGED") << '\n';
    }
    if (j.value("aborted", false)) out << "  aborted at rung " << j.value("aborted_rung", -1) << '\n';
    const fs::path accuracy = base / "accuracy.json";
    if (fs::exists(accuracy)) {
        std::ifstream ain(accuracy);
        json a = json::parse(ain);
        for (const auto& r : a.at("runs"))
            out << "  micro N=" << r.at("vehicles").get<int>()
                << " MaxRA=" << r.at("max_ra").get<double>()
                << " MeanRA=" << r.at("mean_ra").get<double>() << '\n';
        if (!a.at("mu").is_null())
            out << "  slopes mu=" << a.at("mu").get<double>() << " eta=" << a.at("eta").get<double>()
                << '\n';
    }
    return 0;
}

}  // namespace nmfg
