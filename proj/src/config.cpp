#include "nmfg/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nmfg/errors.hpp"

namespace nmfg {

using nlohmann::json;

const char* const kWorkersEnvVar = "NMFG_WORKERS";

namespace {

RunConfig one_class_preset(CostKind kind, ContinuationSchedule schedule) {
    RunConfig c;
    c.scenario = ScenarioName::ONE_CLASS;
    c.cost = kind;
    c.schedule = std::move(schedule);
    return c;
}

RunConfig two_class_preset(CostKind kind, ScenarioName scenario) {
    RunConfig c;
    c.scenario = scenario;
    c.cost = kind;
    const bool regularized = (kind != CostKind::GLWR);
    const double length = scenario == ScenarioName::TCT ? 6.0 : 2.0;
    c.schedule = two_class_ladder(120, regularized ? 0.04 : 0.0, regularized ? 0.01 : 0.0, 4,
                                  length);
    return c;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"lwr1-table1", "sep1-table2", "nonsep1-table3",
            "glwr-tc", "glwr-ct", "glwr-tct",
            "gs-tc", "gs-ct", "gs-tct",
            "gns-tc", "gns-ct", "gns-tct",
            "micro-gs-tc", "micro-gns-tc", "micro-gs-tct", "micro-gns-tct",
            "micro-gs-ct", "micro-gns-ct"};
}

RunConfig preset_config(const std::string& name) {
    RunConfig c;
    if (name == "lwr1-table1") {
        c = one_class_preset(CostKind::LWR1, lwr_ladder(4));
    } else if (name == "sep1-table2") {
        c = one_class_preset(CostKind::SEP1, regularized_ladder(2));
    } else if (name == "nonsep1-table3") {
        c = one_class_preset(CostKind::NONSEP1, regularized_ladder(2));
    } else if (name == "glwr-tc") {
        c = two_class_preset(CostKind::GLWR, ScenarioName::TC);
    } else if (name == "glwr-ct") {
        c = two_class_preset(CostKind::GLWR, ScenarioName::CT);
    } else if (name == "glwr-tct") {
        c = two_class_preset(CostKind::GLWR, ScenarioName::TCT);
    } else if (name == "gs-tc") {
        c = two_class_preset(CostKind::GS, ScenarioName::TC);
    } else if (name == "gs-ct") {
        c = two_class_preset(CostKind::GS, ScenarioName::CT);
    } else if (name == "gs-tct") {
        c = two_class_preset(CostKind::GS, ScenarioName::TCT);
    } else if (name == "gns-tc") {
        c = two_class_preset(CostKind::GNS, ScenarioName::TC);
    } else if (name == "gns-ct") {
        c = two_class_preset(CostKind::GNS, ScenarioName::CT);
    } else if (name == "gns-tct") {
        c = two_class_preset(CostKind::GNS, ScenarioName::TCT);
    } else if (name.rfind("micro-", 0) == 0) {
        c = preset_config(name.substr(6));
        c.schedule = bridge_ladder();
        c.micro.enabled = true;
        c.micro.tol = 5e-5;
        c.micro.max_iters = 800;
    } else {
        throw InvalidParameterError("unknown preset: " + name);
    }
    c.preset = name;
    return c;
}

namespace {

struct Collector {
    std::vector<std::string>* errors;
    void add(const std::string& msg) { errors->push_back(msg); }
};

void line_column(const std::string& text, std::size_t byte, std::size_t& line,
                 std::size_t& column) {
    line = 1;
    column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& into, Collector& errs,
                const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        into = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        errs.add(where + "." + key + ": " + e.what());
    }
}

void parse_newton(const json& obj, NewtonSettings& n, Collector& errs) {
    read_field(obj, "max_iters", n.max_newton_iters, errs, "newton");
    read_field(obj, "residual_tol", n.residual_tol, errs, "newton");
    read_field(obj, "krylov_restart", n.krylov_restart, errs, "newton");
    read_field(obj, "augmentation", n.augmentation_depth, errs, "newton");
    read_field(obj, "krylov_tol", n.krylov_tol, errs, "newton");
    read_field(obj, "krylov_max_iters", n.krylov_max_iters, errs, "newton");
    read_field(obj, "refactor_each_iteration", n.refactor_each_iteration, errs, "newton");
    if (obj.contains("jacobian")) {
        const std::string mode = obj.at("jacobian").get<std::string>();
        if (mode == "exact")
            n.jacobian_mode = JacobianMode::EXACT;
        else if (mode == "decoupled")
            n.jacobian_mode = JacobianMode::DECOUPLED;
        else
            errs.add("newton.jacobian: expected \"exact\" or \"decoupled\", got \"" + mode +
                     "\"");
    }
    if (n.max_newton_iters < 1) errs.add("newton.max_iters: must be >= 1");
    if (!(n.residual_tol > 0.0)) errs.add("newton.residual_tol: must be positive");
    if (n.krylov_restart < 1) errs.add("newton.krylov_restart: must be >= 1");
    if (n.augmentation_depth < 0) errs.add("newton.augmentation: must be >= 0");
}

void parse_micro(const json& obj, MicroConfig& m, Collector& errs) {
    read_field(obj, "enabled", m.enabled, errs, "micro");
    read_field(obj, "n_ladder", m.n_ladder, errs, "micro");
    read_field(obj, "seed", m.seed, errs, "micro");
    read_field(obj, "step", m.step, errs, "micro");
    read_field(obj, "tol", m.tol, errs, "micro");
    read_field(obj, "max_iters", m.max_iters, errs, "micro");
    read_field(obj, "kde_bandwidth_factor", m.kde_bandwidth_factor, errs, "micro");
    if (m.n_ladder.empty()) errs.add("micro.n_ladder: must not be empty");
    for (int n : m.n_ladder)
        if (n < 1) errs.add("micro.n_ladder: vehicle counts must be >= 1");
    if (!(m.step > 0.0)) errs.add("micro.step: must be positive");
    if (!(m.kde_bandwidth_factor > 0.0)) errs.add("micro.kde_bandwidth_factor: must be positive");
}

void parse_grid(const json& obj, RunConfig& c, Collector& errs) {
    ContinuationSchedule schedule;
    if (obj.contains("ladder")) {
        if (!obj.at("ladder").is_array()) {
            errs.add("grid.ladder: must be an array of rungs");
            return;
        }
        for (const auto& rung : obj.at("ladder")) {
            ContinuationRung r;
            Collector sub{errs.errors};
            read_field(rung, "nx", r.nx, sub, "grid.ladder");
            read_field(rung, "nt", r.nt, sub, "grid.ladder");
            read_field(rung, "nu", r.nu, sub, "grid.ladder");
            schedule.rungs.push_back(r);
        }
    } else {
        // single grid: explicit (nx, nt) or nx plus a step rule
        ContinuationRung r;
        read_field(obj, "nx", r.nx, errs, "grid");
        read_field(obj, "nu", r.nu, errs, "grid");
        if (obj.contains("nt")) {
            read_field(obj, "nt", r.nt, errs, "grid");
        } else if (obj.contains("step_rule")) {
            StepRule rule;
            const json& sr = obj.at("step_rule");
            read_field(sr, "cfl", rule.cfl_factor, errs, "grid.step_rule");
            read_field(sr, "beta", rule.viscous_factor, errs, "grid.step_rule");
            rule.viscosity = r.nu;
            try {
                const Scenario s = build_scenario(c.scenario, 1);
                const auto speeds = max_speeds(s);
                const Grid g =
                    make_grid_from_step_rule(s.road_length, s.horizon, r.nx, speeds, rule);
                r.nt = g.nt;
            } catch (const Error& e) {
                errs.add(std::string("grid.step_rule: ") + e.what());
                return;
            }
        } else {
            errs.add("grid: needs nt or step_rule when no ladder is given");
            return;
        }
        schedule.rungs.push_back(r);
    }
    if (obj.contains("space_interp")) {
        const std::string v = obj.at("space_interp").get<std::string>();
        if (v == "linear")
            schedule.prolong_options.space = InterpKind::Linear;
        else if (v == "cubic")
            schedule.prolong_options.space = InterpKind::Cubic;
        else
            errs.add("grid.space_interp: expected \"linear\" or \"cubic\"");
    }
    if (obj.contains("time_interp")) {
        const std::string v = obj.at("time_interp").get<std::string>();
        if (v == "linear")
            schedule.prolong_options.time = InterpKind::Linear;
        else if (v == "cubic")
            schedule.prolong_options.time = InterpKind::Cubic;
        else
            errs.add("grid.time_interp: expected \"linear\" or \"cubic\"");
    }
    c.schedule = std::move(schedule);
}

}  // namespace

ConfigValidation validate_config(const std::string& path) {
    ConfigValidation out;
    Collector errs{&out.errors};

    std::ifstream in(path, std::ios::binary);
    if (!in) {
        errs.add("cannot open config file: " + path);
        return out;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 0, column = 0;
        line_column(text, e.byte > 0 ? e.byte - 1 : 0, line, column);
        errs.add("parse error at line " + std::to_string(line) + ", column " +
                 std::to_string(column) + ": " + e.what());
        return out;
    }
    if (!root.is_object()) {
        errs.add("config root must be a JSON object");
        return out;
    }

    RunConfig c;
    if (root.contains("preset")) {
        try {
            c = preset_config(root.at("preset").get<std::string>());
        } catch (const Error& e) {
            errs.add(e.what());
            return out;
        }
    }
    if (root.contains("scenario")) {
        try {
            c.scenario = scenario_name_from_str(root.at("scenario").get<std::string>());
        } catch (const Error& e) {
            errs.add(e.what());
        }
    }
    if (root.contains("cost")) {
        try {
            c.cost = cost_kind_from_name(root.at("cost").get<std::string>());
        } catch (const Error& e) {
            errs.add(e.what());
        }
    }
    if (root.contains("grid")) parse_grid(root.at("grid"), c, errs);
    if (root.contains("newton")) parse_newton(root.at("newton"), c.newton, errs);
    if (root.contains("micro")) parse_micro(root.at("micro"), c.micro, errs);
    read_field(root, "output_dir", c.output_dir, errs, "config");
    read_field(root, "workers", c.workers, errs, "config");

    if (c.schedule.rungs.empty())
        errs.add("config: no grid; give a preset or a grid section");
    if (is_one_class_kind(c.cost) != (c.scenario == ScenarioName::ONE_CLASS))
        errs.add("config: cost kind " + std::string(cost_kind_name(c.cost)) +
                 " does not match scenario " + std::string(scenario_name_str(c.scenario)));
    if (c.workers < 1) errs.add("config: workers must be >= 1");
    if (!c.schedule.rungs.empty()) {
        try {
            validate_schedule(c.schedule);
        } catch (const Error& e) {
            errs.add(e.what());
        }
    }

    if (out.errors.empty()) out.config = std::move(c);
    return out;
}

RunConfig load_config(const std::string& path) {
    ConfigValidation v = validate_config(path);
    if (!v.config) {
        std::string all = "invalid config " + path + ":";
        for (const auto& e : v.errors) all += "\n  - " + e;
        throw InvalidParameterError(all);
    }
    return *std::move(v.config);
}

}  // namespace nmfg
