#include "nmfg/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "nmfg/errors.hpp"

namespace nmfg {

namespace {

// 5-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGaussNode[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                  0.5384693101056831, 0.9061798459386640};
constexpr double kGaussWeight[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                    0.4786286704993665, 0.2369268850561891};

double bump_value(const DensityBump& b, double x) {
    if (x < b.x1 || x > b.x2) return 0.0;
    const double d = x - b.theta;
    return b.rho_a + (b.rho_b - b.rho_a) * std::exp(-d * d / (2.0 * b.gamma * b.gamma));
}

DensityBump make_bump(double x1, double x2, double rho_a, double rho_b, double gamma) {
    DensityBump b;
    b.x1 = x1;
    b.x2 = x2;
    b.rho_a = rho_a;
    b.rho_b = rho_b;
    b.gamma = gamma;
    b.theta = 0.5 * (x1 + x2);
    return b;
}

ClassParams cars_params(int n) {
    // l1 = 1, rho_jam = n / l1, u_max = 1 * n, L1 = n
    ClassParams p;
    p.vehicle_length = 1.0;
    p.section_length = static_cast<double>(n);
    p.rho_jam = p.section_length / p.vehicle_length;
    p.u_max = 1.0 * n;
    return p;
}

ClassParams trucks_params(int n) {
    // l2 = 2, rho_jam = n / l2, u_max = 0.5 * n, L2 = n
    ClassParams p;
    p.vehicle_length = 2.0;
    p.section_length = static_cast<double>(n);
    p.rho_jam = p.section_length / p.vehicle_length;
    p.u_max = 0.5 * n;
    return p;
}

}  // namespace

double density_at(const InitialDensitySpec& spec, double x) {
    double v = 0.0;
    for (const auto& b : spec.bumps) v += bump_value(b, x);
    return v;
}

std::vector<double> cell_averages(const InitialDensitySpec& spec, const Grid& grid) {
    std::vector<double> avg(static_cast<std::size_t>(grid.nx), 0.0);
    for (int k = 0; k < grid.nx; ++k) {
        const double a = grid.x(k);
        const double half = 0.5 * grid.dx;
        double sum = 0.0;
        for (int q = 0; q < 5; ++q)
            sum += kGaussWeight[q] * density_at(spec, a + half + half * kGaussNode[q]);
        avg[static_cast<std::size_t>(k)] = 0.5 * sum;  // weights sum to 2
    }
    return avg;
}

std::string_view scenario_name_str(ScenarioName name) {
    switch (name) {
        case ScenarioName::TC: return "tc";
        case ScenarioName::CT: return "ct";
        case ScenarioName::TCT: return "tct";
        case ScenarioName::ONE_CLASS: return "one-class";
    }
    return "?";
}

ScenarioName scenario_name_from_str(std::string_view s) {
    for (ScenarioName n :
         {ScenarioName::TC, ScenarioName::CT, ScenarioName::TCT, ScenarioName::ONE_CLASS})
        if (s == scenario_name_str(n)) return n;
    throw InvalidParameterError("unknown scenario name: " + std::string(s));
}

void validate_scenario(const Scenario& s) {
    if (s.classes.empty() || s.classes.size() > 2)
        throw InvalidParameterError("scenario: needs one or two classes");
    if (s.classes.size() != s.initial_density.size() ||
        s.classes.size() != s.section_multiplicity.size())
        throw InvalidParameterError("scenario: per-class lists must have matching lengths");
    for (const auto& c : s.classes) validate_class_params(c);
    double length = 0.0;
    for (std::size_t j = 0; j < s.classes.size(); ++j)
        length += s.section_multiplicity[j] * s.classes[j].section_length;
    if (std::abs(length - s.road_length) > 1e-12 * std::max(1.0, length))
        throw InvalidParameterError("scenario: road length must equal sum alpha_j L_j");
    if (!(s.horizon > 0.0)) throw InvalidParameterError("scenario: horizon must be positive");
    for (std::size_t j = 0; j < s.initial_density.size(); ++j) {
        const double jam = s.classes[j].rho_jam;
        for (const auto& b : s.initial_density[j].bumps) {
            if (!(b.x1 < b.x2) || b.x1 < 0.0 || b.x2 > s.road_length)
                throw InvalidParameterError("scenario: bump interval must lie inside [0, L]");
            if (b.rho_a < 0.0 || b.rho_a > b.rho_b || b.rho_b > jam + 1e-12)
                throw InvalidParameterError("scenario: bump needs 0 <= rho_a <= rho_b <= rho_jam");
            if (!(b.gamma > 0.0)) throw InvalidParameterError("scenario: bump gamma must be positive");
        }
        // bumps of one class must not overlap
        for (std::size_t a = 0; a < s.initial_density[j].bumps.size(); ++a)
            for (std::size_t b2 = a + 1; b2 < s.initial_density[j].bumps.size(); ++b2) {
                const auto& ba = s.initial_density[j].bumps[a];
                const auto& bb = s.initial_density[j].bumps[b2];
                if (std::max(ba.x1, bb.x1) < std::min(ba.x2, bb.x2))
                    throw InvalidParameterError("scenario: bumps of one class must be disjoint");
            }
    }
}

Scenario build_scenario(ScenarioName name, int n) {
    if (n < 1) throw InvalidParameterError("build_scenario: n must be >= 1");
    const double scale = static_cast<double>(n);
    const double gamma = 0.15 * scale;
    const double car_peak = 1.0;    // rho_b for cars, macro units
    const double truck_peak = 0.5;  // rho_b for trucks, macro units

    Scenario s;
    s.name = name;
    s.horizon = 3.0;

    switch (name) {
        case ScenarioName::TC:
        case ScenarioName::CT: {
            s.classes = {cars_params(n), trucks_params(n)};
            s.section_multiplicity = {1, 1};
            s.road_length = 2.0 * scale;
            const bool cars_front = (name == ScenarioName::TC);
            const double car_lo = cars_front ? scale : 0.0;
            const double truck_lo = cars_front ? 0.0 : scale;
            s.initial_density.resize(2);
            s.initial_density[0].bumps = {make_bump(car_lo, car_lo + scale, 0.0, car_peak, gamma)};
            s.initial_density[1].bumps = {
                make_bump(truck_lo, truck_lo + scale, 0.0, truck_peak, gamma)};
            break;
        }
        case ScenarioName::TCT: {
            s.classes = {cars_params(n), trucks_params(n)};
            s.section_multiplicity = {3, 3};
            s.road_length = 6.0 * scale;
            s.initial_density.resize(2);
            for (int i = 0; i < 3; ++i) {
                const double c = (2 * i + 1) * scale;
                const double t = (2 * i) * scale;
                s.initial_density[0].bumps.push_back(make_bump(c, c + scale, 0.0, car_peak, gamma));
                s.initial_density[1].bumps.push_back(make_bump(t, t + scale, 0.0, truck_peak, gamma));
            }
            break;
        }
        case ScenarioName::ONE_CLASS: {
            s.classes = {cars_params(n)};
            s.section_multiplicity = {2};
            s.road_length = 2.0 * scale;
            s.initial_density.resize(1);
            s.initial_density[0].bumps = {
                make_bump(0.5 * scale, 1.5 * scale, 0.0, car_peak, gamma)};
            break;
        }
    }
    validate_scenario(s);
    return s;
}

std::vector<double> max_speeds(const Scenario& s) {
    std::vector<double> out;
    out.reserve(s.classes.size());
    for (const auto& c : s.classes) out.push_back(c.u_max);
    return out;
}

CostModel make_cost_model(CostKind kind, const Scenario& s) {
    if (is_one_class_kind(kind) != (s.n_classes() == 1))
        throw InvalidParameterError("cost kind class count does not match scenario");
    return CostModel(kind, s.classes);
}

}  // namespace nmfg
