#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "nmfg/cost_models.hpp"
#include "nmfg/errors.hpp"
#include "test_support.hpp"

using namespace nmfg;

namespace {

ClassParams cars() { return {1.0, 1.0, 1.0, 1.0}; }
ClassParams trucks() { return {0.5, 0.5, 2.0, 1.0}; }

CostModel two_class(CostKind kind) { return CostModel(kind, {cars(), trucks()}); }
CostModel one_class(CostKind kind) { return CostModel(kind, {cars()}); }

/// Brute-force minimization of f(alpha) + alpha p over an evenly spaced
/// alpha grid; the independent oracle for the closed-form Hamiltonian.
struct BruteForce {
    double value;
    double argmin;
};
BruteForce brute_force_hamiltonian(const CostModel& m, int j, double p,
                                   std::array<double, 2> rho, int points = 1000000) {
    const double u_max = m.class_params(j).u_max;
    double best = m.running_cost(j, 0.0, rho);
    double best_alpha = 0.0;
    const double h = u_max / static_cast<double>(points);
    for (int i = 0; i <= points; ++i) {
        const double alpha = h * i;
        const double value = m.running_cost(j, alpha, rho) + alpha * p;
        if (value < best) {
            best = value;
            best_alpha = alpha;
        }
    }
    return {best, best_alpha};
}

}  // namespace

TEST_CASE("class params consistency") {
    CHECK_THROWS_AS(validate_class_params({1.0, 0.7, 1.0, 1.0}), InvalidParameterError);
    CHECK_THROWS_AS(validate_class_params({0.0, 1.0, 1.0, 1.0}), InvalidParameterError);
    validate_class_params(trucks());
}

TEST_CASE("model kind and class count must agree") {
    CHECK_THROWS_AS(CostModel(CostKind::GLWR, {cars()}), InvalidParameterError);
    CHECK_THROWS_AS(CostModel(CostKind::SEP1, {cars(), trucks()}), InvalidParameterError);
    CHECK_THROWS_AS(two_class(CostKind::GS).running_cost(2, 0.5, {0, 0}),
                    InvalidParameterError);
}

TEST_CASE("running cost spot values") {
    // desired speed reached on an empty road costs nothing
    CHECK(two_class(CostKind::GLWR).running_cost(0, 1.0, {0.0, 0.0}) == doctest::Approx(0.0));
    // GS at full speed on an empty road: 1/2 - 1 + 0
    CHECK(two_class(CostKind::GS).running_cost(0, 1.0, {0.0, 0.0}) == doctest::Approx(-0.5));
    // GNS with the section-4 parameters: 1/2 w^2 - w + w R with w = 1/2, R = 1/2
    CHECK(two_class(CostKind::GNS).running_cost(1, 0.25, {0.5, 0.25}) ==
          doctest::Approx(-0.125).epsilon(1e-14));
}

TEST_CASE("hamiltonian spot values") {
    CHECK(two_class(CostKind::GLWR).hamiltonian(0, 0.0, {0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(two_class(CostKind::GS).hamiltonian(0, 0.0, {0.0, 0.0}) == doctest::Approx(-0.5));
    // frozen from the brute-force oracle (alpha* = U - p = 0.3, H = 0.045 + 0.09)
    const CostModel m = two_class(CostKind::GLWR);
    CHECK(m.hamiltonian(0, 0.3, {0.2, 0.1}) == doctest::Approx(0.135).epsilon(1e-12));
    const BruteForce oracle = brute_force_hamiltonian(m, 0, 0.3, {0.2, 0.1});
    CHECK(m.hamiltonian(0, 0.3, {0.2, 0.1}) == doctest::Approx(oracle.value).epsilon(1e-6));
}

TEST_CASE("optimal velocity spot values and clamps") {
    CHECK(two_class(CostKind::GLWR).optimal_velocity(0, 0.0, {0.0, 0.0}) == doctest::Approx(1.0));
    // GS stationary point u_max (1 - u_max p) = -1 clamps to zero
    CHECK(two_class(CostKind::GS).optimal_velocity(0, 2.0, {0.0, 0.0}) == doctest::Approx(0.0));
    // GNS at full occupancy: desired share zero
    CHECK(two_class(CostKind::GNS).optimal_velocity(1, 0.0, {1.0, 0.5}) == doctest::Approx(0.0));
}

TEST_CASE("oracle equivalence across all kinds") {
    nmfg_test::Rng rng(2024);
    const int draws_per_kind = 1000;
    const int grid_points = 100000;  // dense sweep per draw; spot draws use 1e6 below
    for (CostKind kind : {CostKind::GLWR, CostKind::GS, CostKind::GNS, CostKind::LWR1,
                          CostKind::SEP1, CostKind::NONSEP1}) {
        const CostModel m = is_one_class_kind(kind) ? one_class(kind) : two_class(kind);
        for (int draw = 0; draw < draws_per_kind; ++draw) {
            const int j = m.n_classes() == 2 ? (draw % 2) : 0;
            const double p = rng.uniform(-3.0, 3.0);
            std::array<double, 2> rho{0.0, 0.0};
            for (int c = 0; c < m.n_classes(); ++c)
                rho[static_cast<std::size_t>(c)] =
                    rng.uniform(0.0, m.class_params(c).rho_jam);
            const BruteForce oracle = brute_force_hamiltonian(m, j, p, rho, grid_points);
            const double h = m.hamiltonian(j, p, rho);
            const double alpha = m.optimal_velocity(j, p, rho);
            CHECK(h == doctest::Approx(oracle.value).epsilon(1e-6));
            const double spacing = m.class_params(j).u_max / grid_points;
            CHECK(std::abs(alpha - oracle.argmin) <= spacing + 1e-9);
            CHECK(alpha >= 0.0);
            CHECK(alpha <= m.class_params(j).u_max);
        }
    }
}

TEST_CASE("fine-grid oracle on a few draws") {
    nmfg_test::Rng rng(77);
    const CostModel m = two_class(CostKind::GNS);
    for (int draw = 0; draw < 5; ++draw) {
        const double p = rng.uniform(-3.0, 3.0);
        const std::array<double, 2> rho{rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.5)};
        const BruteForce oracle = brute_force_hamiltonian(m, 0, p, rho, 1000000);
        CHECK(m.hamiltonian(0, p, rho) == doctest::Approx(oracle.value).epsilon(1e-6));
        CHECK(std::abs(m.optimal_velocity(0, p, rho) - oracle.argmin) <= 1e-5);
    }
}

TEST_CASE("hamiltonian has the clamped-quadratic shape in p") {
    // piecewise quadratic with at most two breakpoints: the second
    // difference is piecewise constant, taking at most three values
    const CostModel m = two_class(CostKind::GS);
    const std::array<double, 2> rho{0.3, 0.2};
    const double lo = -3.0, hi = 3.0;
    const int n = 100;
    const double h = (hi - lo) / n;
    std::vector<double> values;
    for (int i = 0; i <= n; ++i) values.push_back(m.hamiltonian(0, lo + h * i, rho));
    // dH/dp = alpha* >= 0 and alpha* is nonincreasing in p: H is
    // nondecreasing and concave, so first differences are monotone.
    for (int i = 0; i < n; ++i) CHECK(values[i + 1] >= values[i] - 1e-12);
    for (int i = 0; i + 2 <= n; ++i)
        CHECK(values[i + 2] - values[i + 1] <= values[i + 1] - values[i] + 1e-10);
    // second differences form at most three plateaus (quadratic pieces),
    // separated by short transition stencils around the two breakpoints
    std::vector<double> dd;
    for (int i = 0; i + 2 <= n; ++i) dd.push_back(values[i + 2] - 2 * values[i + 1] + values[i]);
    int plateaus = 0;
    int run = 0;
    double run_value = dd[0];
    for (double v : dd) {
        if (std::abs(v - run_value) <= 1e-8) {
            if (++run == 3) ++plateaus;  // count only sustained plateaus
        } else {
            run_value = v;
            run = 1;
        }
    }
    CHECK(plateaus <= 3);
    CHECK(plateaus >= 1);
}

TEST_CASE("running_cost_grad_x matches finite differences through rho(x)") {
    // smooth synthetic density profiles and their exact spatial gradients
    const auto rho1 = [](double x) { return 0.4 + 0.3 * std::sin(x); };
    const auto rho2 = [](double x) { return 0.2 + 0.1 * std::cos(2 * x); };
    const auto drho1 = [](double x) { return 0.3 * std::cos(x); };
    const auto drho2 = [](double x) { return -0.2 * std::sin(2 * x); };
    for (CostKind kind : {CostKind::GLWR, CostKind::GS, CostKind::GNS}) {
        const CostModel m = two_class(kind);
        for (double x : {0.3, 1.1, 2.9}) {
            for (int j = 0; j < 2; ++j) {
                const double u = 0.3;
                const double analytic = m.running_cost_grad_x(
                    j, u, {rho1(x), rho2(x)}, {drho1(x), drho2(x)});
                const double h = 1e-6;
                const double fp = m.running_cost(j, u, {rho1(x + h), rho2(x + h)});
                const double fm = m.running_cost(j, u, {rho1(x - h), rho2(x - h)});
                const double numeric = (fp - fm) / (2 * h);
                CHECK(analytic == doctest::Approx(numeric).epsilon(1e-6));
            }
        }
    }
    // zero gradient cases
    CHECK(two_class(CostKind::GS).running_cost_grad_x(0, 0.7, {0.5, 0.2}, {0.0, 0.0}) ==
          doctest::Approx(0.0));
    // GS: df/drho1 = 1/(2 rho1_jam) = 1/2, so a gradient of 2 gives 1.0
    CHECK(two_class(CostKind::GS).running_cost_grad_x(0, 0.7, {0.5, 0.2}, {2.0, 0.0}) ==
          doctest::Approx(1.0));
    // GLWR at u = U(rho): the squared term's derivative vanishes
    const CostModel glwr = two_class(CostKind::GLWR);
    const std::array<double, 2> rho{0.2, 0.1};
    const double u_desired = glwr.desired_speed(0, rho);
    CHECK(glwr.running_cost_grad_x(0, u_desired, rho, {1.3, -0.4}) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("hamiltonian and velocity partials match finite differences") {
    nmfg_test::Rng rng(5);
    for (CostKind kind : {CostKind::GLWR, CostKind::GS, CostKind::GNS}) {
        const CostModel m = two_class(kind);
        int checked = 0;
        while (checked < 50) {
            const int j = checked % 2;
            const double p = rng.uniform(-1.5, 1.5);
            const std::array<double, 2> rho{rng.uniform(0.01, 0.9), rng.uniform(0.01, 0.45)};
            // keep away from clamp boundaries so the derivative is two-sided
            const double u_max = m.class_params(j).u_max;
            const double alpha = m.optimal_velocity(j, p, rho);
            if (alpha < 0.05 * u_max || alpha > 0.95 * u_max) continue;
            ++checked;
            const double h = 1e-7;
            const auto hg = m.hamiltonian_grads(j, p, rho);
            CHECK(hg.dp == doctest::Approx((m.hamiltonian(j, p + h, rho) -
                                            m.hamiltonian(j, p - h, rho)) /
                                           (2 * h))
                               .epsilon(1e-5));
            const auto vg = m.velocity_grads(j, p, rho);
            CHECK(vg.dp == doctest::Approx((m.optimal_velocity(j, p + h, rho) -
                                            m.optimal_velocity(j, p - h, rho)) /
                                           (2 * h))
                               .epsilon(1e-5));
            for (int c = 0; c < 2; ++c) {
                std::array<double, 2> rp = rho, rm = rho;
                rp[static_cast<std::size_t>(c)] += h;
                rm[static_cast<std::size_t>(c)] -= h;
                CHECK(hg.drho[static_cast<std::size_t>(c)] ==
                      doctest::Approx((m.hamiltonian(j, p, rp) - m.hamiltonian(j, p, rm)) /
                                      (2 * h))
                          .epsilon(1e-5).scale(1.0));
                CHECK(vg.drho[static_cast<std::size_t>(c)] ==
                      doctest::Approx((m.optimal_velocity(j, p, rp) -
                                       m.optimal_velocity(j, p, rm)) /
                                      (2 * h))
                          .epsilon(1e-5).scale(1.0));
            }
        }
    }
}

TEST_CASE("fundamental diagram requirements for the GLWR desired speed") {
    const CostModel m = two_class(CostKind::GLWR);
    for (int j = 0; j < 2; ++j) {
        const double u_max = m.class_params(j).u_max;
        // Req3: empty road gives the free-flow speed
        CHECK(m.desired_speed(j, {0.0, 0.0}) == doctest::Approx(u_max));
        // Req1 and Req4 on a sweep of occupancies in [0, 1]
        for (int i = 0; i <= 50; ++i) {
            const double s = i / 50.0;
            const std::array<double, 2> rho{0.5 * s, 0.25 * s};  // occupancy s
            const double u = m.desired_speed(j, rho);
            CHECK(u >= -1e-12);
            CHECK(u <= u_max + 1e-12);
        }
        CHECK(m.desired_speed(j, {0.5, 0.25}) == doctest::Approx(0.0).epsilon(1e-12));
        // Req5: flow rho_j U_j strictly concave in rho_j (second difference < 0)
        const double other = 0.1;
        double prev_flow2 = 0.0;
        bool first = true;
        for (int i = 1; i + 1 <= 20; ++i) {
            const double rj = i / 20.0 * m.class_params(j).rho_jam * 0.8;
            const double h = 0.01;
            auto flow = [&](double r) {
                std::array<double, 2> rho{0.0, 0.0};
                rho[static_cast<std::size_t>(j)] = r;
                rho[static_cast<std::size_t>(1 - j)] = other;
                return r * m.desired_speed(j, rho);
            };
            const double dd = flow(rj + h) - 2 * flow(rj) + flow(rj - h);
            CHECK(dd < 0.0);
            if (!first) CHECK(dd == doctest::Approx(prev_flow2).epsilon(1e-6));
            prev_flow2 = dd;
            first = false;
        }
    }
}
