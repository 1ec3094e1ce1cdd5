#include <doctest.h>

#include <cmath>
#include <vector>

#include "nmfg/continuation.hpp"
#include "nmfg/errors.hpp"
#include "nmfg/interpolate.hpp"
#include "test_support.hpp"

using namespace nmfg;

namespace {

SolverState filled_state(const UnknownLayout& layout, const Grid& g, double (*f)(double, double),
                         int cls = 0) {
    SolverState s(layout);
    for (int j = 0; j < layout.n_classes; ++j)
        for (int n = 0; n <= layout.nt; ++n)
            for (int k = 0; k < layout.nx; ++k) {
                const double value = f(g.t(n), g.x(k)) * (j == cls ? 1.0 : 0.5);
                s.rho(j, n, k) = value;
                s.v(j, n, k) = value;
                if (n < layout.nt) s.u(j, n, k) = value;
            }
    return s;
}

}  // namespace

TEST_CASE("periodic cubic spline interpolates nodes exactly and wraps") {
    nmfg_test::Rng rng(3);
    std::vector<double> y(12);
    for (auto& v : y) v = rng.uniform(-1.0, 1.0);
    const PeriodicCubicSpline spline(y, 0.0, 0.5);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(spline(0.5 * static_cast<double>(i)) == doctest::Approx(y[i]).epsilon(1e-12));
        CHECK(spline(0.5 * static_cast<double>(i) + 6.0) ==
              doctest::Approx(y[i]).epsilon(1e-12));
    }
    // derivative by finite differences
    for (double x : {0.3, 1.7, 4.4}) {
        const double h = 1e-6;
        CHECK(spline.derivative(x) ==
              doctest::Approx((spline(x + h) - spline(x - h)) / (2 * h)).epsilon(1e-6));
    }
    // a smooth wave is reproduced well between nodes
    std::vector<double> wave(64);
    for (std::size_t i = 0; i < wave.size(); ++i)
        wave[i] = std::sin(2.0 * std::acos(-1.0) * static_cast<double>(i) / 64.0);
    const PeriodicCubicSpline smooth(wave, 0.0, 1.0 / 64.0);
    for (double x = 0.0; x < 1.0; x += 0.013)
        CHECK(smooth(x) == doctest::Approx(std::sin(2.0 * std::acos(-1.0) * x)).epsilon(1e-5));
}

TEST_CASE("prolong reproduces constants exactly") {
    const Grid coarse(2.0, 3.0, 15, 60), fine(2.0, 3.0, 45, 180);
    SolverState s(UnknownLayout(2, 15, 60));
    for (int j = 0; j < 2; ++j)
        for (int n = 0; n <= 60; ++n)
            for (int k = 0; k < 15; ++k) {
                s.rho(j, n, k) = 0.25 + j;
                s.v(j, n, k) = -1.5;
                if (n < 60) s.u(j, n, k) = 0.75;
            }
    for (auto space : {InterpKind::Cubic, InterpKind::Linear})
        for (auto time : {InterpKind::Linear, InterpKind::Cubic}) {
            const SolverState out = prolong(s, coarse, fine, {space, time});
            for (int j = 0; j < 2; ++j)
                for (int n = 0; n <= 180; ++n)
                    for (int k = 0; k < 45; ++k) {
                        CHECK(out.rho(j, n, k) == doctest::Approx(0.25 + j).epsilon(1e-13));
                        CHECK(out.v(j, n, k) == doctest::Approx(-1.5).epsilon(1e-13));
                        if (n < 180) CHECK(out.u(j, n, k) == doctest::Approx(0.75).epsilon(1e-13));
                    }
        }
}

TEST_CASE("prolong is nodal-exact at coincident nodes") {
    const Grid coarse(2.0, 3.0, 16, 20), fine(2.0, 3.0, 32, 40);
    const SolverState s = filled_state(UnknownLayout(1, 16, 20), coarse,
                                       [](double t, double x) {
                                           return std::sin(3.1 * x) + 0.2 * std::cos(2.0 * t + x);
                                       });
    const SolverState out = prolong(s, coarse, fine);
    for (int n = 0; n <= 20; ++n)
        for (int k = 0; k < 16; ++k) {
            CHECK(out.rho(0, 2 * n, 2 * k) == doctest::Approx(s.rho(0, n, k)).epsilon(1e-12));
            CHECK(out.v(0, 2 * n, 2 * k) == doctest::Approx(s.v(0, n, k)).epsilon(1e-12));
            if (n < 20)
                CHECK(out.u(0, 2 * n, 2 * k) == doctest::Approx(s.u(0, n, k)).epsilon(1e-12));
        }
    // periodic sawtooth in cell index: exact at nodes by interpolation
    SolverState saw(UnknownLayout(1, 16, 20));
    for (int n = 0; n <= 20; ++n)
        for (int k = 0; k < 16; ++k) {
            const double v = std::abs(k - 8.0);
            saw.rho(0, n, k) = v;
            saw.v(0, n, k) = v;
            if (n < 20) saw.u(0, n, k) = v;
        }
    const SolverState saw_fine = prolong(saw, coarse, fine);
    for (int n = 0; n <= 40; ++n)
        for (int k = 0; k < 16; ++k)
            CHECK(saw_fine.rho(0, n, 2 * k) == doctest::Approx(std::abs(k - 8.0)).epsilon(1e-12));
}

TEST_CASE("prolong then restrict is the identity on coarse values") {
    const Grid coarse(2.0, 3.0, 12, 10), fine(2.0, 3.0, 48, 30);
    const SolverState s = filled_state(UnknownLayout(2, 12, 10), coarse,
                                       [](double t, double x) {
                                           return 0.3 * std::cos(x) - 0.1 * t;
                                       });
    const SolverState fine_state = prolong(s, coarse, fine);
    const SolverState back = restrict_state(fine_state, fine, coarse);
    for (std::size_t i = 0; i < s.w.size(); ++i)
        CHECK(back.w[i] == doctest::Approx(s.w[i]).epsilon(1e-12));
}

TEST_CASE("schedule validation") {
    ContinuationSchedule s;
    CHECK_THROWS_AS(validate_schedule(s), InvalidParameterError);
    s.rungs = {{30, 120, 0.2}};
    CHECK_THROWS_AS(validate_schedule(s), InvalidParameterError);  // nu above 0.05
    s.rungs = {{30, 120, 0.04}, {20, 240, 0.03}};
    CHECK_THROWS_AS(validate_schedule(s), InvalidParameterError);  // nx decreasing
    s.rungs = {{30, 120, 0.01}, {60, 240, 0.02}};
    CHECK_THROWS_AS(validate_schedule(s), InvalidParameterError);  // nu increasing
    s.rungs = {{15, 60, 0.04}, {30, 240, 0.04}, {60, 720, 0.03}};
    validate_schedule(s);
    validate_schedule(lwr_ladder());
    validate_schedule(regularized_ladder());
    validate_schedule(two_class_ladder(120, 0.04, 0.01));
    validate_schedule(two_class_ladder(120, 0.0, 0.0));
}

TEST_CASE("single-rung schedule equals a plain newton solve") {
    const Scenario sc = build_scenario(ScenarioName::ONE_CLASS, 1);
    ContinuationSchedule schedule;
    schedule.rungs = {{15, 60, 0.0}};
    const auto [state, reports] = run_schedule(schedule, CostKind::LWR1, sc);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].converged);
    CHECK_FALSE(reports[0].rmse_vs_reference.has_value());

    const DiscreteProblem p = make_problem(sc, CostKind::LWR1, Grid(2.0, 3.0, 15, 60), 0.0);
    const auto [direct, report] = newton_solve(p, SolverState(p.layout()));
    CHECK(state.w == direct.w);  // same zero start, same serial arithmetic
    CHECK(report.iterations == reports[0].iterations);
}

TEST_CASE("two-grid ladder converges with decreasing prolongation rmse") {
    const Scenario sc = build_scenario(ScenarioName::ONE_CLASS, 1);
    const auto [state, reports] = run_schedule(lwr_ladder(2), CostKind::LWR1, sc);
    REQUIRE(reports.size() == 3);
    for (const auto& r : reports) {
        CHECK(r.converged);
        CHECK(r.final_residual <= 6e-6);
    }
    REQUIRE(reports[1].rmse_vs_reference.has_value());
    REQUIRE(reports[2].rmse_vs_reference.has_value());
    CHECK(*reports[1].rmse_vs_reference > 0.005);
    CHECK(*reports[1].rmse_vs_reference < 0.1);
    CHECK(*reports[2].rmse_vs_reference < *reports[1].rmse_vs_reference);
}

TEST_CASE("viscosity ladder presets carry the table geometry") {
    const ContinuationSchedule reg = regularized_ladder(4);
    REQUIRE(reg.rungs.size() == 5);
    CHECK(reg.rungs[1].nx == 30);
    CHECK(reg.rungs[1].nt == 240);
    CHECK(reg.rungs[1].nu == doctest::Approx(0.04));
    CHECK(reg.rungs[4].nx == 240);
    CHECK(reg.rungs[4].nt == 3840);
    CHECK(reg.rungs[4].nu == doctest::Approx(0.01));
    const ContinuationSchedule lwr = lwr_ladder(4);
    REQUIRE(lwr.rungs.size() == 5);
    CHECK(lwr.rungs[0].nx == 15);
    CHECK(lwr.rungs[4].nx == 240);
    for (const auto& r : lwr.rungs) CHECK(r.nu == 0.0);
}
