#include <doctest.h>

#include "fgeo/families.hpp"
#include "fgeo/rng.hpp"

#include <cmath>

using namespace fgeo;

namespace {
std::vector<double> mesh(double a, double b, int m) {
    std::vector<double> v(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (m - 1);
    return v;
}
} // namespace

TEST_CASE("gaussian density solves to the constant precision") {
    const double sigma = 0.7;
    const FamilySpec f = builtin_family("gaussian-nd", ControlParams{0.5, 1.0 / (sigma * sigma)});
    Solve1DReport rep;
    const MetricField g = solve_metric_1d(f.density(), f.theta, mesh(-2.5, 3.5, 41), {}, &rep);
    CHECK(g.provenance == Provenance::Solved);
    CHECK(rep.median == doctest::Approx(0.5).epsilon(1e-12));
    for (double x : {-2.0, 0.0, 0.5, 1.7, 3.3})
        CHECK(g.at(Point("x", vec({x})), f.theta)(0, 0) == doctest::Approx(1.0 / (sigma * sigma)).epsilon(1e-9));
    CHECK(rep.max_residual <= 1e-6);
}

TEST_CASE("flat start converges within 50 iterations at damping 0.5") {
    const FamilySpec f = builtin_family("gaussian-nd", ControlParams{0.0, 1.0});
    Solve1DOptions o;
    o.damping = 0.5;
    Solve1DReport rep;
    solve_metric_1d(f.density(), f.theta, mesh(-4.0, 4.0, 33), o, &rep);
    CHECK(rep.iterations <= 50);
}

TEST_CASE("cauchy density solves to the pushforward metric") {
    const double nu = 0.3, gamma = 1.4;
    const FamilySpec c = builtin_family("cauchy-1d", ControlParams{nu, gamma});
    // central 99% of the mass
    const double lo = nu + gamma * std::tan(kPi * (0.005 - 0.5));
    const double hi = nu + gamma * std::tan(kPi * (0.995 - 0.5));
    const MetricField g = solve_metric_1d(c.density(), c.theta, mesh(lo, hi, 61));
    for (double u : {0.006, 0.05, 0.3, 0.5, 0.77, 0.99}) {
        const Point x("x", vec({nu + gamma * std::tan(kPi * (u - 0.5))}));
        const double solved = g.at(x, c.theta)(0, 0);
        const double exact = c.metric().at(x, c.theta)(0, 0);
        CHECK(std::abs(solved - exact) <= 1e-4 * std::max(1.0, exact));
    }
}

TEST_CASE("solved metric carries consistent derivatives") {
    const FamilySpec c = builtin_family("cauchy-1d", ControlParams{0.0, 1.0});
    const MetricField g = solve_metric_1d(c.density(), c.theta, mesh(-20.0, 20.0, 81));
    MetricField fd = g;
    fd.d1 = nullptr;
    fd.d2 = nullptr;
    for (double x : {-3.0, -0.4, 1.1, 6.0}) {
        const Point p("x", vec({x}));
        const double a = metric_first_derivatives(g, p, c.theta)[0](0, 0);
        const double b = metric_first_derivatives(fd, p, c.theta)[0](0, 0);
        CHECK(a == doctest::Approx(b).epsilon(1e-5));
        CHECK(std::abs(metric_residual(c.density(), g, p, c.theta)(0, 0)) <= 1e-6);
    }
}

TEST_CASE("bad grids are rejected") {
    const FamilySpec f = builtin_family("gaussian-nd", ControlParams{0.0, 1.0});
    CHECK_THROWS_AS(solve_metric_1d(f.density(), f.theta, {0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(solve_metric_1d(f.density(), f.theta, {0.0, 2.0, 1.0}), DomainError);
    const FamilySpec a = builtin_family("axial-2d", ControlParams{2.0});
    CHECK_THROWS_AS(solve_metric_1d(a.density(), a.theta, mesh(0.0, 1.0, 5)), DimensionError);
}

TEST_CASE("iteration cap reports a solver error with its residual") {
    const FamilySpec f = builtin_family("cauchy-1d", ControlParams{0.0, 1.0});
    Solve1DOptions o;
    o.max_iterations = 2;
    try {
        solve_metric_1d(f.density(), f.theta, mesh(-4.0, 4.0, 17), o);
        FAIL("expected a solver error");
    } catch (const SolverError& e) {
        CHECK(e.residual > 0.0);
    }
}
