#include <doctest.h>

#include "fgeo/numerics.hpp"

#include <atomic>
#include <cmath>

using namespace fgeo;

TEST_CASE("adaptive quadrature") {
    auto r = integrate([](double x) { return std::exp(-x * x / 2); }, -kInf, kInf);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(std::sqrt(2 * kPi)).epsilon(1e-12));

    r = integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, kInf);
    CHECK(r.value == doctest::Approx(kPi / 2).epsilon(1e-11));

    // integrable endpoint singularity
    r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("integrate_or_throw reports non-convergence") {
    QuadOptions o;
    o.max_intervals = 2;
    o.rel_tol = 1e-15;
    o.abs_tol = 0.0;
    CHECK_THROWS_AS(integrate_or_throw([](double x) { return std::sin(1.0 / x); }, 1e-4, 1.0, o), IntegrationError);
}

TEST_CASE("2-d quadrature") {
    auto r = integrate_2d([](double x, double y) { return x * y * y; }, 0.0, 1.0, 0.0, 2.0);
    CHECK(r.value == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("dormand-prince on a harmonic oscillator") {
    OdeRhs rhs = [](double, const Vec& y, Vec& dy) {
        dy.resize(2);
        dy(0) = y(1);
        dy(1) = -y(0);
    };
    const OdeResult r = integrate_ode(rhs, 0.0, 2 * kPi, vec({1.0, 0.0}));
    REQUIRE(r.completed);
    CHECK(r.y(0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(r.y(1)) < 1e-8);
}

TEST_CASE("ode integration stops at an invalid state") {
    OdeRhs rhs = [](double, const Vec&, Vec& dy) { dy = vec({1.0}); };
    const OdeResult r = integrate_ode(rhs, 0.0, 5.0, vec({0.0}), {}, [](const Vec& y) { return y(0) < 2.0; });
    CHECK_FALSE(r.completed);
    CHECK(r.y(0) < 2.0);
    CHECK(r.y(0) > 1.99);
}

TEST_CASE("finite-difference stencils") {
    auto f = [](const Vec& x) { return std::sin(x(0)) * std::exp(x(1)); };
    const Vec x = vec({0.4, -0.3});
    CHECK(diff1(f, x, 0, 1e-5) == doctest::Approx(std::cos(0.4) * std::exp(-0.3)).epsilon(1e-9));
    CHECK(diff1_o4(f, x, 1, 1e-3) == doctest::Approx(f(x)).epsilon(1e-11));
    CHECK(diff2_o4(f, x, 0, 0, 1e-3, 1e-3) == doctest::Approx(-f(x)).epsilon(1e-8));
    CHECK(diff2_o4(f, x, 0, 1, 1e-3, 1e-3) == doctest::Approx(std::cos(0.4) * std::exp(-0.3)).epsilon(1e-8));
}

TEST_CASE("stencils refuse to leave the support") {
    const Support s = Support::box(vec({0.0}), vec({1.0}));
    auto f = [](const Vec& x) { return x(0) * x(0); };
    CHECK(diff1(f, vec({0.5}), 0, 1e-3, &s) == doctest::Approx(1.0));
    CHECK_THROWS_AS(diff1(f, vec({1e-12}), 0, 1e-3, &s), BoundaryError);
}

TEST_CASE("pairwise sum and ordered parallel map") {
    std::vector<double> v(10001, 0.1);
    CHECK(pairwise_sum(v) == doctest::Approx(1000.1).epsilon(1e-14));
    const auto sq = parallel_map<double>(1000, [](std::size_t i) { return static_cast<double>(i * i); });
    for (std::size_t i = 0; i < sq.size(); ++i) REQUIRE(sq[i] == static_cast<double>(i * i));
    std::atomic<int> count{0};
    parallel_for(257, [&](std::size_t) { ++count; });
    CHECK(count == 257);
}
