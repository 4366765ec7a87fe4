#include <doctest.h>

#include "fgeo/families.hpp"
#include "fgeo/thermo.hpp"

#include <cmath>

using namespace fgeo;

namespace {

CurvatureValue scalar_only(int n, double R) {
    CurvatureValue c;
    c.riemann = Rank4(n);
    c.ricci = Mat::Zero(n, n);
    c.metric = Mat::Identity(n, n);
    c.scalar = R;
    return c;
}

CurvatureValue axial_curvature(double th) {
    const FamilySpec a = builtin_family("axial-2d", ControlParams{th});
    return curvature_at(a.metric(), Point("cartesian", Vec::Zero(2)), a.theta);
}

} // namespace

TEST_CASE("closed-system entropy estimate") {
    CHECK(closed_system_entropy_estimate(scalar_only(2, 0.0), 1.0) == 0.0);
    CHECK(closed_system_entropy_estimate(scalar_only(2, 0.0), 2.0) == 0.0);
    CHECK(closed_system_entropy_estimate(scalar_only(2, 0.3), 2.0) ==
          doctest::Approx(4.0 * closed_system_entropy_estimate(scalar_only(2, 0.3), 1.0)).epsilon(1e-15));
    for (double th : {10.0, 20.0, 30.0}) {
        const double est = closed_system_entropy_estimate(axial_curvature(th), 1.0);
        CHECK(est == doctest::Approx(1.0 / (th * th)).epsilon(1e-9));
        CHECK(est == doctest::Approx(-std::log(axial_partition(th))).epsilon(0.05));
    }
}

TEST_CASE("legendre transformation with curvature correction") {
    // flat open system s(x) = -x^2/2 + 3x, stationary for theta = 1 at x = 2
    const ScalarField s = [](const Vec& x) { return -0.5 * x(0) * x(0) + 3.0 * x(0); };
    const LegendreResult flat = legendre_with_correction(vec({1.0}), Point("x", vec({2.0})), s, scalar_only(1, 0.0), 1.0);
    CHECK(flat.P0 == doctest::Approx(2.0 - 4.0).epsilon(1e-14));
    CHECK(flat.P2 == flat.P0);

    const LegendreResult six = legendre_with_correction(vec({1.0}), Point("x", vec({2.0})), s, scalar_only(1, 6.0), 1.0);
    CHECK(six.P2 - six.P0 == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(legendre_with_correction(vec({1.0}), Point("x", vec({2.5})), s, scalar_only(1, 0.0), 1.0),
                    StationarityError);
}

TEST_CASE("worked example as an open system") {
    // Density of states Omega = unnormalized cartesian density; no linear term, xbar = 0.
    for (double th : {10.0, 15.0, 30.0}) {
        const FamilySpec a = builtin_family("axial-2d", ControlParams{th});
        const ScalarField omega = [th](const Vec& x) {
            const double r2 = x.squaredNorm();
            return std::exp(-r2 / 2) * th / (2 * kPi * std::sqrt(r2 + th * th));
        };
        const ScalarField s_open = [&](const Vec& x) {
            return open_system_entropy(omega, a.metric(), Point("cartesian", x), a.theta, 1.0);
        };
        const Point o("cartesian", Vec::Zero(2));
        const LegendreResult L = legendre_with_correction(Vec::Zero(2), o, s_open, curvature_at(a.metric(), o, a.theta), 1.0);
        const double P = -std::log(axial_partition(th));
        CHECK(std::abs(L.P0) <= 1e-12);
        CHECK(std::abs(L.P2 - P) <= 0.05 * P);

        // closed entropy S = P - theta x + s at probes
        for (const Point& p : a.probes) {
            const double S = information_potential(a.density(), a.metric(), p, a.theta).S;
            CHECK(S == doctest::Approx(P + s_open(p.x)).epsilon(1e-10));
        }
    }
}

TEST_CASE("open-system entropy") {
    const MetricField g1 = constant_metric("x", Mat::Identity(1, 1));
    CHECK(open_system_entropy([](const Vec&) { return 1.0; }, g1, Point("x", vec({0.0})), ControlParams{}, 1.0) ==
          doctest::Approx(0.5 * std::log(2 * kPi)).epsilon(1e-15));

    Mat m(2, 2);
    m << 3.0, 0.5, 0.5, 2.0;
    const double k = 1.7;
    const MetricField g = constant_metric("x", k * m);
    const double om = std::sqrt((k * m / (2 * kPi * k)).determinant());
    CHECK(std::abs(open_system_entropy([om](const Vec&) { return om; }, g, Point("x", vec({0.1, 0.2})), ControlParams{}, k)) <= 1e-14);
    CHECK_THROWS_AS(open_system_entropy([](const Vec&) { return 0.0; }, g, Point("x", vec({0.0, 0.0})), ControlParams{}, k),
                    DomainError);
}

TEST_CASE("gaussian applicability") {
    for (double th : {3.0, std::sqrt(12.0) + 1e-6, 3.47, 10.0}) {
        const Applicability a = gaussian_applicability(axial_curvature(th), 2, 1.0);
        CHECK(a.product == doctest::Approx(12.0 / (th * th)).epsilon(1e-8));
        CHECK(a.applicable == (th > std::sqrt(12.0)));
    }
    CHECK(gaussian_applicability(scalar_only(3, 0.0), 3, 5.0).applicable);
    // boundary R = 1 / (n k) is not applicable
    const Applicability edge = gaussian_applicability(scalar_only(2, 0.25), 2, 2.0);
    CHECK(edge.product == 1.0);
    CHECK_FALSE(edge.applicable);
}

TEST_CASE("gaussian approximation near equilibrium") {
    const double th = 10.0;
    const FamilySpec a = builtin_family("axial-2d", ControlParams{th});
    const Point o("cartesian", Vec::Zero(2));
    const Mat gR = ruppeiner_tensor(a.density(), o, a.theta, 1.0);
    // -hess log rho at the mode: the metric plus 1/theta^2 from the sqrt(theta^2 + r^2) factor
    CHECK((gR - (1.0 + 1.0 / (th * th)) * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
    const double lc = th / std::sqrt(6.0);
    for (double f : {0.05, 0.15, 0.3})
        for (double phi : {0.0, 1.0, 2.5}) {
            const double r = f * lc;
            const Vec x = vec({r * std::cos(phi), r * std::sin(phi)});
            const double exact = a.density().rho(Point("cartesian", x), a.theta);
            CHECK(gaussian_approximation_density(gR, o, x, 1.0) == doctest::Approx(exact).epsilon(0.10));
        }
}

TEST_CASE("k scaling is exact") {
    const double th = 4.0, k = 1e-3;
    const FamilySpec a = builtin_family("axial-2d", ControlParams{th});
    ControlParams tk = a.theta;
    tk.k = k;
    PartitionOptions an;
    an.method = PartitionMethod::Analytic;
    an.closed_form = a.closed.Z;
    const ThermoState s1 = thermo_state(a.density(), a.metric(), a.theta, an);
    const ThermoState sk = thermo_state(a.density(), a.metric(), tk, an);
    CHECK(sk.k == k);
    CHECK(std::abs(sk.S_eq - k * s1.S_eq) <= 1e-12 * std::abs(k * s1.S_eq));
    CHECK(std::abs(sk.P_planck - k * s1.P_planck) <= 1e-12 * std::abs(k * s1.P_planck));
    CHECK(sk.S_eq == doctest::Approx(sk.P_planck).epsilon(1e-12));

    const Point o("cartesian", Vec::Zero(2));
    const Mat g1 = ruppeiner_tensor(a.density(), o, a.theta, 1.0);
    const Mat gk = ruppeiner_tensor(a.density(), o, a.theta, k);
    CHECK((gk - k * g1).cwiseAbs().maxCoeff() <= 1e-12 * g1.cwiseAbs().maxCoeff() * k);
    const Vec x = vec({0.3, -0.2});
    CHECK(gaussian_approximation_density(gk, o, x, k) ==
          doctest::Approx(gaussian_approximation_density(g1, o, x, 1.0)).epsilon(1e-12));

    const ScalarField omega = [](const Vec& y) { return 0.2 + y.squaredNorm(); };
    MetricField gm = a.metric();
    const MetricField unit = gm;
    gm.eval = [unit, k](const Vec& y, const ControlParams& t) -> Mat { return k * unit.eval(y, t); };
    const Point p("cartesian", vec({0.5, 0.4}));
    const double s_1 = open_system_entropy(omega, unit, p, a.theta, 1.0);
    const double s_k = open_system_entropy(omega, gm, p, a.theta, k);
    CHECK(std::abs(s_k - k * s_1) <= 1e-12 * std::abs(k * s_1));
}
