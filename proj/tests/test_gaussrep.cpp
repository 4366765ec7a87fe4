#include <doctest.h>

#include "fgeo/config.hpp"
#include "fgeo/gaussrep.hpp"

#include <cmath>

using namespace fgeo;

namespace {
double axial_Z(double t) { return std::sqrt(kPi) * std::exp(t * t / 2) * (t / std::sqrt(2.0)) * std::erfc(t / std::sqrt(2.0)); }
} // namespace

TEST_CASE("probability weight") {
    Mat s(2, 2);
    s << 2.0, 0.5, 0.5, 1.0;
    const FamilySpec f = builtin_family("gaussian-nd", gaussian_params(vec({0.3, 0.1}), s));
    CHECK(probability_weight(f.density(), f.metric(), Point("x", vec({0.3, 0.1})), f.theta) ==
          doctest::Approx(1.0).epsilon(1e-14));

    const double th = 1.7;
    const FamilySpec a = builtin_family("axial-2d", ControlParams{th});
    const CoordinateChange& cp = a.change("cartesian", "polar");
    for (double r : {0.2, 1.0, 2.4}) {
        const Point x("cartesian", vec({r * std::cos(2.0), r * std::sin(2.0)}));
        const double w = probability_weight(a.density(), a.metric(), x, a.theta);
        CHECK(w == doctest::Approx(std::exp(-r * r / 2) / axial_Z(th)).epsilon(1e-12));
        const ChartView& pv = a.chart("polar");
        CHECK(probability_weight(pv.density, pv.metric, cp.apply(x), a.theta) == doctest::Approx(w).epsilon(1e-12));
        const ChartView& tv = a.chart("t");
        const Point t = a.change("cartesian", "t").apply(x);
        CHECK(probability_weight(tv.density, tv.metric, t, a.theta) == doctest::Approx(w).epsilon(1e-10));
    }
}

TEST_CASE("information potential") {
    const double th = 2.2;
    const FamilySpec a = builtin_family("axial-2d", ControlParams{th});
    const double P = -std::log(axial_Z(th));
    for (double r : {0.0, 0.7, 3.0}) {
        const Point x("cartesian", vec({r, 0.0}));
        CHECK(information_potential(a.density(), a.metric(), x, a.theta).S == doctest::Approx(P - r * r / 2).epsilon(1e-12));
        const Point p = a.change("cartesian", "polar").apply(Point("cartesian", vec({r + 0.1, 0.2})));
        const double sc = information_potential(a.density(), a.metric(), Point("cartesian", vec({r + 0.1, 0.2})), a.theta).S;
        CHECK(information_potential(a.chart("polar").density, a.chart("polar").metric, p, a.theta).S ==
              doctest::Approx(sc).epsilon(1e-12));
    }
    const FamilySpec f = builtin_family("gaussian-nd", ControlParams{1.0, 4.0});
    CHECK(std::abs(information_potential(f.density(), f.metric(), Point("x", vec({1.0})), f.theta).S) <= 1e-14);

    ControlParams k3{th};
    k3.k = 3.0;
    CHECK(information_potential(a.density(), a.metric(), Point("cartesian", vec({0.5, 0.5})), k3).S ==
          doctest::Approx(3.0 * (P - 0.25)).epsilon(1e-12));
}

TEST_CASE("weight underflow is flagged") {
    const FamilySpec f = builtin_family("gaussian-nd", ControlParams{0.0, 1.0});
    const PotentialValue v = information_potential(f.density(), f.metric(), Point("x", vec({60.0})), f.theta);
    CHECK(v.S == doctest::Approx(-1800.0));
    const PotentialValue u = information_potential(f.density(), f.metric(), Point("x", vec({1e200})), f.theta);
    CHECK(u.underflow);
    CHECK(std::isinf(u.S));
}

TEST_CASE("mode search") {
    Mat s(3, 3);
    s << 2.0, 0.3, 0.0, 0.3, 1.0, 0.2, 0.0, 0.2, 0.5;
    const Vec mu = vec({1.0, -2.0, 0.5});
    const FamilySpec f = builtin_family("gaussian-nd", gaussian_params(mu, s));
    const ModeResult m = find_mode(f.density(), f.metric(), f.theta);
    CHECK((m.mode.x - mu).norm() <= 1e-8);
    CHECK(m.gradient_norm <= 1e-8);

    const FamilySpec a = builtin_family("axial-2d", ControlParams{4.0});
    const ModeResult ma = find_mode(a.density(), a.metric(), a.theta, {Point("cartesian", vec({1.5, -0.5}))});
    const ModeResult mb = find_mode(a.density(), a.metric(), a.theta, {Point("cartesian", vec({-2.0, 2.5}))});
    CHECK(ma.mode.x.norm() <= 1e-8);
    CHECK((ma.mode.x - mb.mode.x).norm() <= 1e-8);
    CHECK(ma.hessian.eigenvalues().real().maxCoeff() < 0.0);

    const FamilySpec c = builtin_family("cauchy-1d", ControlParams{-0.7, 2.0});
    CHECK(find_mode(c.density(), c.metric(), c.theta).mode.x(0) == doctest::Approx(-0.7).epsilon(1e-9));
}

TEST_CASE("gaussian partition function") {
    const FamilySpec f = builtin_family("gaussian-nd", ControlParams{0.0, 0.0, 2.0, 0.5, 1.0});
    const PartitionResult pf = gaussian_partition(f.density(), f.metric(), Point("x", Vec::Zero(2)), f.theta);
    CHECK(pf.Z == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(pf.P + std::log(pf.Z)) <= 1e-12);

    for (double th : {1.0, 3.0}) {
        const FamilySpec a = builtin_family("axial-2d", ControlParams{th});
        const Point o("cartesian", Vec::Zero(2));
        const PartitionResult q = gaussian_partition(a.density(), a.metric(), o, a.theta);
        CHECK(q.Z == doctest::Approx(axial_Z(th)).epsilon(1e-6));
        CHECK(q.method == PartitionMethod::RadialQuadrature);
        PartitionOptions an;
        an.method = PartitionMethod::Analytic;
        an.closed_form = a.closed.Z;
        const PartitionResult c = gaussian_partition(a.density(), a.metric(), o, a.theta, an);
        CHECK(c.Z == doctest::Approx(axial_Z(th)).epsilon(1e-13));
        CHECK(axial_partition(th) == doctest::Approx(axial_Z(th)).epsilon(1e-13));
    }
    PartitionOptions missing;
    missing.method = PartitionMethod::Analytic;
    CHECK_THROWS(gaussian_partition(f.density(), f.metric(), Point("x", Vec::Zero(2)), f.theta, missing));
}

TEST_CASE("P approaches Rbar/6 at large theta") {
    const double th = 10.0;
    const double P = -std::log(axial_partition(th));
    const double R6 = 1.0 / (th * th);
    CHECK(std::abs(P - R6) / R6 <= 0.05);
}

TEST_CASE("curvature radius") {
    for (double th : {2.0, 5.0, 40.0}) {
        const FamilySpec a = builtin_family("axial-2d", ControlParams{th});
        const CurvatureRadius c = curvature_radius(curvature_at(a.metric(), Point("cartesian", Vec::Zero(2)), a.theta));
        CHECK(c.ell_c == doctest::Approx(th / std::sqrt(6.0)).epsilon(1e-8));
        CHECK(c.gaussian_ok == (th / std::sqrt(6.0) > 10.0));
        CHECK(c.curvature_sign == 1);
    }
    const FamilySpec a = builtin_family("axial-2d", ControlParams{std::sqrt(6.0)});
    const CurvatureRadius edge = curvature_radius(curvature_at(a.metric(), Point("cartesian", Vec::Zero(2)), a.theta));
    CHECK(edge.ell_c == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(edge.marginal);
    CHECK_FALSE(edge.gaussian_ok);

    const FamilySpec f = builtin_family("gaussian-nd", ControlParams{0.0, 1.0});
    const CurvatureRadius flat = curvature_radius(curvature_at(f.metric(), Point("x", vec({0.0})), f.theta));
    CHECK(std::isinf(flat.ell_c));
    CHECK(flat.gaussian_ok);
}

TEST_CASE("entropies of the 1-D gaussian and its cauchy image") {
    const double sigma = 1.8;
    const FamilySpec f = builtin_family("gaussian-nd", ControlParams{0.4, 1.0 / (sigma * sigma)});
    const EntropyValues g = entropies(f.density(), f.metric(), f.theta);
    CHECK(g.differential == doctest::Approx(std::log(sigma * std::sqrt(2 * kPi * std::exp(1.0)))).epsilon(1e-8));
    CHECK(g.invariant == doctest::Approx(0.5).epsilon(1e-8));

    const double gamma = 0.6;
    const FamilySpec c = builtin_family("cauchy-1d", ControlParams{1.0, gamma});
    const EntropyValues e = entropies(c.density(), c.metric(), c.theta);
    CHECK(std::abs(e.invariant - g.invariant) <= 1e-5);
    CHECK(e.differential == doctest::Approx(std::log(4 * kPi * gamma)).epsilon(1e-6));
}

TEST_CASE("invariant entropy agrees across charts") {
    const FamilySpec a = builtin_family("axial-2d", ControlParams{2.0});
    const EntropyValues ec = entropies(a.density(), a.metric(), a.theta);
    const EntropyValues ep = entropies(a.chart("polar").density, a.chart("polar").metric, a.theta);
    CHECK(std::abs(ec.invariant - ep.invariant) <= 1e-6);
    CHECK(std::abs(ec.differential - ep.differential) > 1e-3);
}

TEST_CASE("first integral and the riemannian gaussian representation") {
    for (const std::string& id : builtin_family_ids()) {
        const FamilySpec s = builtin_family(id, ControlParams(default_thetas(id).front()));
        const ModeResult m = find_mode(s.density(), s.metric(), s.theta);
        const double Z = s.closed.Z(s.theta);
        const double P = -std::log(Z);
        for (const Point& p : s.probes) {
            const double S = information_potential(s.density(), s.metric(), p, s.theta).S;
            const double psi2 = entropy_gradient(s.density(), s.metric(), p, s.theta).psi2;
            CHECK_MESSAGE(std::abs(P - (S + 0.5 * psi2)) <= 1e-5, id);

            const double l = separation_distance(s.metric(), p, m.mode, s.theta);
            const Mat g = s.metric().at(p, s.theta);
            const double ugr = std::exp(-0.5 * l * l) * std::sqrt((g / (2 * kPi)).determinant()) / Z;
            CHECK_MESSAGE(s.density().rho(p, s.theta) == doctest::Approx(ugr).epsilon(1e-5), id);
        }
    }
}
