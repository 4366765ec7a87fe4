#include <doctest.h>

#include "fgeo/config.hpp"
#include "fgeo/families.hpp"

#include <cmath>

using namespace fgeo;

namespace {

// Round sphere of radius 1 in (q1, q2), q1 the polar angle.
MetricField unit_sphere() {
    MetricField g;
    g.dim = 2;
    g.chart = "sphere";
    g.eval = [](const Vec& q, const ControlParams&) {
        Mat m = Mat::Identity(2, 2);
        m(1, 1) = std::sin(q(0)) * std::sin(q(0));
        return m;
    };
    g.support = Support::box(vec({0.0, 0.0}), vec({kPi, 2 * kPi}));
    g.support.periodic = {false, true};
    return g;
}

// Sphere block times a curved-looking but flat line block.
MetricField sphere_times_line() {
    MetricField g;
    g.dim = 3;
    g.chart = "prod";
    g.eval = [](const Vec& q, const ControlParams&) {
        Mat m = Mat::Zero(3, 3);
        m(0, 0) = 1.0;
        m(1, 1) = std::sin(q(0)) * std::sin(q(0));
        m(2, 2) = 1.0 + q(2) * q(2);
        return m;
    };
    g.support = Support::whole(3);
    return g;
}

} // namespace

TEST_CASE("constant metric has vanishing connection and curvature") {
    Mat s(3, 3);
    s << 2.0, 0.5, 0.1, 0.5, 1.0, 0.2, 0.1, 0.2, 3.0;
    const FamilySpec f = builtin_family("gaussian-nd", gaussian_params(vec({0.1, -0.4, 1.0}), s));
    const Point x("x", vec({0.3, 0.2, -1.0}));
    const ConnectionValue c = christoffel_at(f.metric(), x, f.theta);
    for (int k = 0; k < 3; ++k) CHECK(c.gamma[k].cwiseAbs().maxCoeff() == 0.0);
    const CurvatureValue r = curvature_at(f.metric(), x, f.theta);
    CHECK(r.riemann.max_abs() == 0.0);
    CHECK(r.scalar == 0.0);
}

TEST_CASE("unit sphere connection and curvature") {
    const MetricField g = unit_sphere();
    for (double q1 : {0.4, 1.2, 2.6}) {
        const Point q("sphere", vec({q1, 1.0}));
        const ConnectionValue c = christoffel_at(g, q, ControlParams{});
        CHECK(c(0, 1, 1) == doctest::Approx(-std::sin(q1) * std::cos(q1)).epsilon(1e-8));
        CHECK(c(1, 0, 1) == doctest::Approx(std::cos(q1) / std::sin(q1)).epsilon(1e-8));
        CHECK(c(1, 0, 1) == c(1, 1, 0));
        const CurvatureValue r = curvature_at(g, q, ControlParams{});
        CHECK(r.scalar == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(r.riemann(0, 1, 0, 1) == doctest::Approx(std::sin(q1) * std::sin(q1)).epsilon(1e-6));
    }
}

TEST_CASE("axial-2d polar connection") {
    const double th = 1.5;
    const FamilySpec s = builtin_family("axial-2d", ControlParams{th});
    const MetricField& g = s.chart("polar").metric;
    for (double r : {0.2, 1.0, 4.0}) {
        const Point p("polar", vec({r, 0.7}));
        const ConnectionValue c = christoffel_at(g, p, s.theta);
        const double D = th * th + r * r;
        CHECK(c(0, 1, 1) == doctest::Approx(-std::pow(th, 4) * r / (D * D)).epsilon(1e-10));
        CHECK(c(0, 0, 0) == 0.0);
        // finite differences agree with the analytic jets
        MetricField fd = g;
        fd.d1 = nullptr;
        fd.d2 = nullptr;
        const ConnectionValue cf = christoffel_at(fd, p, s.theta);
        for (int k = 0; k < 2; ++k) CHECK((cf.gamma[k] - c.gamma[k]).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("axial-2d scalar curvature in every chart") {
    const double th = 2.0;
    const FamilySpec s = builtin_family("axial-2d", ControlParams{th});
    const CoordinateChange& cp = s.change("cartesian", "polar");
    const CoordinateChange& ct = s.change("cartesian", "t");
    for (double r : {0.3, 1.0, 2.5})
        for (double a : {0.5, 3.0}) {
            const Point x("cartesian", vec({r * std::cos(a), r * std::sin(a)}));
            const double D = th * th + r * r;
            const double exact = 6 * th * th / (D * D);
            const double rc = curvature_at(s.metric(), x, s.theta).scalar;
            const double rp = curvature_at(s.chart("polar").metric, cp.apply(x), s.theta).scalar;
            const double rt = curvature_at(s.chart("t").metric, ct.apply(x), s.theta).scalar;
            CHECK(rc == doctest::Approx(exact).epsilon(1e-9));
            CHECK(std::abs(rp - rc) <= 1e-5);
            CHECK(std::abs(rt - rc) <= 1e-5);
        }
}

TEST_CASE("curvature symmetries and first Bianchi identity") {
    const FamilySpec s = builtin_family("axial-2d", ControlParams{1.3});
    const CurvatureValue a = curvature_at(s.metric(), Point("cartesian", vec({0.4, -0.9})), s.theta);
    CHECK(curvature_symmetries(a).worst() <= 1e-6 * std::max(1.0, curvature_symmetries(a).scale));

    const MetricField p = sphere_times_line();
    const CurvatureValue b = curvature_at(p, Point("prod", vec({1.1, 0.3, 0.8})), ControlParams{});
    const SymmetryReport sb = curvature_symmetries(b);
    CHECK(sb.antisym_first <= 1e-6);
    CHECK(sb.antisym_second <= 1e-6);
    CHECK(sb.pair_symmetry <= 1e-6);
    CHECK(sb.bianchi <= 1e-6);
}

TEST_CASE("product metric has no mixed-block curvature") {
    const MetricField g = sphere_times_line();
    const CurvatureValue c = curvature_at(g, Point("prod", vec({0.9, 2.0, -0.6})), ControlParams{});
    auto block = [](int i) { return i < 2 ? 0 : 1; };
    double mixed = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    const int b = block(i);
                    if (block(j) != b || block(k) != b || block(l) != b) mixed = std::max(mixed, std::abs(c.riemann(i, j, k, l)));
                }
    CHECK(mixed <= 1e-6);
    CHECK(c.scalar == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("metric compatibility") {
    const FamilySpec s = builtin_family("axial-2d", ControlParams{2.0});
    for (const auto& [chart, p] : {std::pair{"cartesian", vec({0.5, 0.7})}, {"polar", vec({1.0, 2.0})}, {"t", vec({1.2, 0.3})}})
        CHECK(metric_compatibility_defect(s.chart(chart).metric, Point(chart, p), s.theta) <= 1e-6);
    CHECK(metric_compatibility_defect(unit_sphere(), Point("sphere", vec({0.8, 0.1})), ControlParams{}) <= 1e-6);
}

TEST_CASE("normal-coordinate formula at the axial-2d origin") {
    for (double th : {1.0, 3.0}) {
        const FamilySpec s = builtin_family("axial-2d", ControlParams{th});
        const Point o("cartesian", Vec::Zero(2));
        const CurvatureValue a = curvature_at(s.metric(), o, s.theta);
        const CurvatureValue b = normal_coordinate_curvature(s.metric(), o, s.theta);
        CHECK(std::abs(a.scalar - b.scalar) <= 1e-4);
        CHECK(b.scalar == doctest::Approx(6.0 / (th * th)).epsilon(1e-6));
    }
}

TEST_CASE("metric residual: exact, declared and wrong metrics") {
    Mat s(2, 2);
    s << 1.5, 0.4, 0.4, 0.8;
    const FamilySpec f = builtin_family("gaussian-nd", gaussian_params(vec({1.0, -2.0}), s));
    const Point x("x", vec({0.2, 0.1}));
    CHECK(metric_residual(f.density(), f.metric(), x, f.theta).cwiseAbs().maxCoeff() <= 1e-6);
    const MetricField wrong = constant_metric("x", 2.0 * s);
    CHECK(metric_residual(f.density(), wrong, x, f.theta).cwiseAbs().maxCoeff() >= 0.1);

    // axial-2d leaves a known residual in the cartesian chart
    const FamilySpec a = builtin_family("axial-2d", ControlParams{2.0});
    for (const Point& p : a.probes) {
        const Mat r = metric_residual(a.density(), a.metric(), p, a.theta);
        CHECK((r - a.closed.residual(p, a.theta)).cwiseAbs().maxCoeff() <= 1e-5);
    }
    CHECK(a.gate.passed);
    CHECK(f.gate.passed);
}

TEST_CASE("every built-in family passes its gate") {
    for (const std::string& id : builtin_family_ids()) {
        const FamilySpec s = builtin_family(id, ControlParams(default_thetas(id).front()));
        CHECK_MESSAGE(s.gate.passed, id);
    }
}

TEST_CASE("transported metric agrees with the family's own chart metric") {
    const FamilySpec s = builtin_family("axial-2d", ControlParams{1.8});
    const MetricField tp = transport_metric(s.metric(), s.change("cartesian", "polar"));
    CHECK(tp.provenance == Provenance::Transported);
    const Point p("polar", vec({1.3, 0.6}));
    CHECK((tp.at(p, s.theta) - s.chart("polar").metric.at(p, s.theta)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("non-positive-definite metrics are rejected") {
    Mat bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(spd_inverse(bad), GeometryError);
    CHECK_THROWS_AS(christoffel_at(constant_metric("x", bad), Point("x", vec({0.0, 0.0})), ControlParams{}),
                    GeometryError);
}
