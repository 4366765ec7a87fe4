#include <doctest.h>

#include "fgeo/expansion.hpp"
#include "fgeo/families.hpp"

#include <cmath>
#include <random>

using namespace fgeo;

namespace {

// Sum of Kulkarni-Nomizu squares c (A_ik A_jl - A_il A_jk): an algebraic curvature tensor.
CurvatureValue random_curvature(int n, const Mat& g, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    CurvatureValue c;
    c.riemann = Rank4(n);
    c.metric = g;
    for (int term = 0; term < 4; ++term) {
        Mat a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = N(rng);
        a = 0.5 * (a + a.transpose()).eval();
        const double w = N(rng);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) c.riemann(i, j, k, l) += w * (a(i, k) * a(j, l) - a(i, l) * a(j, k));
    }
    contract_curvature(c);
    return c;
}

CurvatureValue only_1212(double v) {
    CurvatureValue c;
    c.riemann = Rank4(3);
    c.metric = Mat::Identity(3, 3);
    c.riemann(0, 1, 0, 1) = c.riemann(1, 0, 1, 0) = v;
    c.riemann(0, 1, 1, 0) = c.riemann(1, 0, 0, 1) = -v;
    contract_curvature(c);
    return c;
}

Mat random_spd(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = N(rng);
    return a * a.transpose() + Mat::Identity(n, n);
}

} // namespace

TEST_CASE("spherical function in two dimensions is 2 Rbar") {
    for (double th : {1.0, 2.5}) {
        const FamilySpec a = builtin_family("axial-2d", ControlParams{th});
        const CurvatureValue c = curvature_at(a.metric(), Point("cartesian", Vec::Zero(2)), a.theta);
        for (double q : {0.0, 1.3, 4.0}) {
            const SphericalFrame f = spherical_frame(c.metric, vec({q}));
            CHECK(spherical_function(c, f) == doctest::Approx(2.0 * c.scalar).epsilon(1e-12));
        }
    }
    std::mt19937_64 rng(7);
    const Mat g = random_spd(2, rng);
    const CurvatureValue c = random_curvature(2, g, rng);
    CHECK(spherical_function(c, spherical_frame(g, vec({0.77}))) == doctest::Approx(2.0 * c.scalar).epsilon(1e-10));
}

TEST_CASE("spherical function vanishes on a flat manifold") {
    CurvatureValue c;
    c.riemann = Rank4(3);
    c.metric = Mat::Identity(3, 3);
    contract_curvature(c);
    CHECK(spherical_function(c, spherical_frame(c.metric, vec({0.3, -1.0}))) == 0.0);
}

TEST_CASE("n = 3 with a single independent component") {
    const CurvatureValue c = only_1212(0.8);
    for (double q1 : {-1.2, 0.0, 0.6})
        for (double q2 : {-2.0, 0.5, 3.0}) {
            const SphericalFrame f = spherical_frame(c.metric, vec({q1, q2}));
            CHECK(spherical_function(c, f) == doctest::Approx(4 * 0.8 * std::cos(q1) * std::cos(q1)).epsilon(1e-12));
            CHECK(anisotropic_table(vec({q1, q2}))[0] == doctest::Approx(std::cos(q1) * std::cos(q1)).epsilon(1e-14));
        }
}

TEST_CASE("expanded spherical function matches the contraction") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        const Mat g = random_spd(3, rng);
        const CurvatureValue c = random_curvature(3, g, rng);
        REQUIRE(curvature_symmetries(c).worst() <= 1e-12 * std::max(1.0, curvature_symmetries(c).scale));
        for (const Vec& q : {vec({0.3, 1.0}), vec({-1.1, -2.5}), vec({1.4, 0.1})}) {
            const SphericalFrame f = spherical_frame(g, q);
            CHECK(spherical_function_expanded(c, f) == doctest::Approx(spherical_function(c, f)).epsilon(1e-10));
        }
    }
}

TEST_CASE("anisotropic functions: frame contraction against the closed-form table") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (int i = 0; i < 20; ++i) {
        const Vec q = vec({U(rng), 2 * U(rng)});
        const auto a = anisotropic_functions(spherical_frame(Mat::Identity(3, 3), q));
        const auto b = anisotropic_table(q);
        for (int k = 0; k < 6; ++k) CHECK(a[static_cast<std::size_t>(k)] == doctest::Approx(b[static_cast<std::size_t>(k)]).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("grid average of F agrees term by term") {
    std::mt19937_64 rng(11);
    const Mat g = Mat::Identity(3, 3);
    const CurvatureValue c = random_curvature(3, g, rng);
    const DirectionGrid grid = direction_grid(3, 12, 24);
    double a = 0.0, b = 0.0, w = 0.0;
    for (std::size_t i = 0; i < grid.q.size(); ++i) {
        const double wi = grid.weight[i] * std::cos(grid.q[i](0));
        const SphericalFrame f = spherical_frame(g, grid.q[i]);
        a += wi * spherical_function(c, f);
        b += wi * spherical_function_expanded(c, f);
        w += wi;
    }
    CHECK(std::abs(a / w - b / w) <= 1e-10);
}

TEST_CASE("frame metric is the small-radius limit of the fan metric") {
    const FamilySpec a = builtin_family("axial-2d", ControlParams{2.0});
    const Point o("cartesian", Vec::Zero(2));
    Mat s3 = Mat::Identity(3, 3);
    s3(0, 2) = s3(2, 0) = 0.4;
    const FamilySpec f3 = builtin_family("gaussian-nd", gaussian_params(Vec::Zero(3), s3));
    const Point o3("x", Vec::Zero(3));
    const double l = 1e-3;
    for (const auto& [g, base, th, q] : {std::tuple{a.metric(), o, a.theta, vec({0.9})},
                                         std::tuple{f3.metric(), o3, f3.theta, vec({0.4, -1.3})}}) {
        const Mat gbar = g.at(base, th);
        const SphericalFrame f = spherical_frame(gbar, q);
        const FanRay ray = shoot_fan_ray(g, base, orthonormal_frame(gbar), q, l, th);
        const Mat gab = ray.jacobi.transpose() * g.at(Point(base.chart, ray.x), th) * ray.jacobi / (l * l);
        CHECK((gab - f.kappa).cwiseAbs().maxCoeff() <= 1e-4);
        CHECK(f.kappa.llt().info() == Eigen::Success);
        for (const Mat& S : f.S) CHECK((S + S.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("asymptotic ratio") {
    const double th = 4.0;
    const FamilySpec a = builtin_family("axial-2d", ControlParams{th});
    const Point o("cartesian", Vec::Zero(2));
    const double Z = axial_partition(th);
    const AsymptoticRatio r0 = asymptotic_ratio(a.density(), a.metric(), o, 0.0, vec({0.5}), a.theta, Z);
    CHECK(r0.predicted == doctest::Approx(1.0 / Z).epsilon(1e-14));
    CHECK(r0.measured == doctest::Approx(1.0 / Z).epsilon(1e-12));

    const FamilySpec f = builtin_family("gaussian-nd", ControlParams{0.0, 0.0, 1.0, 0.2, 2.0});
    for (double l : {0.1, 0.8, 2.0}) {
        const AsymptoticRatio r = asymptotic_ratio(f.density(), f.metric(), Point("x", Vec::Zero(2)), l, vec({1.0}), f.theta, 1.0);
        CHECK(r.predicted == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(r.measured == doctest::Approx(1.0).epsilon(1e-9));
    }

    const double Rbar = 6.0 / (th * th);
    for (double q : {0.0, 2.0}) {
        const double b = fitted_quadratic_coefficient(a.density(), a.metric(), o, vec({q}), a.theta);
        CHECK(b == doctest::Approx(-Rbar / 12.0).epsilon(0.10));
    }
}

TEST_CASE("spherical curvature scalar") {
    const double th = 1.5;
    const FamilySpec a = builtin_family("axial-2d", ControlParams{th});
    const Point o("cartesian", Vec::Zero(2));
    for (double r : {0.5, 1.0, 2.5}) {
        const double D = th * th + r * r;
        CHECK(spherical_curvature_scalar(a.metric(), o, r, vec({0.7}), a.theta) ==
              doctest::Approx(12 * th * th / (D * D)).epsilon(1e-7));
    }
    const FamilySpec f = builtin_family("gaussian-nd", ControlParams{0.0, 0.0, 1.0, 0.0, 1.0});
    CHECK(spherical_curvature_scalar(f.metric(), Point("x", Vec::Zero(2)), 1.0, vec({0.2}), f.theta) == 0.0);

    std::mt19937_64 rng(5);
    const Mat g = random_spd(3, rng);
    const CurvatureValue c = random_curvature(3, g, rng);
    const Vec q = vec({0.35, 2.1});
    const SphericalFrame fr = spherical_frame(g, q);
    // at l -> 0 the radial vector is e and the tangents are l xi
    const double pi0 = spherical_curvature_scalar(c, fr.e, 1e-3 * fr.xi);
    CHECK(pi0 == doctest::Approx(spherical_function(c, fr)).epsilon(1e-3));
}

TEST_CASE("unsupported dimensions") {
    CurvatureValue c;
    c.riemann = Rank4(4);
    c.metric = Mat::Identity(4, 4);
    CHECK_THROWS_AS(spherical_frame(c.metric, vec({0.1, 0.2, 0.3})), DimensionError);
}
