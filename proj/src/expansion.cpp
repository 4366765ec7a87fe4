#include "fgeo/expansion.hpp"

#include <cmath>

namespace fgeo {

double SphericalFrame::anisotropic(int i, int j, int k, int l) const {
    const Mat kinv = kappa.inverse();
    double s = 0.0;
    for (int a = 0; a < n - 1; ++a)
        for (int b = 0; b < n - 1; ++b)
            s += kinv(a, b) * S[static_cast<std::size_t>(a)](i, j) * S[static_cast<std::size_t>(b)](k, l);
    return s;
}

SphericalFrame spherical_frame(const Mat& gbar, const Vec& q) {
    const int n = static_cast<int>(gbar.rows());
    if (n < 2 || n > 3) throw DimensionError("spherical frames exist for n = 2 and n = 3 only");
    if (q.size() != n - 1) throw DimensionError("spherical frame: q must have n - 1 entries");
    const Mat frame = orthonormal_frame(gbar);
    SphericalFrame f;
    f.n = n;
    f.q = q;
    f.e = frame * sphere_point(n, q);
    f.xi = frame * sphere_tangents(n, q);
    f.kappa = f.xi.transpose() * gbar * f.xi;
    for (int a = 0; a < n - 1; ++a) {
        const Vec x = f.xi.col(a);
        f.S.push_back(f.e * x.transpose() - x * f.e.transpose());
    }
    Eigen::LLT<Mat> llt(f.kappa);
    if (llt.info() != Eigen::Success) throw GeometryError("spherical frame: kappa is not positive definite");
    return f;
}

double spherical_function(const CurvatureValue& curv, const SphericalFrame& frame) {
    const int n = frame.n;
    if (curv.dim() != n) throw DimensionError("spherical_function: dimension mismatch");
    const Mat kinv = frame.kappa.inverse();
    double F = 0.0;
    for (int a = 0; a < n - 1; ++a)
        for (int b = 0; b < n - 1; ++b) {
            const Mat& sa = frame.S[static_cast<std::size_t>(a)];
            const Mat& sb = frame.S[static_cast<std::size_t>(b)];
            double c = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) c += curv.riemann(i, j, k, l) * sa(i, j) * sb(k, l);
            F += kinv(a, b) * c;
        }
    return F;
}

namespace {
// Zero-based index quadruples of 1212, 2323, 3131, 1223, 2331, 3112.
constexpr int kIdx[6][4] = {{0, 1, 0, 1}, {1, 2, 1, 2}, {2, 0, 2, 0}, {0, 1, 1, 2}, {1, 2, 2, 0}, {2, 0, 0, 1}};
} // namespace

std::array<double, 6> anisotropic_functions(const SphericalFrame& frame) {
    if (frame.n != 3) throw DimensionError("anisotropic functions are defined for n = 3");
    std::array<double, 6> g{};
    for (int t = 0; t < 6; ++t) g[static_cast<std::size_t>(t)] = frame.anisotropic(kIdx[t][0], kIdx[t][1], kIdx[t][2], kIdx[t][3]);
    return g;
}

std::array<double, 6> anisotropic_table(const Vec& q) {
    const double c1 = std::cos(q(0)), s1 = std::sin(q(0)), c2 = std::cos(q(1)), s2 = std::sin(q(1));
    return {c1 * c1,
            s2 * s2 + s1 * s1 * c2 * c2,
            c2 * c2 + s1 * s1 * s2 * s2,
            -s1 * c1 * c2,
            -c2 * s2 + s1 * s1 * c2 * s2,
            -s1 * c1 * s2};
}

double spherical_function_expanded(const CurvatureValue& curv, const SphericalFrame& frame) {
    const auto g = anisotropic_functions(frame);
    double F = 0.0;
    for (int t = 0; t < 6; ++t) {
        const double r = curv.riemann(kIdx[t][0], kIdx[t][1], kIdx[t][2], kIdx[t][3]);
        F += (t < 3 ? 4.0 : 8.0) * r * g[static_cast<std::size_t>(t)];
    }
    return F;
}

namespace {

double measured_ratio(const DensityFamily& family, const MetricField& g, const Point& mode, const Mat& frame,
                      double ell, const Vec& q, const ControlParams& theta, bool& truncated) {
    const int n = g.dim;
    const FanRay ray = shoot_fan_ray(g, mode, frame, q, ell, theta);
    truncated = ray.truncated;
    if (truncated) return std::numeric_limits<double>::quiet_NaN();
    Mat jac(n, n);
    jac.col(0) = ray.v;
    if (n > 1) jac.rightCols(n - 1) = ray.jacobi;
    const double rho = family.rho(Point(family.chart, ray.x), theta);
    const Mat gbar = g.eval(mode.x, theta);
    const Mat xi = frame * sphere_tangents(n, q);
    const double kappa_det = n > 1 ? (xi.transpose() * gbar * xi).determinant() : 1.0;
    const double gauss = std::pow(2 * kPi, -0.5 * n) * std::exp(-0.5 * ell * ell) * std::pow(ell, n - 1) *
                         std::sqrt(kappa_det);
    return rho * std::abs(jac.determinant()) / gauss;
}

} // namespace

AsymptoticRatio asymptotic_ratio(const DensityFamily& family, const MetricField& g, const Point& mode, double ell,
                                 const Vec& q, const ControlParams& theta, double Z) {
    const int n = g.dim;
    if (n < 2 || n > 3) throw DimensionError("asymptotic_ratio: n must be 2 or 3");
    if (!(ell >= 0.0)) throw DomainError("asymptotic_ratio: l must be non-negative");
    AsymptoticRatio r;
    const Mat gbar = g.at(mode, theta);
    const SphericalFrame frame = spherical_frame(gbar, q);
    r.F = spherical_function(curvature_at(g, mode, theta), frame);
    r.predicted = (1.0 - ell * ell * r.F / 24.0) / Z;
    if (ell == 0.0)  // limit of the polar Jacobian: the weight at the mode
        r.measured = family.rho(mode, theta) * std::pow(2 * kPi, 0.5 * n) / std::sqrt(gbar.determinant());
    else
        r.measured = measured_ratio(family, g, mode, orthonormal_frame(gbar), ell, q, theta, r.truncated);
    return r;
}

double fitted_quadratic_coefficient(const DensityFamily& family, const MetricField& g, const Point& mode,
                                    const Vec& q, const ControlParams& theta, double l0, double l1, int nodes) {
    if (nodes < 4) throw DomainError("fitted_quadratic_coefficient: need at least four nodes");
    const Mat frame = orthonormal_frame(g.at(mode, theta));
    Mat a(nodes, 3);
    Vec b(nodes);
    for (int i = 0; i < nodes; ++i) {
        const double l = l0 + (l1 - l0) * i / (nodes - 1);
        bool trunc = false;
        const double m = measured_ratio(family, g, mode, frame, l, q, theta, trunc);
        if (trunc) throw GeometryError("fitted_quadratic_coefficient: geodesic truncated");
        a(i, 0) = 1.0;
        a(i, 1) = l * l;
        a(i, 2) = l * l * l * l;
        b(i) = std::log(m);
    }
    const Vec c = a.colPivHouseholderQr().solve(b);
    return c(1);
}

double spherical_curvature_scalar(const CurvatureValue& curv, const Vec& v, const Mat& tau) {
    const int n = curv.dim();
    const int m = static_cast<int>(tau.cols());
    const Mat gab = tau.transpose() * curv.metric * tau;
    Eigen::LLT<Mat> llt(gab);
    if (llt.info() != Eigen::Success) throw GeometryError("spherical_curvature_scalar: degenerate projected metric");
    const Mat ginv = llt.solve(Mat::Identity(m, m));
    std::vector<Mat> X;
    for (int a = 0; a < m; ++a) X.push_back(v * tau.col(a).transpose() - tau.col(a) * v.transpose());
    double pi = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double c = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l)
                            c += curv.riemann(i, j, k, l) * X[static_cast<std::size_t>(a)](i, j) *
                                 X[static_cast<std::size_t>(b)](k, l);
            pi += ginv(a, b) * c;
        }
    return pi;
}

double spherical_curvature_scalar(const MetricField& g, const Point& mode, double ell, const Vec& q,
                                  const ControlParams& theta) {
    const int n = g.dim;
    if (n < 2 || n > 3) throw DimensionError("spherical_curvature_scalar: n must be 2 or 3");
    const Mat frame = orthonormal_frame(g.at(mode, theta));
    const FanRay ray = shoot_fan_ray(g, mode, frame, q, ell, theta);
    if (ray.truncated) throw GeometryError("spherical_curvature_scalar: geodesic truncated");
    const CurvatureValue curv = curvature_at(g, Point(g.chart, ray.x), theta);
    return spherical_curvature_scalar(curv, ray.v, ray.jacobi);
}

} // namespace fgeo
