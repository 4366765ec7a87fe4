#include "fgeo/thermo.hpp"

#include "fgeo/numerics.hpp"

#include <cmath>

namespace fgeo {

ThermoState thermo_state(const DensityFamily& family, const MetricField& g, const ControlParams& theta,
                         const PartitionOptions& opts) {
    ThermoState st;
    st.theta = theta;
    st.k = theta.k;
    st.xbar = find_mode(family, g, theta).mode;
    st.S_eq = information_potential(family, g, st.xbar, theta).S;
    st.P_planck = gaussian_partition(family, g, st.xbar, theta, opts).P;
    return st;
}

double closed_system_entropy_estimate(const CurvatureValue& curv, double k) { return k * k * curv.scalar / 6.0; }

LegendreResult legendre_with_correction(const Vec& theta_lin, const Point& xbar, const ScalarField& s_open,
                                        const CurvatureValue& curv, double k, double tol) {
    const int n = xbar.dim();
    if (theta_lin.size() != n) throw DimensionError("legendre_with_correction: theta and xbar differ in size");
    Vec grad(n);
    for (int i = 0; i < n; ++i) grad(i) = diff1_o4(s_open, xbar.x, i, first_step(xbar.x(i)));
    // First-order condition of max_x [-theta x + s(x)].
    if (!((grad - theta_lin).norm() <= tol * (1.0 + theta_lin.norm())))
        throw StationarityError("legendre_with_correction: xbar is not stationary (|grad s - theta| = " +
                                std::to_string((grad - theta_lin).norm()) + ")");
    LegendreResult r;
    r.P0 = theta_lin.dot(xbar.x) - s_open(xbar.x);
    r.P2 = r.P0 + closed_system_entropy_estimate(curv, k);
    return r;
}

double open_system_entropy(const ScalarField& omega, const MetricField& g, const Point& x, const ControlParams& theta,
                           double k) {
    const double om = omega(x.x);
    if (!(om > 0.0)) throw DomainError("open_system_entropy: density of states must be positive");
    const Mat gx = g.at(x, theta) / (2.0 * kPi * k);
    const double det = gx.determinant();
    if (!(det > 0.0)) throw GeometryError("open_system_entropy: metric is not positive definite");
    return k * std::log(om) - 0.5 * k * std::log(det);
}

Applicability gaussian_applicability(const CurvatureValue& curv, int n, double k) {
    Applicability a;
    a.product = n * k * curv.scalar;
    a.applicable = a.product < 1.0;
    return a;
}

Mat ruppeiner_tensor(const DensityFamily& family, const Point& xbar, const ControlParams& theta, double k) {
    Mat h = -k * family.hess_log_rho(xbar, theta);
    return 0.5 * (h + h.transpose());
}

double gaussian_approximation_density(const Mat& gR, const Point& xbar, const Vec& x, double k) {
    const Vec d = x - xbar.x;
    const double det = (gR / (2.0 * kPi * k)).determinant();
    if (!(det > 0.0)) throw GeometryError("gaussian_approximation_density: tensor is not positive definite");
    return std::exp(-0.5 * d.dot(gR * d) / k) * std::sqrt(det);
}

} // namespace fgeo
