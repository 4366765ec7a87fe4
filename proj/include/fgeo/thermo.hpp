#pragma once

#include "fgeo/gaussrep.hpp"

#include <functional>

namespace fgeo {

// Entropies and potentials carry k; the metric in thermo units is k g_unit.
struct ThermoState {
    Point xbar;
    double S_eq = 0.0;      // k log omega(xbar)
    double P_planck = 0.0;  // -k log Z
    ControlParams theta;
    double k = 1.0;
};

ThermoState thermo_state(const DensityFamily& family, const MetricField& g, const ControlParams& theta,
                         const PartitionOptions& opts = {});

// k^2 R(xbar) / 6
double closed_system_entropy_estimate(const CurvatureValue& curv_at_mode, double k);

struct LegendreResult {
    double P0 = 0.0;  // theta_i xbar^i - s(xbar)
    double P2 = 0.0;  // P0 + k^2 R(xbar) / 6
};

using ScalarField = std::function<double(const Vec&)>;

// StationarityError unless theta_lin = grad s at xbar within tol (1 + |theta_lin|).
LegendreResult legendre_with_correction(const Vec& theta_lin, const Point& xbar, const ScalarField& s_open,
                                        const CurvatureValue& curv_at_mode, double k, double tol = 1e-6);

// s = k log Omega - (k/2) log |g / 2 pi k|, with g the thermo-unit metric.
double open_system_entropy(const ScalarField& omega, const MetricField& g, const Point& x, const ControlParams& theta,
                           double k);

struct Applicability {
    double product = 0.0;  // n k R(xbar)
    bool applicable = true; // product < 1
};

Applicability gaussian_applicability(const CurvatureValue& curv_at_mode, int n, double k);

// g^R_ij = -d_i d_j S at the mode, S = k log rho.
Mat ruppeiner_tensor(const DensityFamily& family, const Point& xbar, const ControlParams& theta, double k);

// exp(-g^R dx dx / 2k) sqrt|g^R / 2 pi k|
double gaussian_approximation_density(const Mat& gR, const Point& xbar, const Vec& x, double k);

} // namespace fgeo
