#pragma once

#include "fgeo/geodesics.hpp"

#include <array>
#include <vector>

namespace fgeo {

struct SphericalFrame {
    int n = 0;
    Vec q;
    Vec e;               // unit direction at the basepoint
    Mat xi;              // n x (n-1), xi_alpha = de/dq^alpha
    Mat kappa;           // (n-1) x (n-1)
    std::vector<Mat> S;  // S[alpha](i, j) = e^i xi^j_alpha - e^j xi^i_alpha

    // G^ijkl = kappa^ab S^ij_a S^kl_b
    double anisotropic(int i, int j, int k, int l) const;
};

// Frame at a basepoint with metric gbar, built on E = gbar^(-1/2) so that the
// parameterization is the Euclidean one in orthonormal components.
SphericalFrame spherical_frame(const Mat& gbar, const Vec& q);

// F(q) = R_ijkl kappa^ab S^ij_a S^kl_b, n in {2, 3}.
double spherical_function(const CurvatureValue& curv, const SphericalFrame& frame);

// n = 3 only: the six independent G^ijkl in the order
// 1212, 2323, 3131, 1223, 2331, 3112.
std::array<double, 6> anisotropic_functions(const SphericalFrame& frame);

// The same six functions written in closed form for an orthonormal basepoint.
std::array<double, 6> anisotropic_table(const Vec& q);

// n = 3: F from the six independent components. Diagonal pairs enter with
// multiplicity 4 and mixed pairs with multiplicity 8.
double spherical_function_expanded(const CurvatureValue& curv, const SphericalFrame& frame);

struct AsymptoticRatio {
    double predicted = 0.0;  // Z^-1 (1 - l^2 F / 24)
    double measured = 0.0;   // dp / dp_G from exact densities along the geodesic
    double F = 0.0;
    bool truncated = false;
};

AsymptoticRatio asymptotic_ratio(const DensityFamily& family, const MetricField& g, const Point& mode, double ell,
                                 const Vec& q, const ControlParams& theta, double Z);

// Least-squares fit log(measured ratio) = a + b l^2 + c l^4 over [l0, l1]; returns b.
double fitted_quadratic_coefficient(const DensityFamily& family, const MetricField& g, const Point& mode,
                                    const Vec& q, const ControlParams& theta, double l0 = 0.05, double l1 = 0.4,
                                    int nodes = 16);

// Pi = g^ab R_ijkl X^ij_a X^kl_b with the radial unit vector v and sphere tangents tau.
double spherical_curvature_scalar(const CurvatureValue& curv, const Vec& v, const Mat& tau);

// Same, at the point reached from the mode at (l, q).
double spherical_curvature_scalar(const MetricField& g, const Point& mode, double ell, const Vec& q,
                                  const ControlParams& theta);

} // namespace fgeo
