#pragma once

#include <vector>

namespace fgeo {

double erf(double x);
double erfc(double x);
// Scaled complement exp(x^2) erfc(x), finite for large x.
double erfcx(double x);
double erfinv(double y);
// Inverse of erfc on (0, 2); accurate deep in the tails.
double erfcinv(double z);

double normal_pdf(double x);
double normal_cdf(double x);
double normal_sf(double x);
double normal_quantile(double p);

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

// Asymptotic Kolmogorov distribution tail P(K > t).
double kolmogorov_sf(double t);

struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Nodes and weights on [-1, 1].
GaussLegendre gauss_legendre(int n);

} // namespace fgeo
