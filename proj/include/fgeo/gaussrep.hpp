#pragma once

#include "fgeo/geodesics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fgeo {

// omega = rho (2 pi)^(n/2) |g|^(-1/2)
double probability_weight(const DensityFamily& family, const MetricField& g, const Point& x, const ControlParams& theta);
double log_probability_weight(const DensityFamily& family, const MetricField& g, const Point& x,
                              const ControlParams& theta);

struct PotentialValue {
    double S = 0.0;          // k log omega; -inf when omega underflows
    bool underflow = false;
};

PotentialValue information_potential(const DensityFamily& family, const MetricField& g, const Point& x,
                                     const ControlParams& theta);

struct ModeResult {
    Point mode;
    double S_at_mode = 0.0;     // k = 1 units
    double gradient_norm = 0.0;
    int iterations = 0;
    Mat hessian;                // of S at the mode
};

// Default starts: support center plus 2n axis-perturbed points.
std::vector<Point> default_mode_starts(const DensityFamily& family);

ModeResult find_mode(const DensityFamily& family, const MetricField& g, const ControlParams& theta,
                     const std::vector<Point>& starts = {});

enum class PartitionMethod { RadialQuadrature, Analytic };

const char* to_string(PartitionMethod m);

struct PartitionOptions {
    PartitionMethod method = PartitionMethod::RadialQuadrature;
    std::function<double(const ControlParams&)> closed_form;  // required for Analytic
    int directions = 0;     // 0: grid defaults
    double ell_max = 0.0;   // 0: max(12, 6 sqrt(n))
    double tolerance = 1e-11;
};

struct PartitionResult {
    double Z = 1.0;
    double P = 0.0;       // -k log Z
    double error = 0.0;
    PartitionMethod method = PartitionMethod::RadialQuadrature;
};

PartitionResult gaussian_partition(const DensityFamily& family, const MetricField& g, const Point& mode,
                                   const ControlParams& theta, const PartitionOptions& opts = {});

struct CurvatureRadius {
    double ell_c = kInf;
    bool gaussian_ok = true;  // ell_c > 10
    bool marginal = false;    // ell_c in [1, 10]
    int curvature_sign = 0;
};

CurvatureRadius curvature_radius(const CurvatureValue& curv_at_mode);

struct EntropyValues {
    double differential = 0.0;  // -int rho log rho dx, chart dependent
    double invariant = 0.0;     // -int omega log omega dmu
    double error = 0.0;
};

// Adaptive quadrature over the family's support box, n <= 2.
EntropyValues entropies(const DensityFamily& family, const MetricField& g, const ControlParams& theta,
                        const QuadOptions& opts = {});

} // namespace fgeo
