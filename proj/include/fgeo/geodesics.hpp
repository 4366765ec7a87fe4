#pragma once

#include "fgeo/geometry.hpp"
#include "fgeo/numerics.hpp"

#include <optional>
#include <vector>

namespace fgeo {

// Tangent vector of unit g-norm at a basepoint.
struct DirectionVector {
    Vec e;
};

// Normalizes v to unit length in the metric g.
DirectionVector unit_direction(const Mat& g, const Vec& v);

struct GeodesicNode {
    double s = 0.0;
    Vec x;
    Vec v;
};

struct GeodesicPath {
    Point base;
    Vec direction;
    std::vector<GeodesicNode> nodes;
    double length = 0.0;    // arc-length actually reached
    bool truncated = false;
    Vec exit_point;         // last interior state when truncated

    Point end() const { return Point(base.chart, nodes.back().x); }
};

struct GeodesicOptions {
    OdeOptions ode;
    bool record_nodes = true;
};

GeodesicPath shoot_geodesic(const MetricField& g, const Point& base, const DirectionVector& e, double length,
                            const ControlParams& theta, const GeodesicOptions& opts = {});

// Endpoint of the geodesic with initial velocity w (|w|_g = length). Throws
// BoundaryError when the path leaves the chart.
Vec exp_map(const MetricField& g, const Point& base, const Vec& w, const ControlParams& theta,
            const OdeOptions& opts = {});

struct ShootingOptions {
    double tol = 1e-10;
    int max_iterations = 60;
    int continuation_steps = 8;
};

struct SeparationResult {
    double distance = 0.0;
    Vec velocity;  // initial tangent vector w with exp(w) = x
    int iterations = 0;
    double residual = 0.0;
};

SeparationResult shoot_separation(const MetricField& g, const Point& x, const Point& base, const ControlParams& theta,
                                  const ShootingOptions& opts = {});

// Geodesic arc-length between x and the basepoint.
double separation_distance(const MetricField& g, const Point& x, const Point& base, const ControlParams& theta,
                           const ShootingOptions& opts = {});

struct EntropyGradient {
    Vec psi;           // psi_i = -dS/dx^i
    double psi2 = 0.0; // g^ij psi_i psi_j
};

EntropyGradient entropy_gradient(const DensityFamily& family, const MetricField& g, const Point& x,
                                 const ControlParams& theta);

// Flat sphere area with the (2 pi)^((n-1)/2) normalization giving Z = 1 on flat manifolds.
double flat_sphere_area(int n, double ell);

// Euclidean spherical parameterization u(q) and du/dq (columns), n in {2, 3}.
Vec sphere_point(int n, const Vec& q);
Mat sphere_tangents(int n, const Vec& q);

// Direction grid over q with quadrature weights.
struct DirectionGrid {
    int n = 0;
    std::vector<Vec> q;
    std::vector<double> weight;  // coordinate measure dq; the round measure adds cos q1 for n = 3
};

// n = 2: `m1` uniform nodes; n = 3: `m1` Gauss-Legendre nodes in q1 times `m2` uniform in q2.
DirectionGrid direction_grid(int n, int m1 = 0, int m2 = 0);

// Orthonormal frame E = gbar^(-1/2) at the basepoint.
Mat orthonormal_frame(const Mat& gbar);

// Geodesic with Jacobi fields J_alpha = dx/dq^alpha along it.
struct FanRay {
    Vec q;
    double s = 0.0;
    Vec x;
    Vec v;
    Mat jacobi;           // n x (n-1)
    double area_integral; // int_0^s exp(-t^2/2) sqrt(det(J^T g J)) dt
    bool truncated = false;
};

FanRay shoot_fan_ray(const MetricField& g, const Point& base, const Mat& frame, const Vec& q, double length,
                     const ControlParams& theta, const OdeOptions& opts = {});

struct SphereArea {
    double area = 0.0;   // normalized by (2 pi)^((n-1)/2)
    double flat = 0.0;   // flat_sphere_area(n, ell)
    int directions = 0;
};

// Area of the geodesic sphere of radius ell around the basepoint.
SphereArea geodesic_sphere_area(const MetricField& g, const Point& base, double ell, const ControlParams& theta,
                                int directions = 0);

} // namespace fgeo
