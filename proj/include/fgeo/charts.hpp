#pragma once

#include "fgeo/core.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fgeo {

using ScalarFn = std::function<double(const Vec&, const ControlParams&)>;

// A probability density family rho(x|theta) in one chart, handled through log rho.
struct DensityFamily {
    std::string id;
    std::string chart;
    int dim = 0;
    ScalarFn log_density;
    Support support;
    std::function<Vec(const Vec&, const ControlParams&)> grad_log;  // optional
    std::function<Mat(const Vec&, const ControlParams&)> hess_log;  // optional

    double log_rho(const Point& x, const ControlParams& theta) const;
    double rho(const Point& x, const ControlParams& theta) const;
    Vec grad_log_rho(const Point& x, const ControlParams& theta) const;
    Mat hess_log_rho(const Point& x, const ControlParams& theta) const;
};

struct CoordinateChange {
    std::string from;
    std::string to;
    std::function<Vec(const Vec&)> forward;
    std::function<Vec(const Vec&)> inverse;
    std::function<Mat(const Vec&)> jacobian;  // optional: d(to)/d(from) at a `from` point
    Support domain;                           // support of the `from` chart
    Support codomain;                         // support of the `to` chart

    Point apply(const Point& x) const;
    Point unapply(const Point& xc) const;
    CoordinateChange inverted() const;
    // Analytic Jacobian if present, numeric otherwise.
    Mat jacobian_at(const Point& x) const;
};

CoordinateChange identity_change(const std::string& chart, int n);
CoordinateChange linear_change(const std::string& from, const std::string& to, const Mat& a, const Vec& b);
CoordinateChange compose(const CoordinateChange& first, const CoordinateChange& second);

// Central-difference Jacobian d(to)/d(from) with h_i = max(1e-6, 1e-6 |x_i|).
Mat numeric_jacobian(const CoordinateChange& change, const Point& x);

// Tensor of covariant rank p, contravariant rank q and weight W. Components are
// stored row-major with the p covariant indices first.
struct TensorValue {
    int n = 0;
    int p = 0;
    int q = 0;
    int weight = 0;
    std::vector<double> components;

    TensorValue() = default;
    TensorValue(int n_, int p_, int q_, int w_);

    static TensorValue scalar(double v, int weight = 0);
    static TensorValue covariant2(const Mat& m, int weight = 0);
    static TensorValue contravariant1(const Vec& v, int weight = 0);
    static TensorValue covariant1(const Vec& v, int weight = 0);

    int rank() const { return p + q; }
    std::size_t size() const { return components.size(); }
    double& at(const std::vector<int>& idx);
    double at(const std::vector<int>& idx) const;
    Mat matrix() const;  // rank-2 view
    Vec vector() const;  // rank-1 view
    void symmetrize();   // rank-2 covariant or contravariant
};

// Transforms components at the `from`-chart point x into the `to` chart:
// p factors of the inverse Jacobian, q of the Jacobian and |det J|^W.
TensorValue transform_tensor(const TensorValue& t, const CoordinateChange& change, const Point& x);

// rho in the `to` chart at xc: rho(x) |d(to)/d(from)|^(-1), x = inverse(xc).
double transform_density(const DensityFamily& family, const CoordinateChange& change, const Point& xc,
                         const ControlParams& theta);

// The density family expressed in the target chart of `change`.
DensityFamily pushforward_family(const DensityFamily& family, const CoordinateChange& change);

} // namespace fgeo
