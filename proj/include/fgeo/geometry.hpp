#pragma once

#include "fgeo/charts.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fgeo {

enum class Provenance { Analytic, Transported, Solved };

const char* to_string(Provenance p);

using MatFn = std::function<Mat(const Vec&, const ControlParams&)>;
using MatListFn = std::function<std::vector<Mat>(const Vec&, const ControlParams&)>;

struct MetricField {
    int dim = 0;
    std::string chart;
    MatFn eval;
    MatListFn d1;  // optional: d1[k] = dg/dx^k
    MatListFn d2;  // optional: d2[k * n + l] = d^2 g / dx^k dx^l
    Provenance provenance = Provenance::Analytic;
    Support support;

    Mat at(const Point& x, const ControlParams& theta) const;
};

// Metric transported from another chart through `change` (to -> from pulled back):
// g_to(xc) = J^-T g_from(x) J^-1, x = change.inverse(xc).
MetricField transport_metric(const MetricField& g, const CoordinateChange& change);

// Constant metric on a whole chart.
MetricField constant_metric(const std::string& chart, const Mat& g);

struct ConnectionValue {
    int n = 0;
    std::vector<Mat> gamma;  // gamma[k](i, j) = Gamma^k_ij

    double operator()(int k, int i, int j) const { return gamma[static_cast<std::size_t>(k)](i, j); }
};

// Dense rank-4 array.
class Rank4 {
public:
    Rank4() = default;
    explicit Rank4(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

    int n() const { return n_; }
    double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
    double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }
    double max_abs() const;

private:
    std::size_t index(int i, int j, int k, int l) const {
        return ((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l;
    }
    int n_ = 0;
    std::vector<double> data_;
};

struct CurvatureValue {
    Rank4 riemann;  // R_ijkl, R_1212 = K |g| > 0 on the round sphere
    Mat ricci;
    double scalar = 0.0;
    Mat metric;     // g_ij at the evaluation point

    int dim() const { return riemann.n(); }
};

// Inverse of a symmetric positive-definite matrix; GeometryError otherwise.
Mat spd_inverse(const Mat& g);
void require_positive_definite(const Mat& g, const char* where);

std::vector<Mat> metric_first_derivatives(const MetricField& g, const Point& x, const ControlParams& theta);
std::vector<Mat> metric_second_derivatives(const MetricField& g, const Point& x, const ControlParams& theta);

ConnectionValue christoffel_from(const Mat& g, const std::vector<Mat>& d1);
ConnectionValue christoffel_at(const MetricField& g, const Point& x, const ControlParams& theta);

// dGamma[m] holds d Gamma / dx^m.
std::vector<ConnectionValue> christoffel_derivatives_at(const MetricField& g, const Point& x,
                                                        const ControlParams& theta);

// Curvature from the metric and its first and second derivatives at a point.
CurvatureValue curvature_from(const Mat& g, const std::vector<Mat>& d1, const std::vector<Mat>& d2);
CurvatureValue curvature_at(const MetricField& g, const Point& x, const ControlParams& theta);

// Second-derivative-only curvature, valid where the chart is normal (first
// derivatives of g vanish).
CurvatureValue normal_coordinate_curvature(const MetricField& g, const Point& x, const ControlParams& theta);

// Ricci and scalar contractions of a given R_ijkl with metric g.
void contract_curvature(CurvatureValue& c);

// r_ij of the defining covariant equation; zero for a metric that solves it.
Mat metric_residual(const DensityFamily& family, const MetricField& g, const Point& x, const ControlParams& theta);

// max_{ijk} |D_k g_ij|.
double metric_compatibility_defect(const MetricField& g, const Point& x, const ControlParams& theta);

struct SymmetryReport {
    double antisym_first = 0.0;   // |R_ijkl + R_jikl|
    double antisym_second = 0.0;  // |R_ijkl + R_ijlk|
    double pair_symmetry = 0.0;   // |R_ijkl - R_klij|
    double bianchi = 0.0;         // |R_ijkl + R_iklj + R_iljk|
    double scale = 0.0;           // max |R_ijkl|

    double worst() const;
};

SymmetryReport curvature_symmetries(const CurvatureValue& c);

// ---- one-dimensional metric solver ----------------------------------------

struct Solve1DOptions {
    double damping = 0.5;
    double clip = 1e-12;
    double residual_tol = 1e-6;
    double step_tol = 1e-10;
    int max_iterations = 500;
};

struct Solve1DReport {
    int iterations = 0;
    double final_step = 0.0;
    double max_residual = 0.0;
    double median = 0.0;
    std::vector<double> grid;
    std::vector<double> metric;
    std::vector<double> arc;  // signed distance from the median
};

MetricField solve_metric_1d(const DensityFamily& family, const ControlParams& theta, const std::vector<double>& grid,
                            const Solve1DOptions& opts = {}, Solve1DReport* report = nullptr);

} // namespace fgeo
