#pragma once

#include "fgeo/geometry.hpp"
#include "fgeo/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fgeo {

// One coordinate representation of a family.
struct ChartView {
    std::string name;
    DensityFamily density;
    MetricField metric;
};

struct ClosedForms {
    std::function<double(const ControlParams&)> Z;
    std::function<Point(const ControlParams&)> mode;
    // Scalar curvature and separation distance from the mode, in the primary chart.
    std::function<double(const Point&, const ControlParams&)> R;
    std::function<double(const Point&, const ControlParams&)> ell;
    // Known residual of the covariant equation for metrics that do not solve it exactly.
    std::function<Mat(const Point&, const ControlParams&)> residual;
    // 1-D families: inverse CDF.
    std::function<double(double, const ControlParams&)> quantile;
};

using Sampler = std::function<SampleBatch(const ControlParams&, std::size_t, std::uint64_t)>;

struct GateResult {
    bool passed = false;
    double max_residual = 0.0;         // max |r_ij| over probes
    double max_declared_gap = 0.0;     // max |r_ij - declared| when a residual is declared
    int probes = 0;
    std::string note;
};

struct FamilySpec {
    std::string id;
    int dim = 0;
    ControlParams theta;
    std::vector<ChartView> charts;            // charts[0] is the primary chart
    std::vector<CoordinateChange> changes;    // from the primary chart unless noted by `from`
    Sampler sampler;
    ClosedForms closed;
    std::vector<Point> probes;                // gate probes in the primary chart
    GateResult gate;

    const ChartView& primary() const { return charts.front(); }
    const DensityFamily& density() const { return charts.front().density; }
    const MetricField& metric() const { return charts.front().metric; }
    const ChartView& chart(const std::string& name) const;
    const CoordinateChange& change(const std::string& from, const std::string& to) const;
};

const std::vector<std::string>& builtin_family_ids();

// Built-in families with their parameter layouts:
//   gaussian-nd  [mu_1..mu_n, sigma upper triangle row-major]  (sigma is the metric, i.e. the precision)
//   axial-2d     [theta]
//   cauchy-1d    [nu, gamma]
//   xy-coupled   []
// The residual gate runs before the spec is returned.
FamilySpec builtin_family(const std::string& id, const ControlParams& theta);

// Gaussian-nd parameters from a mean and a precision matrix.
ControlParams gaussian_params(const Vec& mu, const Mat& sigma, double k = 1.0);
void gaussian_unpack(const ControlParams& theta, Vec& mu, Mat& sigma);

// Closed form Z(theta) of axial-2d, overflow-free for large theta.
double axial_partition(double theta);

// Runs the metric_residual gate on the family's probes.
GateResult run_family_gate(const FamilySpec& spec, double tol = 1e-5);

// Throws ConsistencyError unless the gate passed.
void require_gate(const FamilySpec& spec);

// Family declared through field expressions: a density (not log) over a box,
// with either a metric matrix of expressions or the 1-D solver over `grid`.
struct ExpressionFamilyConfig {
    std::string id = "custom";
    int dim = 1;
    int nparams = 0;
    std::string density;
    std::vector<std::string> metric;  // row-major n*n, empty to solve in 1-D
    Vec lower;
    Vec upper;
    std::vector<double> grid;         // for the 1-D solver
};

FamilySpec expression_family(const ExpressionFamilyConfig& cfg, const ControlParams& theta);

} // namespace fgeo
