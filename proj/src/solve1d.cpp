#include "fgeo/geometry.hpp"
#include "fgeo/numerics.hpp"
#include "fgeo/special.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace fgeo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// log Phi(l) and log(1 - Phi(l)), tail-safe.
double log_cdf(double l) { return std::log(0.5 * std::erfc(-l / std::sqrt(2.0))); }
double log_sf(double l) { return std::log(0.5 * std::erfc(l / std::sqrt(2.0))); }
double log_pdf(double l) { return -0.5 * l * l - 0.5 * kLog2Pi; }

// Cumulative mass on one side of x: `left` is P(X < x), otherwise P(X > x).
struct SideMass {
    bool left;
    double log_mass;
};

// One Newton step for l solving Phi(l) = F in log space on the smaller side.
double newton_step(double l, const SideMass& m) {
    if (m.left) {
        const double r = log_cdf(l) - m.log_mass;
        const double d = std::exp(log_pdf(l) - log_cdf(l));
        return -r / d;
    }
    const double r = log_sf(l) - m.log_mass;
    const double d = -std::exp(log_pdf(l) - log_sf(l));
    return -r / d;
}

struct SolvedData {
    DensityFamily family;
    ControlParams theta;
    std::vector<double> grid;
    std::vector<double> left;   // P(X < x_i)
    std::vector<double> right;  // P(X > x_i)
    std::vector<double> arc;
    double total = 1.0;
    double clip = 1e-12;
    QuadOptions quad;

    double rho(double x) const { return std::exp(family.log_density(vec({x}), theta)); }

    SideMass mass_at(double x) const {
        auto it = std::lower_bound(grid.begin(), grid.end(), x);
        std::size_t i = static_cast<std::size_t>(std::distance(grid.begin(), it));
        if (i == grid.size()) i = grid.size() - 1;
        if (i > 0 && std::abs(grid[i - 1] - x) < std::abs(grid[i] - x)) --i;
        auto f = [this](double t) { return rho(t); };
        const double piece = grid[i] == x ? 0.0 : integrate(f, grid[i], x, quad).value;
        const double l = left[i] + piece;
        const double r = right[i] - piece;
        if (l <= r) return {true, std::log(l / total)};
        return {false, std::log(r / total)};
    }

    double initial_arc(double x) const {
        if (x <= grid.front()) return arc.front();
        if (x >= grid.back()) return arc.back();
        auto it = std::upper_bound(grid.begin(), grid.end(), x);
        const std::size_t i = static_cast<std::size_t>(std::distance(grid.begin(), it));
        const double w = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
        return (1 - w) * arc[i - 1] + w * arc[i];
    }

    double arc_at(double x) const {
        const SideMass m = mass_at(x);
        double l = initial_arc(x);
        for (int it = 0; it < 60; ++it) {
            double step = std::clamp(newton_step(l, m), -1.0, 1.0);
            l += step;
            if (std::abs(step) <= 1e-14 * (1.0 + std::abs(l))) break;
        }
        return l;
    }

    // log g = log 2pi + 2 log rho + l^2, from rho dx = phi(l) dl.
    double metric_at(double x, double l) const {
        const double lg = kLog2Pi + 2.0 * family.log_density(vec({x}), theta) + l * l;
        return std::max(std::exp(lg), clip);
    }
};

} // namespace

MetricField solve_metric_1d(const DensityFamily& family, const ControlParams& theta, const std::vector<double>& grid,
                            const Solve1DOptions& opts, Solve1DReport* report) {
    if (family.dim != 1) throw DimensionError("solve_metric_1d: family must be one-dimensional");
    if (grid.size() < 3) throw DomainError("solve_metric_1d: grid needs at least three nodes");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!family.support.contains(vec({grid[i]}))) throw DomainError("solve_metric_1d: grid node outside support");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("solve_metric_1d: grid must be strictly increasing");
    }

    auto data = std::make_shared<SolvedData>();
    data->family = family;
    data->theta = theta;
    data->grid = grid;
    data->clip = opts.clip;
    data->quad.abs_tol = 1e-15;
    data->quad.rel_tol = 1e-13;
    auto f = [&](double t) { return data->rho(t); };
    const double lo = family.support.lower(0);
    const double hi = family.support.upper(0);
    const std::size_t m = grid.size();

    data->left.assign(m, 0.0);
    data->right.assign(m, 0.0);
    data->left[0] = integrate_or_throw(f, lo, grid[0], data->quad, "solve_metric_1d: lower tail");
    for (std::size_t i = 1; i < m; ++i)
        data->left[i] = data->left[i - 1] + integrate_or_throw(f, grid[i - 1], grid[i], data->quad, "solve_metric_1d");
    data->right[m - 1] = integrate_or_throw(f, grid[m - 1], hi, data->quad, "solve_metric_1d: upper tail");
    for (std::size_t i = m - 1; i-- > 0;)
        data->right[i] = data->right[i + 1] + integrate_or_throw(f, grid[i], grid[i + 1], data->quad, "solve_metric_1d");
    data->total = data->left[m - 1] + data->right[m - 1];
    if (!(data->total > 0.0) || !std::isfinite(data->total)) throw SolverError("solve_metric_1d: density has no mass", kInf);

    // Median by bisection on the bracketing cell.
    double median = grid[m / 2];
    {
        std::size_t j = 0;
        while (j + 1 < m && data->left[j + 1] < 0.5 * data->total) ++j;
        if (data->left[j] < 0.5 * data->total && j + 1 < m) {
            double a = grid[j], b = grid[j + 1];
            for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
                const double c = 0.5 * (a + b);
                const double mass = data->left[j] + integrate(f, grid[j], c, data->quad).value;
                (mass < 0.5 * data->total ? a : b) = c;
            }
            median = 0.5 * (a + b);
        } else {
            median = data->left[0] >= 0.5 * data->total ? grid[0] : grid[m - 1];
        }
    }

    std::vector<SideMass> masses(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double l = data->left[i], r = data->right[i];
        masses[i] = l <= r ? SideMass{true, std::log(l / data->total)} : SideMass{false, std::log(r / data->total)};
    }

    // Damped Newton on the arc-length values, flat start.
    std::vector<double> arc(m);
    for (std::size_t i = 0; i < m; ++i) arc[i] = std::clamp(grid[i] - median, -6.0, 6.0);
    int iterations = 0;
    double last = kInf;
    while (iterations < opts.max_iterations) {
        ++iterations;
        last = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double step = std::clamp(opts.damping * newton_step(arc[i], masses[i]), -1.0, 1.0);
            arc[i] += step;
            last = std::max(last, std::abs(step));
        }
        if (last <= opts.step_tol) break;
    }
    data->arc = arc;

    MetricField g;
    g.dim = 1;
    g.chart = family.chart;
    g.provenance = Provenance::Solved;
    g.support = family.support;
    g.eval = [data](const Vec& x, const ControlParams&) {
        Mat out(1, 1);
        out(0, 0) = data->metric_at(x(0), data->arc_at(x(0)));
        return out;
    };
    // Derivatives follow from dl/dx = sqrt(g) and log g = log 2pi + 2 log rho + l^2.
    auto fam = std::make_shared<DensityFamily>(family);
    auto jets = [data, fam](const Vec& x, const ControlParams& th, double& gv, double& d1, double& d2) {
        const double l = data->arc_at(x(0));
        gv = data->metric_at(x(0), l);
        const Point p(fam->chart, x);
        const double u = fam->grad_log_rho(p, th)(0);
        const double du = fam->hess_log_rho(p, th)(0, 0);
        const double s = std::sqrt(gv);
        const double lp = 2.0 * u + 2.0 * l * s;
        const double lpp = 2.0 * du + 2.0 * gv + l * s * lp;
        d1 = gv * lp;
        d2 = gv * (lp * lp + lpp);
    };
    g.d1 = [jets](const Vec& x, const ControlParams& th) {
        double gv, a, b;
        jets(x, th, gv, a, b);
        return std::vector<Mat>{Mat::Constant(1, 1, a)};
    };
    g.d2 = [jets](const Vec& x, const ControlParams& th) {
        double gv, a, b;
        jets(x, th, gv, a, b);
        return std::vector<Mat>{Mat::Constant(1, 1, b)};
    };

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const Point p(family.chart, vec({grid[i]}));
        worst = std::max(worst, metric_residual(family, g, p, theta).cwiseAbs().maxCoeff());
    }
    if (!(worst <= opts.residual_tol) || !(last <= opts.step_tol))
        throw SolverError("solve_metric_1d: no convergence after " + std::to_string(iterations) + " iterations",
                          std::isfinite(worst) ? std::max(worst, last) : kInf);

    if (report) {
        report->iterations = iterations;
        report->final_step = last;
        report->max_residual = worst;
        report->median = median;
        report->grid = grid;
        report->arc = arc;
        report->metric.resize(m);
        for (std::size_t i = 0; i < m; ++i) report->metric[i] = data->metric_at(grid[i], arc[i]);
    }
    return g;
}

} // namespace fgeo
