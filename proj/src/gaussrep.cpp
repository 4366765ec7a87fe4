#include "fgeo/gaussrep.hpp"

#include <cmath>

namespace fgeo {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

double log_det_spd(const Mat& g) {
    Eigen::LLT<Mat> llt(g);
    if (!g.allFinite() || llt.info() != Eigen::Success) throw GeometryError("metric is not positive definite");
    const Mat& l = llt.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
    return 2.0 * s;
}
} // namespace

double log_probability_weight(const DensityFamily& family, const MetricField& g, const Point& x,
                              const ControlParams& theta) {
    const double lr = family.log_rho(x, theta);
    return lr + 0.5 * family.dim * kLog2Pi - 0.5 * log_det_spd(g.at(x, theta));
}

double probability_weight(const DensityFamily& family, const MetricField& g, const Point& x,
                          const ControlParams& theta) {
    return std::exp(log_probability_weight(family, g, x, theta));
}

PotentialValue information_potential(const DensityFamily& family, const MetricField& g, const Point& x,
                                     const ControlParams& theta) {
    const double lw = log_probability_weight(family, g, x, theta);
    PotentialValue p;
    if (!std::isfinite(lw)) {
        p.S = -kInf;
        p.underflow = true;
        return p;
    }
    p.S = theta.k * lw;
    return p;
}

std::vector<Point> default_mode_starts(const DensityFamily& family) {
    const int n = family.dim;
    Vec c(n);
    Vec w(n);
    for (int i = 0; i < n; ++i) {
        const double lo = family.support.lower(i), hi = family.support.upper(i);
        if (std::isfinite(lo) && std::isfinite(hi)) {
            c(i) = 0.5 * (lo + hi);
            w(i) = 0.1 * (hi - lo);
        } else if (std::isfinite(lo)) {
            c(i) = lo + 1.0;
            w(i) = 0.5;
        } else if (std::isfinite(hi)) {
            c(i) = hi - 1.0;
            w(i) = 0.5;
        } else {
            c(i) = 0.0;
            w(i) = 0.5;
        }
    }
    std::vector<Point> starts{Point(family.chart, c)};
    for (int i = 0; i < n; ++i)
        for (double sgn : {-1.0, 1.0}) {
            Vec y = c;
            y(i) += sgn * w(i);
            if (family.support.contains(y)) starts.emplace_back(family.chart, y);
        }
    return starts;
}

namespace {

Vec grad_S(const DensityFamily& f, const MetricField& g, const Vec& x, const ControlParams& th) {
    return -entropy_gradient(f, g, Point(f.chart, x), th).psi;
}

Mat hess_S(const DensityFamily& f, const MetricField& g, const Vec& x, const ControlParams& th) {
    const int n = f.dim;
    Mat h(n, n);
    auto gs = [&](const Vec& y) { return grad_S(f, g, y, th); };
    for (int k = 0; k < n; ++k) h.col(k) = diff1(gs, x, k, first_step(x(k)) * 10.0, &f.support);
    return 0.5 * (h + h.transpose());
}

double S_unit(const DensityFamily& f, const MetricField& g, const Vec& x, const ControlParams& th) {
    if (!f.support.contains(x)) return -kInf;
    try {
        return log_probability_weight(f, g, Point(f.chart, x), th);
    } catch (const Error&) {
        return -kInf;
    }
}

struct LocalMode {
    bool ok = false;
    Vec x;
    double S = -kInf;
    double gnorm = kInf;
    int iterations = 0;
};

LocalMode newton_ascent(const DensityFamily& f, const MetricField& g, Vec x, const ControlParams& th) {
    LocalMode out;
    double s = S_unit(f, g, x, th);
    for (int it = 0; it < 200; ++it) {
        out.iterations = it + 1;
        Vec gr;
        try {
            gr = grad_S(f, g, x, th);
        } catch (const Error&) {
            return out;
        }
        const double gn = gr.norm();
        if (gn <= 1e-10) {
            out = {true, x, s, gn, it + 1};
            return out;
        }
        Mat h;
        try {
            h = hess_S(f, g, x, th);
        } catch (const Error&) {
            return out;
        }
        // Newton step on the negative-definite projection of the Hessian.
        Eigen::SelfAdjointEigenSolver<Mat> es(h);
        Vec lam = es.eigenvalues();
        for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = -std::max(std::abs(lam(i)), 1e-8);
        const Mat v = es.eigenvectors();
        const Vec dx = -(v * (v.transpose() * gr).cwiseQuotient(lam));
        // Close to the maximum the change in S drops below rounding, so the
        // full step is judged by the gradient instead.
        if (gn < 1e-5) {
            const Vec xt = x + dx;
            if (f.support.contains(xt)) {
                try {
                    if (grad_S(f, g, xt, th).norm() < 0.5 * gn) {
                        x = xt;
                        s = S_unit(f, g, x, th);
                        continue;
                    }
                } catch (const Error&) {
                }
            }
        }
        double t = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            const Vec xt = x + t * dx;
            const double st = S_unit(f, g, xt, th);
            if (st >= s + 1e-4 * t * gr.dot(dx) || (t * dx.norm() < 1e-14 * (1 + x.norm()) && st >= s)) {
                x = xt;
                s = st;
                moved = true;
                break;
            }
        }
        if (!moved) {
            out = {gn <= 1e-8, x, s, gn, it + 1};
            return out;
        }
    }
    Vec gr = grad_S(f, g, x, th);
    out = {gr.norm() <= 1e-8, x, s, gr.norm(), 200};
    return out;
}

} // namespace

ModeResult find_mode(const DensityFamily& family, const MetricField& g, const ControlParams& theta,
                     const std::vector<Point>& starts_in) {
    const std::vector<Point> starts = starts_in.empty() ? default_mode_starts(family) : starts_in;
    std::vector<LocalMode> found;
    int total = 0;
    for (const Point& p : starts) {
        require_chart(p, family.chart);
        if (!family.support.contains(p.x)) continue;
        LocalMode m = newton_ascent(family, g, p.x, theta);
        total += m.iterations;
        if (m.ok) found.push_back(m);
    }
    if (found.empty()) throw OptimizationError("find_mode: no start converged");
    const LocalMode* best = &found.front();
    for (const auto& m : found)
        if (m.S > best->S) best = &m;
    for (const auto& m : found)
        if ((m.x - best->x).norm() > 1e-8 * (1.0 + best->x.norm()))
            throw OptimizationError("find_mode: starts converged to distinct maxima");
    ModeResult r;
    r.mode = Point(family.chart, best->x);
    r.S_at_mode = best->S;
    r.gradient_norm = best->gnorm;
    r.iterations = total;
    r.hessian = hess_S(family, g, best->x, theta);
    Eigen::SelfAdjointEigenSolver<Mat> es(r.hessian);
    if (es.eigenvalues().maxCoeff() >= 0.0) throw OptimizationError("find_mode: Hessian of S is not negative definite");
    return r;
}

const char* to_string(PartitionMethod m) {
    return m == PartitionMethod::Analytic ? "analytic" : "radial-quadrature";
}

PartitionResult gaussian_partition(const DensityFamily& family, const MetricField& g, const Point& mode,
                                   const ControlParams& theta, const PartitionOptions& opts) {
    PartitionResult res;
    res.method = opts.method;
    if (opts.method == PartitionMethod::Analytic) {
        if (!opts.closed_form) throw UnsupportedError("gaussian_partition: family declares no closed form");
        res.Z = opts.closed_form(theta);
        res.P = -theta.k * std::log(res.Z);
        return res;
    }
    const int n = g.dim;
    if (n < 1 || n > 3) throw DimensionError("gaussian_partition: radial quadrature needs n <= 3");
    if (family.dim != n) throw DimensionError("gaussian_partition: family and metric dimensions differ");
    const double ell_max = opts.ell_max > 0 ? opts.ell_max : std::max(12.0, 6.0 * std::sqrt(double(n)));
    const Mat frame = orthonormal_frame(g.at(mode, theta));
    const DirectionGrid grid =
        n == 3 && opts.directions > 0 ? direction_grid(3, opts.directions, 2 * opts.directions)
                                      : direction_grid(n, opts.directions);
    OdeOptions ode;
    ode.atol = opts.tolerance;
    ode.rtol = opts.tolerance;
    struct Part {
        double integral;
        double edge;
    };
    const std::vector<Part> parts = parallel_map<Part>(grid.q.size(), [&](std::size_t i) {
        const FanRay ray = shoot_fan_ray(g, mode, frame, grid.q[i], ell_max, theta, ode);
        if (ray.truncated)
            throw IntegrationError("gaussian_partition: fan geodesic truncated at l = " + std::to_string(ray.s), kInf);
        double edge = 1.0;
        if (n > 1) {
            const Mat gx = g.eval(ray.x, theta);
            edge = std::sqrt(std::max(0.0, (ray.jacobi.transpose() * gx * ray.jacobi).determinant()));
        }
        return Part{grid.weight[i] * ray.area_integral, grid.weight[i] * edge};
    });
    std::vector<double> ints, edges;
    for (const auto& p : parts) {
        ints.push_back(p.integral);
        edges.push_back(p.edge);
    }
    const double norm = std::pow(2 * kPi, -0.5 * n);
    const double z = norm * pairwise_sum(ints);
    // Gaussian tail beyond ell_max with the sphere area growing like l^(n-1).
    const double edge = norm * pairwise_sum(edges);
    const double tail = edge * std::exp(-0.5 * ell_max * ell_max) * (1.0 / ell_max + (n - 1) / std::pow(ell_max, 3));
    if (!(z > 0.0) || !std::isfinite(z)) throw IntegrationError("gaussian_partition: non-positive result", tail);
    res.Z = z + tail;
    res.error = tail + std::abs(z) * 10.0 * opts.tolerance;
    res.P = -theta.k * std::log(res.Z);
    return res;
}

CurvatureRadius curvature_radius(const CurvatureValue& curv) {
    CurvatureRadius r;
    const double R = curv.scalar;
    r.curvature_sign = R > 0 ? 1 : (R < 0 ? -1 : 0);
    if (R > 0) {
        r.ell_c = 1.0 / std::sqrt(R);
        r.gaussian_ok = r.ell_c > 10.0;
        r.marginal = r.ell_c >= 1.0 && r.ell_c <= 10.0;
    }
    return r;
}

EntropyValues entropies(const DensityFamily& family, const MetricField& g, const ControlParams& theta,
                        const QuadOptions& opts) {
    const int n = family.dim;
    if (n < 1 || n > 2) throw DimensionError("entropies: quadrature only for n <= 2");
    const double half_log = 0.5 * n * kLog2Pi;
    auto pieces = [&](const Vec& x, double& diff, double& inv) {
        diff = inv = 0.0;
        if (!family.support.contains(x)) return;
        const double lr = family.log_density(x, theta);
        if (!std::isfinite(lr)) return;
        const double rho = std::exp(lr);
        if (rho == 0.0) return;
        const double lw = lr + half_log - 0.5 * log_det_spd(g.eval(x, theta));
        diff = -rho * lr;
        inv = -rho * lw;
    };
    EntropyValues out;
    const Support& s = family.support;
    if (n == 1) {
        auto fd = [&](double t) { double a, b; pieces(vec({t}), a, b); return a; };
        auto fi = [&](double t) { double a, b; pieces(vec({t}), a, b); return b; };
        const QuadResult a = integrate(fd, s.lower(0), s.upper(0), opts);
        const QuadResult b = integrate(fi, s.lower(0), s.upper(0), opts);
        if (!a.converged || !b.converged)
            throw IntegrationError("entropies: quadrature did not converge", std::max(a.error, b.error));
        out.differential = a.value;
        out.invariant = b.value;
        out.error = std::max(a.error, b.error);
        return out;
    }
    auto fd = [&](double u, double v) { double a, b; pieces(vec({u, v}), a, b); return a; };
    auto fi = [&](double u, double v) { double a, b; pieces(vec({u, v}), a, b); return b; };
    const QuadResult a = integrate_2d(fd, s.lower(0), s.upper(0), s.lower(1), s.upper(1), opts);
    const QuadResult b = integrate_2d(fi, s.lower(0), s.upper(0), s.lower(1), s.upper(1), opts);
    if (!a.converged || !b.converged)
        throw IntegrationError("entropies: quadrature did not converge", std::max(a.error, b.error));
    out.differential = a.value;
    out.invariant = b.value;
    out.error = std::max(a.error, b.error);
    return out;
}

} // namespace fgeo
