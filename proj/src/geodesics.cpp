#include "fgeo/geodesics.hpp"

#include "fgeo/special.hpp"

#include <cmath>

namespace fgeo {

DirectionVector unit_direction(const Mat& g, const Vec& v) {
    const double nrm2 = v.dot(g * v);
    if (!(nrm2 > 0.0) || !std::isfinite(nrm2)) throw DomainError("direction has zero or undefined length");
    return {v / std::sqrt(nrm2)};
}

namespace {

// Christoffel symbols at a raw coordinate vector; NaN outside the chart.
bool connection(const MetricField& g, const Vec& x, const ControlParams& theta, Mat& gx, ConnectionValue& gam) {
    if (!g.support.contains(x)) return false;
    try {
        const Point p(g.chart, x);
        gx = g.eval(x, theta);
        gam = christoffel_from(gx, metric_first_derivatives(g, p, theta));
    } catch (const BoundaryError&) {
        return false;
    } catch (const GeometryError&) {
        return false;
    } catch (const DomainError&) {
        return false;
    }
    return true;
}

Vec geodesic_accel(const ConnectionValue& gam, const Vec& v) {
    const int n = gam.n;
    Vec a(n);
    for (int k = 0; k < n; ++k) a(k) = -v.dot(gam.gamma[static_cast<std::size_t>(k)] * v);
    return a;
}

void renormalize(const MetricField& g, const ControlParams& theta, Eigen::Ref<Vec> x, Eigen::Ref<Vec> v) {
    if (!g.support.contains(x)) return;
    const Mat gx = g.eval(x, theta);
    const double nrm2 = v.dot(gx * v);
    if (nrm2 > 0.0 && std::isfinite(nrm2)) v /= std::sqrt(nrm2);
}

} // namespace

GeodesicPath shoot_geodesic(const MetricField& g, const Point& base, const DirectionVector& e, double length,
                            const ControlParams& theta, const GeodesicOptions& opts) {
    require_chart(base, g.chart);
    if (!(length >= 0.0)) throw DomainError("shoot_geodesic: length must be non-negative");
    if (!g.support.contains(base.x)) throw DomainError("shoot_geodesic: basepoint outside the chart");
    const int n = g.dim;
    const Mat g0 = g.eval(base.x, theta);
    const double speed2 = e.e.dot(g0 * e.e);
    if (std::abs(speed2 - 1.0) > 1e-10) throw DomainError("shoot_geodesic: direction is not g-unit");

    Vec y(2 * n);
    y << base.x, e.e;
    auto rhs = [&](double, const Vec& s, Vec& dy) {
        Mat gx;
        ConnectionValue gam;
        dy.resize(2 * n);
        if (!connection(g, s.head(n), theta, gx, gam)) {
            dy.setConstant(std::numeric_limits<double>::quiet_NaN());
            return;
        }
        dy.head(n) = s.tail(n);
        dy.tail(n) = geodesic_accel(gam, s.tail(n));
    };
    auto valid = [&](const Vec& s) { return g.support.contains(s.head(n)); };
    auto project = [&](Vec& s) { renormalize(g, theta, s.head(n), s.tail(n)); };

    GeodesicPath path;
    path.base = base;
    path.direction = e.e;
    auto observe = [&](double s, const Vec& st) {
        if (opts.record_nodes || s == 0.0) path.nodes.push_back({s, st.head(n), st.tail(n)});
    };
    const OdeResult r = integrate_ode(rhs, 0.0, length, y, opts.ode, valid, project, observe);
    if (!opts.record_nodes && (path.nodes.empty() || path.nodes.back().s != r.s))
        path.nodes.push_back({r.s, r.y.head(n), r.y.tail(n)});
    path.length = r.s;
    path.truncated = !r.completed;
    if (path.truncated) path.exit_point = r.y.head(n);
    return path;
}

Vec exp_map(const MetricField& g, const Point& base, const Vec& w, const ControlParams& theta,
            const OdeOptions& opts) {
    const Mat g0 = g.at(base, theta);
    const double len = std::sqrt(std::max(0.0, w.dot(g0 * w)));
    if (len == 0.0) return base.x;
    GeodesicOptions go;
    go.ode = opts;
    go.record_nodes = false;
    const GeodesicPath p = shoot_geodesic(g, base, {w / len}, len, theta, go);
    if (p.truncated) throw BoundaryError("exp_map: geodesic leaves the chart");
    return p.nodes.back().x;
}

namespace {

struct NewtonOutcome {
    bool ok = false;
    Vec w;
    double residual = kInf;
    int iterations = 0;
};

NewtonOutcome newton_shoot(const MetricField& g, const Point& base, const Vec& target, Vec w, const ControlParams& theta,
                           const ShootingOptions& so, const OdeOptions& ode) {
    const int n = g.dim;
    NewtonOutcome out;
    out.w = w;
    const double scale = 1.0 + target.norm();
    auto mismatch = [&](const Vec& ww, Vec& f) {
        try {
            f = exp_map(g, base, ww, theta, ode) - target;
            return f.allFinite();
        } catch (const BoundaryError&) {
            return false;
        } catch (const DomainError&) {
            return false;
        }
    };
    Vec f;
    if (!mismatch(w, f)) return out;
    out.residual = f.norm();
    for (int it = 0; it < so.max_iterations; ++it) {
        out.iterations = it + 1;
        if (out.residual <= so.tol * scale) {
            out.ok = true;
            return out;
        }
        Mat jac(n, n);
        const double h = 1e-6 * std::max(1.0, w.norm());
        bool jac_ok = true;
        for (int k = 0; k < n && jac_ok; ++k) {
            Vec wp = w, wm = w, fp, fm;
            wp(k) += h;
            wm(k) -= h;
            jac_ok = mismatch(wp, fp) && mismatch(wm, fm);
            if (jac_ok) jac.col(k) = (fp - fm) / (2 * h);
        }
        if (!jac_ok) return out;
        Eigen::FullPivLU<Mat> lu(jac);
        if (!lu.isInvertible()) return out;
        const Vec dw = lu.solve(-f);
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
            Vec wt = w + lambda * dw, ft;
            if (mismatch(wt, ft) && ft.norm() < out.residual) {
                w = wt;
                f = ft;
                out.residual = ft.norm();
                out.w = w;
                accepted = true;
                break;
            }
        }
        if (!accepted) return out;
    }
    out.ok = out.residual <= so.tol * scale;
    return out;
}

} // namespace

SeparationResult shoot_separation(const MetricField& g, const Point& x, const Point& base, const ControlParams& theta,
                                  const ShootingOptions& opts) {
    require_same_chart(x, base);
    require_chart(x, g.chart);
    if (!g.support.contains(x.x) || !g.support.contains(base.x))
        throw DomainError("separation_distance: points must be interior");
    SeparationResult res;
    res.velocity = Vec::Zero(g.dim);
    if ((x.x - base.x).norm() == 0.0) return res;

    OdeOptions ode;
    ode.atol = 1e-12;
    ode.rtol = 1e-12;
    const Mat g0 = g.eval(base.x, theta);

    // Flat chord as the first guess.
    NewtonOutcome best = newton_shoot(g, base, x.x, x.x - base.x, theta, opts, ode);
    int total = best.iterations;
    if (!best.ok) {
        // Continuation along the coordinate chord.
        Vec w = Vec::Zero(g.dim);
        bool ok = true;
        for (int step = 1; step <= opts.continuation_steps && ok; ++step) {
            const double t = static_cast<double>(step) / opts.continuation_steps;
            const Vec target = base.x + t * (x.x - base.x);
            if (!g.support.contains(target)) {
                ok = false;
                break;
            }
            Vec guess = step == 1 ? Vec(target - base.x) : Vec(w * t / (t - 1.0 / opts.continuation_steps));
            NewtonOutcome o = newton_shoot(g, base, target, guess, theta, opts, ode);
            total += o.iterations;
            ok = o.ok;
            if (ok) w = o.w;
            if (step == opts.continuation_steps) best = o.residual < best.residual ? o : best;
        }
        if (!ok || !best.ok) throw BvpError("separation_distance: shooting did not converge", best.residual);
    }
    res.velocity = best.w;
    res.distance = std::sqrt(best.w.dot(g0 * best.w));
    res.iterations = total;
    res.residual = best.residual;
    return res;
}

double separation_distance(const MetricField& g, const Point& x, const Point& base, const ControlParams& theta,
                           const ShootingOptions& opts) {
    return shoot_separation(g, x, base, theta, opts).distance;
}

EntropyGradient entropy_gradient(const DensityFamily& family, const MetricField& g, const Point& x,
                                 const ControlParams& theta) {
    require_chart(x, family.chart);
    require_chart(x, g.chart);
    if (!family.support.contains(x.x)) throw BoundaryError("entropy_gradient: point not interior");
    const int n = g.dim;
    const Mat gx = g.at(x, theta);
    const Mat ginv = spd_inverse(gx);
    const auto d1 = metric_first_derivatives(g, x, theta);
    const Vec u = family.grad_log_rho(x, theta);
    EntropyGradient out;
    out.psi.resize(n);
    for (int i = 0; i < n; ++i) {
        const double dlogdet = ginv.cwiseProduct(d1[static_cast<std::size_t>(i)]).sum();
        out.psi(i) = -(u(i) - 0.5 * dlogdet);
    }
    out.psi2 = out.psi.dot(ginv * out.psi);
    return out;
}

double flat_sphere_area(int n, double ell) {
    if (n < 1) throw DimensionError("flat_sphere_area: n must be positive");
    return std::pow(2.0, 0.5 * (3 - n)) * std::sqrt(kPi) * std::pow(ell, n - 1) / std::tgamma(0.5 * n);
}

Vec sphere_point(int n, const Vec& q) {
    if (n == 1) return vec({q(0) >= 0.0 ? 1.0 : -1.0});
    if (n == 2) return vec({std::cos(q(0)), std::sin(q(0))});
    if (n == 3)
        return vec({std::cos(q(0)) * std::cos(q(1)), std::cos(q(0)) * std::sin(q(1)), std::sin(q(0))});
    throw DimensionError("spherical parameterization only for n <= 3");
}

Mat sphere_tangents(int n, const Vec& q) {
    if (n == 1) return Mat::Zero(1, 0);
    if (n == 2) {
        Mat t(2, 1);
        t << -std::sin(q(0)), std::cos(q(0));
        return t;
    }
    if (n == 3) {
        const double c1 = std::cos(q(0)), s1 = std::sin(q(0)), c2 = std::cos(q(1)), s2 = std::sin(q(1));
        Mat t(3, 2);
        t << -s1 * c2, -c1 * s2,
             -s1 * s2, c1 * c2,
             c1, 0.0;
        return t;
    }
    throw DimensionError("spherical parameterization only for n <= 3");
}

DirectionGrid direction_grid(int n, int m1, int m2) {
    DirectionGrid d;
    d.n = n;
    if (n == 1) {
        d.q = {vec({1.0}), vec({-1.0})};
        d.weight = {1.0, 1.0};
    } else if (n == 2) {
        if (m1 <= 0) m1 = 256;
        for (int i = 0; i < m1; ++i) {
            d.q.push_back(vec({2 * kPi * i / m1}));
            d.weight.push_back(2 * kPi / m1);
        }
    } else if (n == 3) {
        if (m1 <= 0) m1 = 64;
        if (m2 <= 0) m2 = 128;
        const GaussLegendre gl = gauss_legendre(m1);
        for (int i = 0; i < m1; ++i)
            for (int j = 0; j < m2; ++j) {
                d.q.push_back(vec({0.5 * kPi * gl.nodes[static_cast<std::size_t>(i)], -kPi + 2 * kPi * j / m2}));
                d.weight.push_back(0.5 * kPi * gl.weights[static_cast<std::size_t>(i)] * 2 * kPi / m2);
            }
    } else {
        throw DimensionError("direction grids are built for n <= 3");
    }
    return d;
}

Mat orthonormal_frame(const Mat& gbar) {
    require_positive_definite(gbar, "orthonormal_frame");
    Eigen::SelfAdjointEigenSolver<Mat> es(gbar);
    return es.operatorInverseSqrt();
}

FanRay shoot_fan_ray(const MetricField& g, const Point& base, const Mat& frame, const Vec& q, double length,
                     const ControlParams& theta, const OdeOptions& opts) {
    require_chart(base, g.chart);
    const int n = g.dim;
    const int m = n - 1;
    // state: x (n), v (n), J (n*m), W (n*m), Q (1)
    const int sz = 2 * n + 2 * n * m + 1;
    Vec y = Vec::Zero(sz);
    y.head(n) = base.x;
    y.segment(n, n) = frame * sphere_point(n, q);
    if (m > 0) {
        const Mat xi = frame * sphere_tangents(n, q);
        for (int a = 0; a < m; ++a) y.segment(2 * n + n * m + a * n, n) = xi.col(a);
    }
    auto area_density = [&](const Mat& gx, const Vec& s) {
        if (m == 0) return 1.0;
        Mat jm(n, m);
        for (int a = 0; a < m; ++a) jm.col(a) = s.segment(2 * n + a * n, n);
        const double det = (jm.transpose() * gx * jm).determinant();
        return std::sqrt(std::max(0.0, det));
    };
    auto rhs = [&](double t, const Vec& s, Vec& dy) {
        dy.resize(sz);
        const Vec x = s.head(n);
        if (!g.support.contains(x)) {
            dy.setConstant(std::numeric_limits<double>::quiet_NaN());
            return;
        }
        Mat gx;
        ConnectionValue gam;
        std::vector<ConnectionValue> dgam;
        try {
            const Point p(g.chart, x);
            gx = g.eval(x, theta);
            gam = christoffel_from(gx, metric_first_derivatives(g, p, theta));
            if (m > 0) dgam = christoffel_derivatives_at(g, p, theta);
        } catch (const Error&) {
            dy.setConstant(std::numeric_limits<double>::quiet_NaN());
            return;
        }
        const Vec v = s.segment(n, n);
        dy.head(n) = v;
        dy.segment(n, n) = geodesic_accel(gam, v);
        for (int a = 0; a < m; ++a) {
            const Vec j = s.segment(2 * n + a * n, n);
            const Vec w = s.segment(2 * n + n * m + a * n, n);
            Vec dw(n);
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int mm = 0; mm < n; ++mm)
                    acc -= j(mm) * v.dot(dgam[static_cast<std::size_t>(mm)].gamma[static_cast<std::size_t>(k)] * v);
                acc -= 2.0 * v.dot(gam.gamma[static_cast<std::size_t>(k)] * w);
                dw(k) = acc;
            }
            dy.segment(2 * n + a * n, n) = w;
            dy.segment(2 * n + n * m + a * n, n) = dw;
        }
        dy(sz - 1) = std::exp(-0.5 * t * t) * area_density(gx, s);
    };
    auto valid = [&](const Vec& s) { return g.support.contains(s.head(n)); };
    auto project = [&](Vec& s) { renormalize(g, theta, s.head(n), s.segment(n, n)); };
    const OdeResult r = integrate_ode(rhs, 0.0, length, y, opts, valid, project);

    FanRay ray;
    ray.q = q;
    ray.s = r.s;
    ray.x = r.y.head(n);
    ray.v = r.y.segment(n, n);
    ray.jacobi.resize(n, m);
    for (int a = 0; a < m; ++a) ray.jacobi.col(a) = r.y.segment(2 * n + a * n, n);
    ray.area_integral = r.y(sz - 1);
    ray.truncated = !r.completed;
    return ray;
}

SphereArea geodesic_sphere_area(const MetricField& g, const Point& base, double ell, const ControlParams& theta,
                                int directions) {
    const int n = g.dim;
    if (n < 1 || n > 3) throw DimensionError("geodesic_sphere_area: n must be 1, 2 or 3");
    if (!(ell >= 0.0)) throw DomainError("geodesic_sphere_area: radius must be non-negative");
    const Mat frame = orthonormal_frame(g.at(base, theta));
    DirectionGrid grid = n == 3 && directions > 0 ? direction_grid(3, directions, 2 * directions)
                                                  : direction_grid(n, directions);
    OdeOptions ode;
    const std::vector<double> parts = parallel_map<double>(grid.q.size(), [&](std::size_t i) {
        const FanRay ray = shoot_fan_ray(g, base, frame, grid.q[i], ell, theta, ode);
        if (ray.truncated) throw GeometryError("geodesic_sphere_area: fan geodesic truncated (partial area)");
        if (n == 1) return grid.weight[i];
        const Mat gx = g.eval(ray.x, theta);
        const double det = (ray.jacobi.transpose() * gx * ray.jacobi).determinant();
        return grid.weight[i] * std::sqrt(std::max(0.0, det));
    });
    SphereArea out;
    out.area = pairwise_sum(parts) / std::pow(2 * kPi, 0.5 * (n - 1));
    out.flat = flat_sphere_area(n, ell);
    out.directions = static_cast<int>(grid.q.size());
    return out;
}

} // namespace fgeo
