#pragma once

#include "fgeo/core.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace fgeo {

// ---- quadrature ------------------------------------------------------------

struct QuadOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_intervals = 2000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    long evaluations = 0;
    bool converged = false;
};

// Adaptive Gauss-Kronrod (7/15) with global bisection. Infinite endpoints are
// mapped onto finite intervals.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opts = {});

// Same as integrate() but throws IntegrationError when not converged.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const QuadOptions& opts = {}, const char* what = "integrate");

// Nested adaptive quadrature over a 2-D box.
QuadResult integrate_2d(const std::function<double(double, double)>& f,
                        double ax, double bx, double ay, double by,
                        const QuadOptions& opts = {});

// ---- ODE integration -------------------------------------------------------

struct OdeOptions {
    double atol = 1e-10;
    double rtol = 1e-10;
    double h0 = 1e-2;
    double hmax = 0.5;
    double hmin = 1e-13;
    long max_steps = 200000;
};

struct OdeResult {
    bool completed = false;
    double s = 0.0;
    Vec y;
    long steps = 0;
    long rejected = 0;
};

using OdeRhs = std::function<void(double, const Vec&, Vec&)>;

// Dormand-Prince 5(4). `valid` rejects trial states (support exits), `project`
// is applied to every accepted state, `observe` sees every accepted node.
OdeResult integrate_ode(const OdeRhs& rhs, double s0, double s1, const Vec& y0,
                        const OdeOptions& opts = {},
                        const std::function<bool(const Vec&)>& valid = {},
                        const std::function<void(Vec&)>& project = {},
                        const std::function<void(double, const Vec&)>& observe = {});

// ---- finite differences ----------------------------------------------------

namespace detail {
inline double ev(double v) { return v; }
template <class D>
auto ev(const Eigen::MatrixBase<D>& m) { return m.eval(); }
} // namespace detail

// Generic central-difference helpers for scalar- or matrix-valued f.
// Steps are shrunk to stay inside `support`; BoundaryError if that would
// shrink them by more than a factor 1e3.
template <class F>
auto diff1(const F& f, const Vec& x, int k, double h, const Support* support = nullptr) {
    if (support) {
        double hf = support->fit_step(x, k, h, 1);
        if (hf < 1e-3 * h) throw BoundaryError("finite-difference stencil leaves the support");
        h = hf;
    }
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    return detail::ev((f(xp) - f(xm)) / (2.0 * h));
}

// 4th-order first derivative.
template <class F>
auto diff1_o4(const F& f, const Vec& x, int k, double h, const Support* support = nullptr) {
    if (support) {
        double hf = support->fit_step(x, k, h, 2);
        if (hf < 1e-3 * h) throw BoundaryError("finite-difference stencil leaves the support");
        h = hf;
    }
    auto at = [&](double t) {
        Vec y = x;
        y(k) += t;
        return f(y);
    };
    return detail::ev((at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h));
}

// 4th-order second derivative d^2 f / dx_k dx_l.
template <class F>
auto diff2_o4(const F& f, const Vec& x, int k, int l, double hk, double hl,
              const Support* support = nullptr) {
    if (support) {
        double a = support->fit_step(x, k, hk, 2);
        double b = support->fit_step(x, l, hl, 2);
        if (a < 1e-3 * hk || b < 1e-3 * hl)
            throw BoundaryError("finite-difference stencil leaves the support");
        hk = a;
        hl = b;
    }
    auto at = [&](double s, double t) {
        Vec y = x;
        y(k) += s;
        y(l) += t;
        return f(y);
    };
    if (k == l) {
        double h = hk;
        return detail::ev((-at(2 * h, 0) + 16.0 * at(h, 0) - 30.0 * f(x) + 16.0 * at(-h, 0) -
                           at(-2 * h, 0)) / (12.0 * h * h));
    }
    static const double c[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
    static const int o[4] = {-2, -1, 1, 2};
    auto acc = detail::ev(c[0] * c[0] * at(o[0] * hk, o[0] * hl));
    bool first = true;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            if (first) { first = false; continue; }
            acc += c[a] * c[b] * at(o[a] * hk, o[b] * hl);
        }
    return detail::ev(acc / (hk * hl));
}

inline double second_step(double xi) { return 1e-4 * (1.0 + std::abs(xi)); }
inline double first_step(double xi) { return 1e-5 * (1.0 + std::abs(xi)); }
inline double jacobian_step(double xi) { return std::max(1e-6, 1e-6 * std::abs(xi)); }

// ---- reductions and parallel maps -----------------------------------------

// Fixed-order pairwise summation.
double pairwise_sum(const double* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

// Runs fn(i) for i in [0, n) on a worker pool; results land in index order so
// reductions over them are deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

} // namespace fgeo
