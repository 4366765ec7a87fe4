#include "fgeo/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace fgeo {

namespace {

const double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                       0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                       0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                       0.207784955007898467600689403773245, 0.0};
const double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                       0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                       0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                       0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
};

Segment gk15(const std::function<double(double)>& f, double a, double b, long& evals) {
    const double c = 0.5 * (a + b), hl = 0.5 * (b - a);
    const double fc = f(c);
    double resg = fc * wg[3];
    double resk = fc * wgk[7];
    double resabs = std::abs(resk);
    double fv1[7], fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = hl * xgk[j];
        const double f1 = f(c - dx), f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += wgk[j] * (f1 + f2);
        resabs += wgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) resg += wg[j / 2] * (f1 + f2);
    }
    evals += 15;
    const double reskh = 0.5 * resk;
    double resasc = wgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) resasc += wgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
    const double ahl = std::abs(hl);
    resk *= hl;
    resabs *= ahl;
    resasc *= ahl;
    double err = std::abs((resk - resg * hl));
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    if (!std::isfinite(resk)) err = kInf;
    return {a, b, resk, err};
}

QuadResult adaptive(const std::function<double(double)>& f, double a, double b, const QuadOptions& opts) {
    QuadResult out;
    std::vector<Segment> segs;
    segs.push_back(gk15(f, a, b, out.evaluations));
    for (;;) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].value;
            err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        out.value = total;
        out.error = err;
        if (!std::isfinite(total)) {
            out.converged = false;
            return out;
        }
        if (err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
            out.converged = true;
            return out;
        }
        if (static_cast<int>(segs.size()) >= opts.max_intervals) return out;
        Segment s = segs[worst];
        const double m = 0.5 * (s.a + s.b);
        if (m <= s.a || m >= s.b) return out;
        segs[worst] = gk15(f, s.a, m, out.evaluations);
        segs.push_back(gk15(f, m, s.b, out.evaluations));
    }
}

} // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b, const QuadOptions& opts) {
    if (a == b) {
        QuadResult r;
        r.converged = true;
        return r;
    }
    if (a > b) {
        QuadResult r = integrate(f, b, a, opts);
        r.value = -r.value;
        return r;
    }
    const bool ia = std::isinf(a), ib = std::isinf(b);
    if (!ia && !ib) return adaptive(f, a, b, opts);
    if (ia && ib) {
        auto g = [&](double t) {
            const double x = (1.0 - t) / t;
            return (f(x) + f(-x)) / (t * t);
        };
        return adaptive(g, 0.0, 1.0, opts);
    }
    if (ib) {
        auto g = [&](double t) { return f(a + (1.0 - t) / t) / (t * t); };
        return adaptive(g, 0.0, 1.0, opts);
    }
    auto g = [&](double t) { return f(b - (1.0 - t) / t) / (t * t); };
    return adaptive(g, 0.0, 1.0, opts);
}

double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const QuadOptions& opts, const char* what) {
    QuadResult r = integrate(f, a, b, opts);
    if (!r.converged)
        throw IntegrationError(std::string(what) + ": quadrature did not converge", r.error);
    return r.value;
}

QuadResult integrate_2d(const std::function<double(double, double)>& f, double ax, double bx,
                        double ay, double by, const QuadOptions& opts) {
    QuadOptions inner = opts;
    inner.abs_tol = opts.abs_tol * 0.1;
    inner.rel_tol = opts.rel_tol * 0.1;
    bool ok = true;
    double inner_err = 0.0;
    long evals = 0;
    auto g = [&](double x) {
        QuadResult r = integrate([&](double y) { return f(x, y); }, ay, by, inner);
        ok = ok && r.converged;
        inner_err = std::max(inner_err, r.error);
        evals += r.evaluations;
        return r.value;
    };
    QuadResult out = integrate(g, ax, bx, opts);
    out.converged = out.converged && ok;
    out.evaluations = evals;
    return out;
}

OdeResult integrate_ode(const OdeRhs& rhs, double s0, double s1, const Vec& y0, const OdeOptions& opts,
                        const std::function<bool(const Vec&)>& valid,
                        const std::function<void(Vec&)>& project,
                        const std::function<void(double, const Vec&)>& observe) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;

    OdeResult res;
    res.s = s0;
    res.y = y0;
    if (observe) observe(s0, y0);
    if (s1 <= s0) {
        res.completed = true;
        return res;
    }
    const Eigen::Index n = y0.size();
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), ynew(n), err(n);
    double s = s0;
    Vec y = y0;
    rhs(s, y, k1);
    double h = std::min(opts.h0, s1 - s0);
    while (s < s1) {
        if (res.steps + res.rejected >= opts.max_steps) break;
        bool last = false;
        if (s + h >= s1) {
            h = s1 - s;
            last = true;
        }
        yt = y + h * a21 * k1;
        rhs(s + c2 * h, yt, k2);
        yt = y + h * (a31 * k1 + a32 * k2);
        rhs(s + c3 * h, yt, k3);
        yt = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(s + c4 * h, yt, k4);
        yt = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(s + c5 * h, yt, k5);
        yt = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(s + h, yt, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        bool ok_state = ynew.allFinite() && (!valid || valid(ynew));
        double enorm = kInf;
        if (ok_state) {
            rhs(s + h, ynew, k7);
            err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double sc = opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
                const double r = err(i) / sc;
                acc += r * r;
            }
            enorm = std::sqrt(acc / static_cast<double>(n));
            if (!std::isfinite(enorm)) enorm = kInf;
        }
        if (enorm <= 1.0) {
            s = last ? s1 : s + h;
            y = ynew;
            if (project) {
                project(y);
                rhs(s, y, k1);
            } else {
                k1 = k7;
            }
            ++res.steps;
            if (observe) observe(s, y);
            double fac = enorm > 0.0 ? 0.9 * std::pow(enorm, -0.2) : 5.0;
            h *= std::clamp(fac, 0.2, 5.0);
        } else {
            ++res.rejected;
            h *= ok_state ? std::clamp(0.9 * std::pow(enorm, -0.25), 0.1, 0.5) : 0.25;
        }
        h = std::min(h, opts.hmax);
        if (h < opts.hmin) break;
    }
    res.s = s;
    res.y = y;
    res.completed = (s >= s1);
    return res;
}

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t m = n / 2;
    return pairwise_sum(v, m) + pairwise_sum(v + m, n - m);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::size_t first_index = n;
    std::mutex mu;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (i < first_index) {
                    first_index = i;
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace fgeo
