#include "fgeo/acceptance.hpp"

#include "fgeo/expansion.hpp"
#include "fgeo/families.hpp"
#include "fgeo/reports.hpp"
#include "fgeo/special.hpp"
#include "fgeo/theorems.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace fgeo {

namespace {

using Clock = std::chrono::steady_clock;

std::string g3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Mat random_spd(const CounterRng& rng, int n, std::uint64_t base) {
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = 2.0 * rng.uniform(base + i * n + j) - 1.0;
    return a * a.transpose() + 0.5 * Mat::Identity(n, n);
}

Vec random_vec(const CounterRng& rng, int n, std::uint64_t base, double scale) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = scale * (2.0 * rng.uniform(base + i) - 1.0);
    return v;
}

FamilySpec random_gaussian(const CounterRng& rng, int n) {
    return builtin_family("gaussian-nd", gaussian_params(random_vec(rng, n, 100, 1.0), random_spd(rng, n, 0)));
}

// ---- criteria ----------------------------------------------------------------

CriterionResult c1_curvature() {
    CriterionResult r{1, "worked-example curvature", false, "", 0.0};
    const double theta = 2.0;
    const FamilySpec s = builtin_family("axial-2d", ControlParams{theta});
    const ChartView& cart = s.chart("cartesian");
    const ChartView& polar = s.chart("polar");
    double worst_c = 0.0, worst_p = 0.0;
    for (int j = 0; j < 20; ++j) {
        const double rr = 0.2 + 0.18 * j, phi = std::fmod(0.7 + 1.3 * j, 2 * kPi);
        const double D = theta * theta + rr * rr;
        const double expect = 6.0 * theta * theta / (D * D);
        const Point pc("cartesian", vec({rr * std::cos(phi), rr * std::sin(phi)}));
        const Point pp("polar", vec({rr, phi}));
        worst_c = std::max(worst_c, rel(curvature_at(cart.metric, pc, s.theta).scalar, expect));
        worst_p = std::max(worst_p, rel(curvature_at(polar.metric, pp, s.theta).scalar, expect));
    }
    r.passed = worst_c <= 1e-5 && worst_p <= 1e-5;
    r.detail = "theta=2, 20 probes: max rel err cartesian " + g3(worst_c) + ", polar " + g3(worst_p) + " (tol 1e-5)";
    return r;
}

CriterionResult c2_flatness(const CounterRng& rng) {
    CriterionResult r{2, "gaussian flatness", false, "", 0.0};
    double worst = 0.0;
    bool gates = true;
    for (int n : {2, 3}) {
        const CounterRng sub = rng.split(static_cast<std::uint64_t>(n));
        const FamilySpec s = random_gaussian(sub, n);
        gates = gates && s.gate.passed;
        Mat L = spd_inverse(s.metric().at(s.probes[0], s.theta)).llt().matrixL();
        for (int p = 0; p < 10; ++p) {
            const Vec z = random_vec(sub, n, 1000 + 10 * p, 2.0);
            const Point x("x", s.closed.mode(s.theta).x + L * z);
            worst = std::max(worst, curvature_at(s.metric(), x, s.theta).riemann.max_abs());
        }
    }
    const FamilySpec xy = builtin_family("xy-coupled", ControlParams{});
    gates = gates && xy.gate.passed;
    for (const auto& c : {std::string("cartesian"), std::string("rotated")}) {
        const ChartView& v = xy.chart(c);
        worst = std::max(worst, curvature_at(v.metric, Point(c, vec({0.4, -0.7})), xy.theta).riemann.max_abs());
    }
    r.passed = gates && worst < 1e-8;
    r.detail = "n=2,3 random SPD sigma + xy-coupled: max |R_ijkl| " + g3(worst) + " (tol 1e-8), gates " +
               (gates ? "pass" : "FAIL");
    return r;
}

CriterionResult c3_partition(const CounterRng& rng) {
    CriterionResult r{3, "partition function", false, "", 0.0};
    double worst = 0.0;
    for (double theta : {0.5, 1.0, 2.0, 4.0, 10.0}) {
        const FamilySpec s = builtin_family("axial-2d", ControlParams{theta});
        const PartitionResult z = gaussian_partition(s.density(), s.metric(), s.closed.mode(s.theta), s.theta);
        worst = std::max(worst, rel(z.Z, axial_partition(theta)));
    }
    double flat = 0.0;
    for (int n : {2, 3}) {
        const FamilySpec s = random_gaussian(rng.split(10 + n), n);
        flat = std::max(flat, std::abs(gaussian_partition(s.density(), s.metric(), s.closed.mode(s.theta), s.theta).Z - 1.0));
    }
    const FamilySpec xy = builtin_family("xy-coupled", ControlParams{});
    flat = std::max(flat, std::abs(gaussian_partition(xy.density(), xy.metric(), xy.closed.mode(xy.theta), xy.theta).Z - 1.0));
    r.passed = worst <= 1e-6 && flat <= 1e-8;
    r.detail = "axial-2d max rel err " + g3(worst) + " (tol 1e-6); flat |Z-1| " + g3(flat) + " (tol 1e-8)";
    return r;
}

CriterionResult c4_convergence() {
    CriterionResult r{4, "convergence P vs Rbar/6", false, "", 0.0};
    const auto t0 = Clock::now();
    RunConfig cfg;
    cfg.family = "axial-2d";
    cfg.thetas = {vec({3.0}), vec({5.0}), vec({10.0}), vec({20.0}), vec({30.0})};
    validate_config(cfg);
    const CsvTable t = run_convergence_scan(cfg);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const std::size_t gap = t.column("rel_gap");
    bool mono = true;
    for (std::size_t i = 1; i < t.rows.size(); ++i) mono = mono && t.rows[i][gap] < t.rows[i - 1][gap];
    const double g10 = t.rows[2][gap], g30 = t.rows[4][gap];
    r.passed = !has_flagged_rows(t) && g10 <= 0.05 && g30 <= 0.01 && mono && secs < 30.0;
    r.detail = "gap(10)=" + g3(g10) + " (<=0.05), gap(30)=" + g3(g30) + " (<=0.01), monotone " + (mono ? "yes" : "NO") +
               ", " + g3(secs) + " s (<30)";
    return r;
}

CriterionResult c5_identity(const CounterRng& rng) {
    CriterionResult r{5, "psi^2 = l^2", false, "", 0.0};
    std::string detail;
    double worst_all = 0.0;
    auto run = [&](const FamilySpec& s, const std::function<Point(int)>& probe) {
        const Point mode = s.closed.mode(s.theta);
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const Point x = probe(i);
            const double l = separation_distance(s.metric(), x, mode, s.theta);
            const double psi2 = entropy_gradient(s.density(), s.metric(), x, s.theta).psi2;
            worst = std::max(worst, rel(psi2, l * l));
        }
        worst_all = std::max(worst_all, worst);
        detail += (detail.empty() ? "" : ", ") + s.id + " " + g3(worst);
    };
    const CounterRng rg = rng.split(20);
    const FamilySpec gs = random_gaussian(rg, 2);
    const Mat Lg = spd_inverse(gs.metric().at(gs.probes[0], gs.theta)).llt().matrixL();
    auto ellipse = [&](const FamilySpec& s, const Mat& L, const CounterRng& q) {
        return [&s, L, q](int i) {
            const double rad = 0.3 + 2.7 * q.uniform(2 * i), ang = 2 * kPi * q.uniform(2 * i + 1);
            return Point(s.primary().name, s.closed.mode(s.theta).x + L * vec({rad * std::cos(ang), rad * std::sin(ang)}));
        };
    };
    run(gs, ellipse(gs, Lg, rg.split(1)));
    const FamilySpec ax = builtin_family("axial-2d", ControlParams{3.0});
    const CounterRng ra = rng.split(21);
    run(ax, [&](int i) {
        const double rad = 0.3 + 2.7 * ra.uniform(2 * i), ang = 2 * kPi * ra.uniform(2 * i + 1);
        return Point("cartesian", vec({rad * std::cos(ang), rad * std::sin(ang)}));
    });
    const FamilySpec ca = builtin_family("cauchy-1d", ControlParams{0.5, 1.5});
    const CounterRng rc = rng.split(22);
    run(ca, [&](int i) {
        double u = 0.03 + 0.94 * rc.uniform(i);
        if (std::abs(u - 0.5) < 0.03) u += 0.06;
        return Point("x", vec({0.5 + 1.5 * std::tan(kPi * (u - 0.5))}));
    });
    const FamilySpec xy = builtin_family("xy-coupled", ControlParams{});
    const Mat Lx = spd_inverse(xy.metric().at(xy.probes[0], xy.theta)).llt().matrixL();
    run(xy, ellipse(xy, Lx, rng.split(23)));
    r.passed = worst_all <= 1e-4;
    r.detail = "50 probes each, max rel err: " + detail + " (tol 1e-4)";
    return r;
}

CriterionResult c6_fluctuations(const CounterRng& rng, std::uint64_t seed) {
    CriterionResult r{6, "fluctuation theorem suite", false, "", 0.0};
    const auto t0 = Clock::now();
    FluctuationOptions o;
    o.samples = 100000;
    o.seed = seed;
    double worst = 0.0;
    bool ok = true;
    std::string detail;
    auto run = [&](const FamilySpec& s, const std::string& label, bool counted) {
        double zmax = 0.0;
        std::string worst_name;
        try {
            for (const auto& t : fluctuation_suite(s, s.theta, o))
                if (std::abs(t.z) > zmax) {
                    zmax = std::abs(t.z);
                    worst_name = t.name;
                }
        } catch (const SuiteFailure& f) {
            for (const auto& t : f.reports)
                if (std::abs(t.z) > zmax) {
                    zmax = std::abs(t.z);
                    worst_name = t.name;
                }
            if (counted) ok = false;
        }
        if (counted) worst = std::max(worst, zmax);
        detail += (detail.empty() ? "" : ", ") + label + " max|z| " + g3(zmax) + " (" + worst_name + ")";
    };
    run(random_gaussian(rng.split(30), 2), "gaussian n=2", true);
    run(random_gaussian(rng.split(31), 3), "gaussian n=3", true);
    run(builtin_family("axial-2d", ControlParams{30.0}), "axial theta=30", true);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    run(builtin_family("axial-2d", ControlParams{4.0}), "[info] axial theta=4", false);
    r.passed = ok && worst <= 3.0 && secs < 60.0;
    r.detail = "N=1e5, k=1: " + detail + "; " + g3(secs) + " s (<60)";
    return r;
}

CriterionResult c7_expansion(const CounterRng& rng) {
    CriterionResult r{7, "second-order expansion", false, "", 0.0};
    const double theta = 4.0;
    const FamilySpec s = builtin_family("axial-2d", ControlParams{theta});
    const Point mode = s.closed.mode(s.theta);
    const CurvatureValue cm = curvature_at(s.metric(), mode, s.theta);
    double worst_fit = 0.0, worst_F = 0.0;
    for (double q : {0.3, 1.9, 4.4}) {
        const double F = spherical_function(cm, spherical_frame(s.metric().at(mode, s.theta), vec({q})));
        worst_F = std::max(worst_F, rel(F, 2.0 * cm.scalar));
        const double b = fitted_quadratic_coefficient(s.density(), s.metric(), mode, vec({q}), s.theta);
        worst_fit = std::max(worst_fit, rel(b, -F / 24.0));
    }
    double table = 0.0;
    const Mat I = Mat::Identity(3, 3);
    for (int i = 0; i < 25; ++i) {
        const Vec q = vec({kPi * (rng.uniform(2 * i) - 0.5), 2 * kPi * rng.uniform(2 * i + 1)});
        const auto a = anisotropic_functions(spherical_frame(I, q));
        const auto b = anisotropic_table(q);
        for (int k = 0; k < 6; ++k) table = std::max(table, std::abs(a[k] - b[k]));
    }
    r.passed = worst_fit <= 0.10 && worst_F <= 1e-6 && table <= 1e-10;
    r.detail = "theta=4: fit vs -F/24 rel " + g3(worst_fit) + " (<=0.1), F vs 2Rbar rel " + g3(worst_F) +
               "; n=3 G table max err " + g3(table) + " (<=1e-10)";
    return r;
}

CriterionResult c8_entropy() {
    CriterionResult r{8, "diffeomorphic entropy invariance", false, "", 0.0};
    double inv = 0.0, diff = 0.0, spread = kInf;
    for (const auto& m : {vec({0.0, 1.0, 0.0, 1.0}), vec({0.5, 2.0, -1.0, 0.5})}) {
        const EntropyComparison c = entropy_comparison(m(0), m(1), m(2), m(3));
        inv = std::max(inv, std::abs(c.inv_gauss - c.inv_cauchy));
        diff = std::max(diff, std::abs((c.diff_cauchy - c.diff_gauss) - c.mean_log_jacobian));
        spread = std::min(spread, std::abs(c.diff_cauchy - c.diff_gauss));
    }
    r.passed = inv <= 1e-5 && diff <= 1e-4 && spread > 1e-3;
    r.detail = "invariant gap " + g3(inv) + " (<=1e-5); differential gap - <log J> " + g3(diff) +
               " (<=1e-4); min differential gap " + g3(spread);
    return r;
}

CriterionResult c9_samplers(std::uint64_t seed) {
    CriterionResult r{9, "sampler correctness", false, "", 0.0};
    const std::size_t N = 10000;
    auto xs = [](const SampleBatch& b) {
        std::vector<double> v;
        for (const auto& p : b.points) v.push_back(p.x(0));
        return v;
    };
    const double mu = 1.5, sigma = 0.7;
    const SampleBatch bm = box_muller_sample(mu, sigma, N, seed);
    const KsResult k1 = ks_test(xs(bm), [&](double x) { return normal_cdf((x - mu) / sigma); });

    Mat prec(1, 1);
    prec(0, 0) = 1.0 / (1.3 * 1.3);
    const FamilySpec g = builtin_family("gaussian-nd", gaussian_params(vec({-0.4}), prec));
    const SampleBatch it = inverse_transform_sample(g.density(), g.theta, N, seed + 1);
    const KsResult k2 = ks_test(xs(it), [](double x) { return normal_cdf((x + 0.4) / 1.3); });

    const FamilySpec c = builtin_family("cauchy-1d", ControlParams{0.5, 2.0});
    const SampleBatch ic = inverse_transform_sample(c.density(), c.theta, N, seed + 2);
    const KsResult k3 = ks_test(xs(ic), [](double x) { return cauchy_cdf(x, 0.5, 2.0); });

    std::vector<double> pushed;
    for (double x : xs(bm)) pushed.push_back(gauss_to_cauchy(x, mu, sigma, -1.0, 0.5));
    const KsResult k4 = ks_test(pushed, [](double x) { return cauchy_cdf(x, -1.0, 0.5); });

    r.passed = k1.passed && k2.passed && k3.passed && k4.passed;
    r.detail = "KS p-values (alpha 0.01, N=1e4): box-muller " + g3(k1.p_value) + ", inverse gaussian " +
               g3(k2.p_value) + ", inverse cauchy " + g3(k3.p_value) + ", gauss->cauchy " + g3(k4.p_value);
    return r;
}

CriterionResult c10_properties(const CounterRng& rng, const Clock::time_point& start) {
    CriterionResult r{10, "tensor-calculus property suite", false, "", 0.0};
    double sym = 0.0, compat = 0.0, compat_fd = 0.0, inv_R = 0.0, inv_R_fd = 0.0, inv_w = 0.0, inv_psi = 0.0,
           tensor = 0.0;
    auto symmetry = [&](const CurvatureValue& c) { sym = std::max(sym, c.riemann.n() > 1 ? curvature_symmetries(c).worst() / std::max(1.0, curvature_symmetries(c).scale) : 0.0); };

    const FamilySpec ax = builtin_family("axial-2d", ControlParams{2.0});
    const ChartView& cart = ax.chart("cartesian");
    const ChartView& pol = ax.chart("polar");
    const ChartView& tch = ax.chart("t");
    const CoordinateChange& cp = ax.change("cartesian", "polar");
    const CoordinateChange& ct = ax.change("cartesian", "t");
    for (int i = 0; i < 30; ++i) {
        const double rad = 0.2 + 2.5 * rng.uniform(2 * i), ang = 2 * kPi * rng.uniform(2 * i + 1);
        const Point xc("cartesian", vec({rad * std::cos(ang), rad * std::sin(ang)}));
        const Point xp = cp.apply(xc);
        const Point xt = ct.apply(xc);
        const CurvatureValue Rc = curvature_at(cart.metric, xc, ax.theta);
        const CurvatureValue Rp = curvature_at(pol.metric, xp, ax.theta);
        const CurvatureValue Rt = curvature_at(tch.metric, xt, ax.theta);
        symmetry(Rc);
        symmetry(Rp);
        symmetry(Rt);
        compat = std::max({compat, metric_compatibility_defect(cart.metric, xc, ax.theta),
                           metric_compatibility_defect(pol.metric, xp, ax.theta)});
        compat_fd = std::max(compat_fd, metric_compatibility_defect(tch.metric, xt, ax.theta));
        inv_R = std::max(inv_R, rel(Rp.scalar, Rc.scalar));
        inv_R_fd = std::max(inv_R_fd, rel(Rt.scalar, Rc.scalar));
        const double wc = probability_weight(cart.density, cart.metric, xc, ax.theta);
        inv_w = std::max({inv_w, rel(probability_weight(pol.density, pol.metric, xp, ax.theta), wc),
                          rel(probability_weight(tch.density, tch.metric, xt, ax.theta), wc)});
        const double pc = entropy_gradient(cart.density, cart.metric, xc, ax.theta).psi2;
        inv_psi = std::max(inv_psi, rel(entropy_gradient(pol.density, pol.metric, xp, ax.theta).psi2, pc));
        const TensorValue gt = transform_tensor(TensorValue::covariant2(cart.metric.at(xc, ax.theta)), cp, xc);
        const Mat gp = pol.metric.at(xp, ax.theta);
        tensor = std::max(tensor, (gt.matrix() - gp).cwiseAbs().maxCoeff() / gp.cwiseAbs().maxCoeff());
    }
    const FamilySpec g3d = random_gaussian(rng.split(40), 3);
    const FamilySpec ca = builtin_family("cauchy-1d", ControlParams{0.0, 1.0});
    for (int i = 0; i < 10; ++i) {
        const Point x("x", g3d.closed.mode(g3d.theta).x + random_vec(rng.split(41), 3, 3 * i, 1.5));
        symmetry(curvature_at(g3d.metric(), x, g3d.theta));
        compat = std::max(compat, metric_compatibility_defect(g3d.metric(), x, g3d.theta));
        const Point y("x", vec({4.0 * (rng.split(42).uniform(i) - 0.5)}));
        compat = std::max(compat, metric_compatibility_defect(ca.metric(), y, ca.theta) /
                                      std::max(1.0, ca.metric().at(y, ca.theta)(0, 0)));
    }
    const double total = std::chrono::duration<double>(Clock::now() - start).count();
    r.passed = sym <= 1e-10 && compat <= 1e-8 && compat_fd <= 1e-5 && inv_R <= 1e-8 && inv_R_fd <= 1e-5 &&
               inv_w <= 1e-10 && inv_psi <= 1e-8 && tensor <= 1e-10 && total < 300.0;
    r.detail = "symmetries+Bianchi " + g3(sym) + " (1e-10), Dg " + g3(compat) + " (1e-8) / FD chart " + g3(compat_fd) +
               " (1e-5), R invariance " + g3(inv_R) + " (1e-8) / FD chart " + g3(inv_R_fd) + " (1e-5), omega " +
               g3(inv_w) + " (1e-10), psi^2 " + g3(inv_psi) + " (1e-8), g transform " + g3(tensor) +
               " (1e-10); suite " + g3(total) + " s (<300)";
    return r;
}

} // namespace

std::string format_result(const CriterionResult& r) {
    char head[96];
    std::snprintf(head, sizeof head, "%s  C%-2d %-34s", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str());
    return std::string(head) + r.detail + " [" + g3(r.seconds) + " s]";
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
    const auto start = Clock::now();
    const CounterRng rng(opts.seed, 7);
    std::vector<CriterionResult> out;
    auto wanted = [&](int id) { return opts.only.empty() || std::find(opts.only.begin(), opts.only.end(), id) != opts.only.end(); };
    auto run = [&](int id, const std::string& name, const std::function<CriterionResult()>& fn) {
        if (!wanted(id)) return;
        const auto t0 = Clock::now();
        CriterionResult res;
        try {
            res = fn();
        } catch (const std::exception& e) {
            res = CriterionResult{id, name, false, std::string("error: ") + e.what(), 0.0};
        }
        res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        if (id == 1 && res.seconds >= 5.0) {
            res.passed = false;
            res.detail += "; runtime " + g3(res.seconds) + " s exceeds 5 s";
        }
        if (opts.progress) opts.progress(res);
        out.push_back(res);
    };
    run(1, "worked-example curvature", [] { return c1_curvature(); });
    run(2, "gaussian flatness", [&] { return c2_flatness(rng.split(2)); });
    run(3, "partition function", [&] { return c3_partition(rng.split(3)); });
    run(4, "convergence P vs Rbar/6", [] { return c4_convergence(); });
    run(5, "psi^2 = l^2", [&] { return c5_identity(rng.split(5)); });
    run(6, "fluctuation theorem suite", [&] { return c6_fluctuations(rng.split(6), opts.seed); });
    run(7, "second-order expansion", [&] { return c7_expansion(rng.split(7)); });
    run(8, "diffeomorphic entropy invariance", [] { return c8_entropy(); });
    run(9, "sampler correctness", [&] { return c9_samplers(opts.seed); });
    run(10, "tensor-calculus property suite", [&] { return c10_properties(rng.split(10), start); });
    return out;
}

} // namespace fgeo
