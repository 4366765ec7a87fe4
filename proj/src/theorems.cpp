#include "fgeo/theorems.hpp"

#include "fgeo/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace fgeo {

SampleBatch sample_family(const FamilySpec& spec, const ControlParams& theta, std::size_t count, std::uint64_t seed) {
    if (!spec.sampler) throw UnsupportedError("family '" + spec.id + "' has no sampling recipe");
    SampleBatch b = spec.sampler(theta, count, seed);
    const Support& sup = spec.density().support;
    for (std::size_t i = 0; i < b.points.size(); ++i)
        if (!sup.contains(b.points[i].x))
            throw SamplerError("sample " + std::to_string(i) + " of family '" + spec.id + "' is outside the support");
    return b;
}

MeanEstimate mean_estimate(const std::vector<double>& values) {
    MeanEstimate m;
    m.n = values.size();
    if (values.empty()) throw DomainError("mean_estimate: empty sample");
    m.mean = pairwise_sum(values) / static_cast<double>(m.n);
    if (m.n < 2) return m;
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - m.mean) * (values[i] - m.mean);
    const double var = pairwise_sum(dev) / static_cast<double>(m.n - 1);
    m.std_error = std::sqrt(var / static_cast<double>(m.n));
    return m;
}

MeanEstimate mc_expectation(const SampleBatch& batch, const std::function<double(const Point&)>& f) {
    std::vector<double> v(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) { v[i] = f(batch.points[i]); });
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw ExpectationError("mc_expectation: non-finite value at sample " + std::to_string(i), i);
    return mean_estimate(v);
}

double overlapping_batch_se(const std::vector<double>& values, std::size_t b) {
    const std::size_t n = values.size();
    if (b < 1 || b >= n) throw DomainError("overlapping_batch_se: batch length must lie in [1, N)");
    const double mean = pairwise_sum(values) / static_cast<double>(n);
    // Running window sums; the deviations are summed pairwise.
    std::vector<double> dev(n - b + 1);
    double window = pairwise_sum(values.data(), b);
    for (std::size_t j = 0; j + b <= n; ++j) {
        if (j > 0) window += values[j + b - 1] - values[j - 1];
        const double d = window / static_cast<double>(b) - mean;
        dev[j] = d * d;
    }
    const double nb = static_cast<double>(n), bb = static_cast<double>(b);
    const double sigma2 = nb * bb / ((nb - bb) * (nb - bb + 1.0)) * pairwise_sum(dev);
    return std::sqrt(sigma2 / nb);
}

double covariant_divergence(const MetricField& g, const VectorField& w, const Point& x, const ControlParams& theta,
                            double tol) {
    require_chart(x, g.chart);
    const int n = g.dim;
    const ConnectionValue gam = christoffel_at(g, x, theta);
    const Vec w0 = w(x.x);
    if (w0.size() != n) throw DimensionError("covariant_divergence: field has the wrong dimension");

    double partial = 0.0, conn = 0.0, weighted = 0.0;
    for (int i = 0; i < n; ++i) {
        const double h = first_step(x.x(i));
        partial += diff1_o4([&](const Vec& y) { return w(y)(i); }, x.x, i, h, &g.support);
        weighted += diff1_o4([&](const Vec& y) { return std::sqrt(g.eval(y, theta).determinant()) * w(y)(i); }, x.x,
                             i, h, &g.support);
        for (int k = 0; k < n; ++k) conn += gam(i, i, k) * w0(k);
    }
    const double div1 = partial + conn;
    const double div2 = weighted / std::sqrt(g.at(x, theta).determinant());
    if (!(std::abs(div1 - div2) <= tol * (1.0 + std::abs(div1))))
        throw ConsistencyError("covariant_divergence: the two forms disagree (" + std::to_string(div1) + " vs " +
                               std::to_string(div2) + ")");
    return div1;
}

double moment_theory(int n, double k, int s) {
    return std::pow(2.0 * k, s) * std::exp(std::lgamma(s + 0.5 * n) - std::lgamma(0.5 * n));
}

namespace {

TheoremReport make_report(const std::string& name, double est, double se, double theory, std::size_t n) {
    TheoremReport r;
    r.name = name;
    r.estimate = est;
    r.std_error = se;
    r.theoretical = theory;
    r.n = n;
    r.z = se > 0.0 ? (est - theory) / se : (est == theory ? 0.0 : kInf);
    return r;
}

TheoremReport report_from(const std::string& name, const std::vector<double>& v, double theory, bool inflate) {
    const MeanEstimate m = mean_estimate(v);
    double se = m.std_error;
    if (inflate && v.size() > 16) {
        const auto b = static_cast<std::size_t>(std::sqrt(static_cast<double>(v.size())));
        se = std::max(se, overlapping_batch_se(v, b));
    }
    return make_report(name, m.mean, se, theory, m.n);
}

Vec default_offset(int n) {
    static const double c[3] = {0.3, -0.2, 0.1};
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = c[i % 3];
    return v;
}

} // namespace

std::vector<TheoremReport> fluctuation_suite(const FamilySpec& spec, const ControlParams& theta,
                                             const FluctuationOptions& opts) {
    const DensityFamily& fam = spec.density();
    const MetricField& g = spec.metric();
    const int n = spec.dim;
    const double k = theta.k;
    if (opts.samples < 2) throw DomainError("fluctuation_suite: need at least two samples");
    if (opts.s_max < 1) throw DomainError("fluctuation_suite: s_max must be at least 1");

    const Point mode = spec.closed.mode ? spec.closed.mode(theta) : find_mode(fam, g, theta).mode;
    const double S_mode = log_probability_weight(fam, g, mode, theta);
    const VectorField w = opts.test_field ? opts.test_field : VectorField([mode, n](const Vec& x) -> Vec {
        return (x - mode.x) + default_offset(n);
    });

    const SampleBatch batch = sample_family(spec, theta, opts.samples, opts.seed);
    const std::size_t N = batch.size();
    std::vector<double> eta2(N), ell2(N), dS(N), ident(N);
    parallel_for(N, [&](std::size_t i) {
        const Point& p = batch.points[i];
        const EntropyGradient eg = entropy_gradient(fam, g, p, theta);
        // eta_i = k dS_unit/dx^i = -k psi_i; the thermo metric is k g, so eta^2 = k psi^2.
        eta2[i] = k * eg.psi2;
        const double l = spec.closed.ell ? spec.closed.ell(p, theta) : separation_distance(g, p, mode, theta);
        ell2[i] = k * l * l;
        dS[i] = k * (log_probability_weight(fam, g, p, theta) - S_mode);
        const Vec wi = w(p.x);
        ident[i] = k * covariant_divergence(g, w, p, theta) - k * eg.psi.dot(wi);
        for (double v : {eta2[i], ell2[i], dS[i], ident[i]})
            if (!std::isfinite(v)) throw ExpectationError("fluctuation_suite: non-finite value at sample " + std::to_string(i), i);
    });

    if (spec.closed.ell) {
        const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, opts.ell_crosscheck)), N);
        for (std::size_t i = 0; i < m; ++i) {
            const double closed = std::sqrt(ell2[i] / k);
            const double shot = separation_distance(g, batch.points[i], mode, theta);
            if (std::abs(closed - shot) > 1e-5 * closed + 1e-7)
                throw ConsistencyError("fluctuation_suite: closed-form l disagrees with geodesic shooting at sample " +
                                       std::to_string(i));
        }
    }

    std::vector<TheoremReport> out;
    out.push_back(report_from("eta2", eta2, n * k, false));
    out.push_back(report_from("ell2", ell2, n * k, false));
    out.push_back(report_from("delta_S", dS, -0.5 * n * k, false));

    std::vector<std::vector<double>> pw(static_cast<std::size_t>(opts.s_max) + 1, std::vector<double>(N));
    for (std::size_t i = 0; i < N; ++i) {
        double a = 1.0;
        for (int s = 0; s <= opts.s_max; ++s) {
            pw[static_cast<std::size_t>(s)][i] = a;
            a *= eta2[i];
        }
    }
    for (int s = 1; s <= opts.s_max; ++s)
        out.push_back(report_from("eta2_moment_" + std::to_string(s), pw[static_cast<std::size_t>(s)],
                                  moment_theory(n, k, s), s >= 3));

    // Consecutive-moment ratios, delta-method standard error.
    for (int s = 2; s <= opts.s_max; ++s) {
        const auto& a = pw[static_cast<std::size_t>(s)];
        const auto& b = pw[static_cast<std::size_t>(s - 1)];
        const double ma = pairwise_sum(a) / N, mb = pairwise_sum(b) / N;
        std::vector<double> caa(N), cbb(N), cab(N);
        for (std::size_t i = 0; i < N; ++i) {
            caa[i] = (a[i] - ma) * (a[i] - ma);
            cbb[i] = (b[i] - mb) * (b[i] - mb);
            cab[i] = (a[i] - ma) * (b[i] - mb);
        }
        const double dn = static_cast<double>(N), d1 = dn - 1.0;
        const double vaa = pairwise_sum(caa) / d1 / dn, vbb = pairwise_sum(cbb) / d1 / dn, vab = pairwise_sum(cab) / d1 / dn;
        const double r = ma / mb;
        double se = std::sqrt(std::max(0.0, vaa + r * r * vbb - 2.0 * r * vab)) / mb;
        if (s >= 3) {
            const double iid = std::sqrt(vaa);
            const double obm = overlapping_batch_se(a, static_cast<std::size_t>(std::sqrt(dn)));
            if (iid > 0.0) se *= std::max(1.0, obm / iid);
        }
        out.push_back(make_report("recurrence_" + std::to_string(s), r, se, 2.0 * k * (s - 1 + 0.5 * n), N));
    }
    out.push_back(report_from("divergence_identity", ident, 0.0, false));

    std::string bad;
    for (const auto& r : out)
        if (!(std::abs(r.z) <= opts.z_fail)) bad += (bad.empty() ? "" : ", ") + r.name;
    if (!bad.empty()) throw SuiteFailure("fluctuation suite failed: " + bad, out);
    return out;
}

} // namespace fgeo
