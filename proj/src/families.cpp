#include "fgeo/families.hpp"

#include "fgeo/fieldexpr.hpp"
#include "fgeo/numerics.hpp"
#include "fgeo/special.hpp"

#include <cmath>
#include <memory>

namespace fgeo {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

void add_both(std::vector<CoordinateChange>& v, const CoordinateChange& c) {
    v.push_back(c);
    v.push_back(c.inverted());
}

MetricField metric_from(const std::string& chart, int n, MatFn eval, MatListFn d1, MatListFn d2, Support support) {
    MetricField m;
    m.dim = n;
    m.chart = chart;
    m.eval = std::move(eval);
    m.d1 = std::move(d1);
    m.d2 = std::move(d2);
    m.support = std::move(support);
    return m;
}

Support periodic_polar(double rmax) {
    Support s = Support::box(vec({0.0, 0.0}), vec({rmax, 2 * kPi}));
    s.periodic[1] = true;
    return s;
}
} // namespace

const ChartView& FamilySpec::chart(const std::string& name) const {
    for (const auto& c : charts)
        if (c.name == name) return c;
    throw DomainError("family '" + id + "' has no chart '" + name + "'");
}

const CoordinateChange& FamilySpec::change(const std::string& from, const std::string& to) const {
    for (const auto& c : changes)
        if (c.from == from && c.to == to) return c;
    throw DomainError("family '" + id + "' has no change " + from + " -> " + to);
}

const std::vector<std::string>& builtin_family_ids() {
    static const std::vector<std::string> ids{"gaussian-nd", "axial-2d", "cauchy-1d", "xy-coupled"};
    return ids;
}

ControlParams gaussian_params(const Vec& mu, const Mat& sigma, double k) {
    const int n = static_cast<int>(mu.size());
    if (sigma.rows() != n || sigma.cols() != n) throw DimensionError("gaussian_params: shape mismatch");
    Vec v(n + n * (n + 1) / 2);
    v.head(n) = mu;
    int p = n;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) v(p++) = sigma(i, j);
    return ControlParams(v, k);
}

void gaussian_unpack(const ControlParams& theta, Vec& mu, Mat& sigma) {
    const int m = theta.size();
    const int n = static_cast<int>(std::lround((-3.0 + std::sqrt(9.0 + 8.0 * m)) / 2.0));
    if (n < 1 || n + n * (n + 1) / 2 != m)
        throw DomainError("gaussian-nd expects [mu(n), sigma upper triangle]; got " + std::to_string(m) + " values");
    mu = theta.values.head(n);
    sigma.resize(n, n);
    int p = n;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) sigma(i, j) = sigma(j, i) = theta.values(p++);
}

double axial_partition(double theta) {
    const double z = theta / std::sqrt(2.0);
    return std::sqrt(kPi) * z * erfcx(z);
}

namespace {

// ---- gaussian-nd and xy-coupled ---------------------------------------------

struct GaussianParts {
    Vec mu;
    Mat sigma;
};

GaussianParts unpack_or_fixed(const ControlParams& th, const std::optional<GaussianParts>& fixed) {
    if (fixed) return *fixed;
    GaussianParts p;
    gaussian_unpack(th, p.mu, p.sigma);
    return p;
}

FamilySpec gaussian_family(const std::string& id, const std::string& chart, const ControlParams& theta,
                           std::optional<GaussianParts> fixed) {
    const GaussianParts base = unpack_or_fixed(theta, fixed);
    const int n = static_cast<int>(base.mu.size());
    require_positive_definite(base.sigma, "gaussian family");

    DensityFamily d;
    d.id = id;
    d.chart = chart;
    d.dim = n;
    d.support = Support::whole(n);
    d.log_density = [fixed](const Vec& x, const ControlParams& th) {
        const GaussianParts p = unpack_or_fixed(th, fixed);
        const Vec dx = x - p.mu;
        const double logdet = std::log(p.sigma.determinant());
        return 0.5 * logdet - 0.5 * static_cast<double>(x.size()) * kLog2Pi - 0.5 * dx.dot(p.sigma * dx);
    };
    d.grad_log = [fixed](const Vec& x, const ControlParams& th) -> Vec {
        const GaussianParts p = unpack_or_fixed(th, fixed);
        return -(p.sigma * (x - p.mu));
    };
    d.hess_log = [fixed](const Vec&, const ControlParams& th) -> Mat { return -unpack_or_fixed(th, fixed).sigma; };

    MetricField g = metric_from(
        chart, n, [fixed](const Vec&, const ControlParams& th) -> Mat { return unpack_or_fixed(th, fixed).sigma; },
        [n](const Vec&, const ControlParams&) { return std::vector<Mat>(static_cast<std::size_t>(n), Mat::Zero(n, n)); },
        [n](const Vec&, const ControlParams&) {
            return std::vector<Mat>(static_cast<std::size_t>(n * n), Mat::Zero(n, n));
        },
        Support::whole(n));

    FamilySpec s;
    s.id = id;
    s.dim = n;
    s.theta = theta;
    s.charts.push_back({chart, d, g});

    // Standardizing chart z = L^T (x - mu), sigma = L L^T, in which the family factorizes.
    const Mat L = base.sigma.llt().matrixL();
    const Mat A = L.transpose();
    const CoordinateChange std_change = linear_change(chart, "standard", A, -A * base.mu);
    add_both(s.changes, std_change);
    ChartView sv;
    sv.name = "standard";
    sv.density = pushforward_family(d, std_change);
    sv.density.grad_log = [](const Vec& z, const ControlParams&) -> Vec { return -z; };
    sv.density.hess_log = [n](const Vec&, const ControlParams&) -> Mat { return -Mat::Identity(n, n); };
    sv.metric = constant_metric("standard", Mat::Identity(n, n));
    s.charts.push_back(sv);

    s.closed.Z = [](const ControlParams&) { return 1.0; };
    s.closed.mode = [fixed, chart](const ControlParams& th) { return Point(chart, unpack_or_fixed(th, fixed).mu); };
    s.closed.R = [](const Point&, const ControlParams&) { return 0.0; };
    s.closed.ell = [fixed](const Point& x, const ControlParams& th) {
        const GaussianParts p = unpack_or_fixed(th, fixed);
        const Vec dx = x.x - p.mu;
        return std::sqrt(dx.dot(p.sigma * dx));
    };
    if (n == 1) {
        s.closed.quantile = [fixed](double u, const ControlParams& th) {
            const GaussianParts p = unpack_or_fixed(th, fixed);
            return p.mu(0) + normal_quantile(u) / std::sqrt(p.sigma(0, 0));
        };
    }
    s.sampler = [fixed, id, chart](const ControlParams& th, std::size_t count, std::uint64_t seed) {
        const GaussianParts p = unpack_or_fixed(th, fixed);
        const int dim = static_cast<int>(p.mu.size());
        const Mat Lc = p.sigma.llt().matrixL();
        const Mat Linv_t = Lc.transpose().inverse();
        SampleBatch b;
        b.family = id;
        b.chart = chart;
        b.seed = seed;
        b.theta = th;
        b.points.resize(count);
        const CounterRng rng(seed);
        parallel_for(count, [&](std::size_t i) {
            Vec z(dim);
            for (int j = 0; j < dim; ++j) z(j) = standard_normal(rng, i * static_cast<std::size_t>(dim) + j);
            b.points[i] = Point(chart, p.mu + Linv_t * z);
        });
        return b;
    };
    for (double a : {-1.3, -0.4, 0.0, 0.7, 1.6}) {
        Vec x = base.mu;
        for (int i = 0; i < n; ++i) x(i) += a * (1.0 + 0.37 * i) * (i % 2 ? -1.0 : 1.0);
        s.probes.emplace_back(chart, x);
    }
    return s;
}

// ---- axial-2d ---------------------------------------------------------------

double th_of(const ControlParams& p) {
    if (p.size() != 1) throw DomainError("axial-2d expects one control parameter theta");
    const double t = p[0];
    if (!(t > 0.0)) throw DomainError("axial-2d: theta must be positive");
    return t;
}

// Cartesian log density: -log Z - r^2/2 + log theta - log(theta^2 + r^2)/2 - log 2 pi
double axial_log_rho_cart(const Vec& x, double t) {
    const double r2 = x.squaredNorm();
    return -std::log(axial_partition(t)) - 0.5 * r2 + std::log(t) - 0.5 * std::log(t * t + r2) - kLog2Pi;
}

FamilySpec axial_family(const ControlParams& theta) {
    const double t0 = th_of(theta);
    FamilySpec s;
    s.id = "axial-2d";
    s.dim = 2;
    s.theta = theta;

    // cartesian
    DensityFamily dc;
    dc.id = s.id;
    dc.chart = "cartesian";
    dc.dim = 2;
    dc.support = Support::whole(2);
    dc.log_density = [](const Vec& x, const ControlParams& th) { return axial_log_rho_cart(x, th_of(th)); };
    dc.grad_log = [](const Vec& x, const ControlParams& th) -> Vec {
        const double t = th_of(th);
        const double D = t * t + x.squaredNorm();
        return -x - x / D;
    };
    dc.hess_log = [](const Vec& x, const ControlParams& th) -> Mat {
        const double t = th_of(th);
        const double D = t * t + x.squaredNorm();
        return -Mat::Identity(2, 2) - (Mat::Identity(2, 2) * D - 2.0 * x * x.transpose()) / (D * D);
    };
    MetricField gc = metric_from(
        "cartesian", 2,
        [](const Vec& x, const ControlParams& th) -> Mat {
            const double t = th_of(th);
            const double D = t * t + x.squaredNorm();
            return (t * t * Mat::Identity(2, 2) + x * x.transpose()) / D;
        },
        [](const Vec& x, const ControlParams& th) {
            const double t = th_of(th);
            const double D = t * t + x.squaredNorm();
            const Mat A = t * t * Mat::Identity(2, 2) + x * x.transpose();
            std::vector<Mat> d(2);
            for (int k = 0; k < 2; ++k) {
                Mat dA = Mat::Zero(2, 2);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) dA(i, j) = (i == k ? x(j) : 0.0) + (j == k ? x(i) : 0.0);
                d[static_cast<std::size_t>(k)] = dA / D - A * 2.0 * x(k) / (D * D);
            }
            return d;
        },
        [](const Vec& x, const ControlParams& th) {
            const double t = th_of(th);
            const double D = t * t + x.squaredNorm();
            const Mat A = t * t * Mat::Identity(2, 2) + x * x.transpose();
            auto dA = [&](int k) {
                Mat m = Mat::Zero(2, 2);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) m(i, j) = (i == k ? x(j) : 0.0) + (j == k ? x(i) : 0.0);
                return m;
            };
            std::vector<Mat> d(4);
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    Mat ddA = Mat::Zero(2, 2);
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j) ddA(i, j) = (i == k && j == l ? 1.0 : 0.0) + (i == l && j == k ? 1.0 : 0.0);
                    const double dk = -2.0 * x(k) / (D * D), dl = -2.0 * x(l) / (D * D);
                    const double dkl = -2.0 * (k == l ? 1.0 : 0.0) / (D * D) + 8.0 * x(k) * x(l) / (D * D * D);
                    d[static_cast<std::size_t>(k * 2 + l)] = ddA / D + dA(k) * dl + dA(l) * dk + A * dkl;
                }
            return d;
        },
        Support::whole(2));
    s.charts.push_back({"cartesian", dc, gc});

    // polar (r, phi)
    DensityFamily dp;
    dp.id = s.id;
    dp.chart = "polar";
    dp.dim = 2;
    dp.support = periodic_polar(kInf);
    dp.log_density = [](const Vec& x, const ControlParams& th) {
        return axial_log_rho_cart(vec({x(0), 0.0}), th_of(th)) + std::log(x(0));
    };
    MetricField gp = metric_from(
        "polar", 2,
        [](const Vec& x, const ControlParams& th) -> Mat {
            const double t = th_of(th), r = x(0);
            Mat m = Mat::Zero(2, 2);
            m(0, 0) = 1.0;
            m(1, 1) = t * t * r * r / (t * t + r * r);
            return m;
        },
        [](const Vec& x, const ControlParams& th) {
            const double t = th_of(th), r = x(0), D = t * t + r * r;
            std::vector<Mat> d(2, Mat::Zero(2, 2));
            d[0](1, 1) = 2.0 * t * t * t * t * r / (D * D);
            return d;
        },
        [](const Vec& x, const ControlParams& th) {
            const double t = th_of(th), r = x(0), D = t * t + r * r, t4 = t * t * t * t;
            std::vector<Mat> d(4, Mat::Zero(2, 2));
            d[0](1, 1) = 2.0 * t4 / (D * D) - 8.0 * t4 * r * r / (D * D * D);
            return d;
        },
        periodic_polar(kInf));
    s.charts.push_back({"polar", dp, gp});

    CoordinateChange cp;
    cp.from = "cartesian";
    cp.to = "polar";
    cp.forward = [](const Vec& x) -> Vec {
        double phi = std::atan2(x(1), x(0));
        if (phi < 0.0) phi += 2 * kPi;
        return vec({x.norm(), phi});
    };
    cp.inverse = [](const Vec& p) -> Vec { return vec({p(0) * std::cos(p(1)), p(0) * std::sin(p(1))}); };
    cp.jacobian = [](const Vec& x) -> Mat {
        const double r2 = x.squaredNorm(), r = std::sqrt(r2);
        Mat j(2, 2);
        j << x(0) / r, x(1) / r, -x(1) / r2, x(0) / r2;
        return j;
    };
    cp.domain = Support::whole(2);
    cp.domain.predicate = [](const Vec& x) { return x.squaredNorm() > 0.0; };
    cp.codomain = periodic_polar(kInf);
    add_both(s.changes, cp);

    // t-chart (t, phi), r = theta t / sqrt(theta^2 - t^2)
    DensityFamily dt;
    dt.id = s.id;
    dt.chart = "t";
    dt.dim = 2;
    dt.support = periodic_polar(t0);
    dt.log_density = [](const Vec& x, const ControlParams& th) {
        const double t = th_of(th), u = x(0);
        const double q = (t - u) * (t + u);
        const double r = t * u / std::sqrt(q);
        const double drdt = t * t * t / (q * std::sqrt(q));
        return axial_log_rho_cart(vec({r, 0.0}), t) + std::log(r) + std::log(drdt);
    };
    MetricField gt;
    gt.dim = 2;
    gt.chart = "t";
    gt.support = periodic_polar(t0);
    gt.eval = [](const Vec& x, const ControlParams& th) -> Mat {
        const double t = th_of(th), u = x(0);
        const double q = (t - u) * (t + u);
        Mat m = Mat::Zero(2, 2);
        m(0, 0) = std::pow(t, 6) / (q * q * q);
        m(1, 1) = u * u;
        return m;
    };
    s.charts.push_back({"t", dt, gt});

    CoordinateChange pt;
    pt.from = "polar";
    pt.to = "t";
    pt.forward = [t0](const Vec& p) -> Vec { return vec({t0 * p(0) / std::sqrt(t0 * t0 + p(0) * p(0)), p(1)}); };
    pt.inverse = [t0](const Vec& q) -> Vec {
        return vec({t0 * q(0) / std::sqrt((t0 - q(0)) * (t0 + q(0))), q(1)});
    };
    pt.jacobian = [t0](const Vec& p) -> Mat {
        const double D = t0 * t0 + p(0) * p(0);
        Mat j = Mat::Identity(2, 2);
        j(0, 0) = t0 * t0 * t0 / (D * std::sqrt(D));
        return j;
    };
    pt.domain = periodic_polar(kInf);
    pt.codomain = periodic_polar(t0);
    add_both(s.changes, pt);
    add_both(s.changes, compose(cp, pt));

    s.closed.Z = [](const ControlParams& th) { return axial_partition(th_of(th)); };
    s.closed.mode = [](const ControlParams&) { return Point("cartesian", Vec::Zero(2)); };
    s.closed.R = [](const Point& x, const ControlParams& th) {
        const double t = th_of(th);
        const double D = t * t + x.x.squaredNorm();
        return 6.0 * t * t / (D * D);
    };
    s.closed.ell = [](const Point& x, const ControlParams&) { return x.x.norm(); };
    // Hess(r^2/2) equals g only where the metric is flat; the covariant
    // equation is left with this residual in the cartesian chart.
    s.closed.residual = [](const Point& p, const ControlParams& th) -> Mat {
        const double t = th_of(th), x = p.x(0), y = p.x(1);
        const double D = t * t + x * x + y * y;
        Mat r(2, 2);
        r << y * y, -x * y, -x * y, x * x;
        return t * t * r / (D * D);
    };
    s.sampler = [](const ControlParams& th, std::size_t count, std::uint64_t seed) {
        const double t = th_of(th);
        const double tail = std::erfc(t / std::sqrt(2.0));
        if (!(tail > 0.0)) throw SamplerError("axial-2d sampler: theta too large for the radial tail");
        SampleBatch b;
        b.family = "axial-2d";
        b.chart = "cartesian";
        b.seed = seed;
        b.theta = th;
        b.points.resize(count);
        const CounterRng rng(seed);
        parallel_for(count, [&](std::size_t i) {
            // w = sqrt(theta^2 + r^2) is a standard normal truncated to [theta, inf).
            const double w = std::sqrt(2.0) * erfcinv(rng.uniform(2 * i) * tail);
            const double r = std::sqrt(std::max(0.0, (w - t) * (w + t)));
            const double phi = 2 * kPi * rng.uniform(2 * i + 1);
            b.points[i] = Point("cartesian", vec({r * std::cos(phi), r * std::sin(phi)}));
        });
        return b;
    };
    for (double r : {0.3, 1.0, 2.2})
        for (double a : {0.3, 2.1, 4.0}) s.probes.emplace_back("cartesian", vec({r * std::cos(a), r * std::sin(a)}));
    return s;
}

// ---- cauchy-1d --------------------------------------------------------------

void cauchy_params(const ControlParams& th, double& nu, double& gamma) {
    if (th.size() != 2) throw DomainError("cauchy-1d expects [nu, gamma]");
    nu = th[0];
    gamma = th[1];
    if (!(gamma > 0.0)) throw DomainError("cauchy-1d: gamma must be positive");
}

// Signed normal coordinate Phi^-1(F(x)), tail-safe.
double cauchy_signed_ell(double x, double nu, double gamma) {
    const double z = x - nu;
    if (z >= 0.0) return std::sqrt(2.0) * erfcinv(2.0 * std::atan2(gamma, z) / kPi);
    return -std::sqrt(2.0) * erfcinv(2.0 * std::atan2(gamma, -z) / kPi);
}

struct CauchyJet {
    double g, d1, d2;
};

CauchyJet cauchy_jet(double x, const ControlParams& th) {
    double nu, gamma;
    cauchy_params(th, nu, gamma);
    const double z = x - nu, q = z * z + gamma * gamma;
    const double l = cauchy_signed_ell(x, nu, gamma);
    const double logrho = std::log(gamma / kPi) - std::log(q);
    const double g = std::exp(kLog2Pi + 2.0 * logrho + l * l);
    const double u = -2.0 * z / q;
    const double du = -2.0 * (gamma * gamma - z * z) / (q * q);
    const double sg = std::sqrt(g);
    const double lp = 2.0 * u + 2.0 * l * sg;
    const double lpp = 2.0 * du + 2.0 * g + l * sg * lp;
    return {g, g * lp, g * (lp * lp + lpp)};
}

FamilySpec cauchy_family(const ControlParams& theta) {
    double nu0, gamma0;
    cauchy_params(theta, nu0, gamma0);
    FamilySpec s;
    s.id = "cauchy-1d";
    s.dim = 1;
    s.theta = theta;

    DensityFamily d;
    d.id = s.id;
    d.chart = "x";
    d.dim = 1;
    d.support = Support::whole(1);
    d.log_density = [](const Vec& x, const ControlParams& th) {
        double nu, gamma;
        cauchy_params(th, nu, gamma);
        const double z = x(0) - nu;
        return std::log(gamma / kPi) - std::log(z * z + gamma * gamma);
    };
    d.grad_log = [](const Vec& x, const ControlParams& th) -> Vec {
        double nu, gamma;
        cauchy_params(th, nu, gamma);
        const double z = x(0) - nu;
        return vec({-2.0 * z / (z * z + gamma * gamma)});
    };
    d.hess_log = [](const Vec& x, const ControlParams& th) -> Mat {
        double nu, gamma;
        cauchy_params(th, nu, gamma);
        const double z = x(0) - nu, q = z * z + gamma * gamma;
        return Mat::Constant(1, 1, -2.0 * (gamma * gamma - z * z) / (q * q));
    };
    MetricField g = metric_from(
        "x", 1, [](const Vec& x, const ControlParams& th) -> Mat { return Mat::Constant(1, 1, cauchy_jet(x(0), th).g); },
        [](const Vec& x, const ControlParams& th) { return std::vector<Mat>{Mat::Constant(1, 1, cauchy_jet(x(0), th).d1)}; },
        [](const Vec& x, const ControlParams& th) { return std::vector<Mat>{Mat::Constant(1, 1, cauchy_jet(x(0), th).d2)}; },
        Support::whole(1));
    g.provenance = Provenance::Transported;
    s.charts.push_back({"x", d, g});

    // Gaussian chart: the preimage of the standard normal under the gauss-to-cauchy map.
    CoordinateChange cg;
    cg.from = "x";
    cg.to = "gauss";
    cg.forward = [nu0, gamma0](const Vec& x) { return vec({cauchy_signed_ell(x(0), nu0, gamma0)}); };
    cg.inverse = [nu0, gamma0](const Vec& u) { return vec({gauss_to_cauchy(u(0), 0.0, 1.0, nu0, gamma0)}); };
    cg.jacobian = [theta](const Vec& x) -> Mat { return Mat::Constant(1, 1, std::sqrt(cauchy_jet(x(0), theta).g)); };
    cg.domain = Support::whole(1);
    cg.codomain = Support::whole(1);
    add_both(s.changes, cg);
    ChartView gv;
    gv.name = "gauss";
    gv.density.id = s.id;
    gv.density.chart = "gauss";
    gv.density.dim = 1;
    gv.density.support = Support::whole(1);
    gv.density.log_density = [](const Vec& u, const ControlParams&) { return -0.5 * u(0) * u(0) - 0.5 * kLog2Pi; };
    gv.metric = constant_metric("gauss", Mat::Identity(1, 1));
    s.charts.push_back(gv);

    s.closed.Z = [](const ControlParams&) { return 1.0; };
    s.closed.mode = [](const ControlParams& th) { return Point("x", vec({th[0]})); };
    s.closed.R = [](const Point&, const ControlParams&) { return 0.0; };
    s.closed.ell = [](const Point& x, const ControlParams& th) {
        double nu, gamma;
        cauchy_params(th, nu, gamma);
        return std::abs(cauchy_signed_ell(x.x(0), nu, gamma));
    };
    s.closed.quantile = [](double u, const ControlParams& th) {
        double nu, gamma;
        cauchy_params(th, nu, gamma);
        return nu + gamma * std::tan(kPi * (u - 0.5));
    };
    auto q = s.closed.quantile;
    s.sampler = [q](const ControlParams& th, std::size_t count, std::uint64_t seed) {
        SampleBatch b;
        b.family = "cauchy-1d";
        b.chart = "x";
        b.seed = seed;
        b.theta = th;
        b.points.resize(count);
        const CounterRng rng(seed);
        parallel_for(count, [&](std::size_t i) {
            double u = rng.uniform(i);
            if (u >= 1.0) u = 1.0 - 0x1.0p-53;
            b.points[i] = Point("x", vec({q(u, th)}));
        });
        return b;
    };
    for (double a : {-3.0, -1.0, -0.3, 0.4, 1.5, 4.0}) s.probes.emplace_back("x", vec({nu0 + gamma0 * a}));
    return s;
}

} // namespace

FamilySpec builtin_family(const std::string& id, const ControlParams& theta) {
    theta.validate();
    FamilySpec s;
    if (id == "gaussian-nd") {
        s = gaussian_family(id, "x", theta, std::nullopt);
    } else if (id == "axial-2d") {
        s = axial_family(theta);
    } else if (id == "cauchy-1d") {
        s = cauchy_family(theta);
    } else if (id == "xy-coupled") {
        if (theta.size() != 0) throw DomainError("xy-coupled takes no control parameters");
        Mat sigma(2, 2);
        sigma << 2.0, 1.0, 1.0, 2.0;
        s = gaussian_family(id, "cartesian", theta, GaussianParts{Vec::Zero(2), sigma});
        Mat rot(2, 2);
        rot << 1.0, 1.0, 1.0, -1.0;
        rot /= std::sqrt(2.0);
        const CoordinateChange rc = linear_change("cartesian", "rotated", rot, Vec::Zero(2));
        add_both(s.changes, rc);
        ChartView rv;
        rv.name = "rotated";
        rv.density = pushforward_family(s.density(), rc);
        rv.metric = transport_metric(s.metric(), rc);
        s.charts.push_back(rv);
    } else {
        throw ConfigError("unknown family id '" + id + "'");
    }
    s.gate = run_family_gate(s);
    return s;
}

GateResult run_family_gate(const FamilySpec& spec, double tol) {
    GateResult r;
    const ChartView& c = spec.primary();
    bool declared = static_cast<bool>(spec.closed.residual);
    for (const Point& p : spec.probes) {
        const Mat res = metric_residual(c.density, c.metric, p, spec.theta);
        r.max_residual = std::max(r.max_residual, res.cwiseAbs().maxCoeff());
        if (declared) r.max_declared_gap = std::max(r.max_declared_gap, (res - spec.closed.residual(p, spec.theta)).cwiseAbs().maxCoeff());
        ++r.probes;
    }
    if (r.max_residual <= tol) {
        r.passed = true;
        r.note = "residual within tolerance";
    } else if (declared && r.max_declared_gap <= tol) {
        r.passed = true;
        r.note = "residual matches the declared analytic residual";
    } else {
        r.passed = false;
        r.note = "metric residual above tolerance";
    }
    return r;
}

void require_gate(const FamilySpec& spec) {
    if (!spec.gate.passed)
        throw ConsistencyError("family '" + spec.id + "' failed the metric gate: max residual " +
                               std::to_string(spec.gate.max_residual));
}

FamilySpec expression_family(const ExpressionFamilyConfig& cfg, const ControlParams& theta) {
    const int n = cfg.dim;
    if (n < 1) throw ConfigError("expression family: dim must be positive");
    if (cfg.lower.size() != n || cfg.upper.size() != n) throw ConfigError("expression family: support bounds need dim entries");
    auto rho = std::make_shared<FieldExpression>(parse_field(cfg.density, n, cfg.nparams));
    FamilySpec s;
    s.id = cfg.id;
    s.dim = n;
    s.theta = theta;
    DensityFamily d;
    d.id = cfg.id;
    d.chart = "x";
    d.dim = n;
    d.support = Support::box(cfg.lower, cfg.upper);
    d.log_density = [rho](const Vec& x, const ControlParams& th) {
        const double v = rho->eval(x, th.values);
        return v > 0.0 ? std::log(v) : -kInf;
    };
    MetricField g;
    if (!cfg.metric.empty()) {
        if (static_cast<int>(cfg.metric.size()) != n * n) throw ConfigError("expression family: metric needs dim*dim entries");
        auto entries = std::make_shared<std::vector<FieldExpression>>();
        for (const auto& e : cfg.metric) entries->push_back(parse_field(e, n, cfg.nparams));
        g.dim = n;
        g.chart = "x";
        g.support = d.support;
        g.eval = [entries, n](const Vec& x, const ControlParams& th) -> Mat {
            Mat m(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m(i, j) = (*entries)[static_cast<std::size_t>(i * n + j)].eval(x, th.values);
            return 0.5 * (m + m.transpose());
        };
    } else {
        if (n != 1) throw ConfigError("expression family: the metric solver only handles n = 1");
        if (cfg.grid.size() < 3) throw ConfigError("expression family: solve-1d needs a grid");
        g = solve_metric_1d(d, theta, cfg.grid);
    }
    s.charts.push_back({"x", d, g});
    if (n == 1) {
        auto fam = d;
        s.sampler = [fam](const ControlParams& th, std::size_t count, std::uint64_t seed) {
            return inverse_transform_sample(fam, th, count, seed);
        };
        for (std::size_t i = 1; i + 1 < cfg.grid.size(); i += std::max<std::size_t>(1, cfg.grid.size() / 8))
            s.probes.emplace_back("x", vec({cfg.grid[i]}));
    }
    if (s.probes.empty()) {
        Vec c(n);
        for (int i = 0; i < n; ++i) {
            const double lo = std::isfinite(cfg.lower(i)) ? cfg.lower(i) : -1.0;
            const double hi = std::isfinite(cfg.upper(i)) ? cfg.upper(i) : 1.0;
            c(i) = 0.5 * (lo + hi);
        }
        s.probes.emplace_back("x", c);
    }
    s.gate = run_family_gate(s);
    return s;
}

} // namespace fgeo
