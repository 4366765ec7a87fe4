#include "fgeo/rng.hpp"

#include "fgeo/numerics.hpp"
#include "fgeo/special.hpp"

#include <algorithm>
#include <cmath>

namespace fgeo {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), key_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
    return splitmix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
}

double CounterRng::uniform(std::uint64_t counter) const {
    return static_cast<double>((bits(counter) >> 11) + 1) * 0x1.0p-53;
}

double box_muller(double mu, double sigma, double z1, double z2) {
    return mu + sigma * std::sqrt(-2.0 * std::log(z1)) * std::cos(2.0 * kPi * z2);
}

double standard_normal(const CounterRng& rng, std::uint64_t i) {
    return box_muller(0.0, 1.0, rng.uniform(2 * i), rng.uniform(2 * i + 1));
}

SampleBatch box_muller_sample(double mu, double sigma, std::size_t count, std::uint64_t seed) {
    if (!(sigma > 0.0)) throw DomainError("box_muller_sample: sigma must be positive");
    SampleBatch b;
    b.family = "gaussian-1d";
    b.chart = "x";
    b.seed = seed;
    b.theta = ControlParams{mu, sigma};
    b.points.resize(count);
    const CounterRng rng(seed);
    parallel_for(count, [&](std::size_t i) {
        b.points[i] = Point("x", vec({mu + sigma * standard_normal(rng, i)}));
    });
    return b;
}

double gauss_to_cauchy(double x, double mu, double sigma, double nu, double gamma) {
    return nu + gamma * std::tan(0.5 * kPi * std::erf((x - mu) / (std::sqrt(2.0) * sigma)));
}

double cauchy_cdf(double x, double nu, double gamma) {
    return 0.5 + std::atan((x - nu) / gamma) / kPi;
}

QuadratureCdf::QuadratureCdf(const DensityFamily& family, const ControlParams& theta)
    : family_(family), theta_(theta) {
    if (family.dim != 1) throw DimensionError("QuadratureCdf: family must be one-dimensional");
    const double lo = family.support.lower(0), hi = family.support.upper(0);
    if (std::isfinite(lo) && std::isfinite(hi)) center_ = 0.5 * (lo + hi);
    else if (std::isfinite(lo)) center_ = lo + 1.0;
    else if (std::isfinite(hi)) center_ = hi - 1.0;
    else center_ = 0.0;
    auto f = [this](double t) { return std::exp(family_.log_density(vec({t}), theta_)); };
    QuadOptions o;
    o.abs_tol = 1e-14;
    o.rel_tol = 1e-12;
    below_center_ = integrate_or_throw(f, lo, center_, o, "QuadratureCdf");
    total_ = below_center_ + integrate_or_throw(f, center_, hi, o, "QuadratureCdf");
    if (!(total_ > 0.0)) throw SamplerError("QuadratureCdf: density has no mass");
}

double QuadratureCdf::mass_from_center(double x) const {
    auto f = [this](double t) { return std::exp(family_.log_density(vec({t}), theta_)); };
    QuadOptions o;
    o.abs_tol = 1e-14;
    o.rel_tol = 1e-12;
    return integrate(f, center_, x, o).value;
}

double QuadratureCdf::cdf(double x) const {
    if (x <= family_.support.lower(0)) return 0.0;
    if (x >= family_.support.upper(0)) return 1.0;
    return std::clamp((below_center_ + mass_from_center(x)) / total_, 0.0, 1.0);
}

double QuadratureCdf::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) {
        if (u == 1.0 && std::isfinite(family_.support.upper(0))) return family_.support.upper(0);
        throw SamplerError("quantile: u must lie in (0, 1)");
    }
    const double lo_s = family_.support.lower(0), hi_s = family_.support.upper(0);
    // Bracket by step doubling from the center.
    double a = center_, b = center_;
    double fa = cdf(a) - u;
    double step = 1.0;
    if (fa < 0.0) {
        b = a;
        for (int i = 0; i < 200; ++i) {
            double nb = b + step;
            if (nb >= hi_s) nb = 0.5 * (b + hi_s);
            b = nb;
            if (cdf(b) - u >= 0.0) break;
            a = b;
            step *= 2.0;
        }
    } else {
        a = b;
        for (int i = 0; i < 200; ++i) {
            double na = a - step;
            if (na <= lo_s) na = 0.5 * (a + lo_s);
            a = na;
            if (cdf(a) - u <= 0.0) break;
            b = a;
            step *= 2.0;
        }
    }
    if (!(cdf(a) - u <= 0.0 && cdf(b) - u >= 0.0)) throw SamplerError("quantile: bracketing failed");
    double x = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
        const double fx = cdf(x) - u;
        if (fx < 0.0) a = x; else b = x;
        const double dens = std::exp(family_.log_density(vec({x}), theta_)) / total_;
        double nx = dens > 0.0 ? x - fx / dens : 0.5 * (a + b);
        if (!(nx > a && nx < b)) nx = 0.5 * (a + b);
        if (std::abs(nx - x) <= 1e-12 * (1.0 + std::abs(x)) || b - a <= 1e-14 * (1.0 + std::abs(x))) return nx;
        x = nx;
    }
    throw SamplerError("quantile: Newton iteration did not converge");
}

SampleBatch inverse_transform_sample(const DensityFamily& family, const ControlParams& theta, std::size_t count,
                                     std::uint64_t seed) {
    const QuadratureCdf cdf(family, theta);
    SampleBatch b;
    b.family = family.id;
    b.chart = family.chart;
    b.seed = seed;
    b.theta = theta;
    b.points.resize(count);
    const CounterRng rng(seed);
    parallel_for(count, [&](std::size_t i) {
        double u = rng.uniform(i);
        if (u >= 1.0) u = 1.0 - 0x1.0p-53;
        b.points[i] = Point(family.chart, vec({cdf.quantile(u)}));
    });
    return b;
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf, double alpha) {
    KsResult r;
    r.n = samples.size();
    if (samples.empty()) throw DomainError("ks_test: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    r.statistic = d;
    const double sn = std::sqrt(n);
    r.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    r.passed = r.p_value > alpha;
    return r;
}

ChiSquareResult chi_square_uniform(const std::vector<double>& samples, double lo, double hi, int bins, double alpha) {
    if (bins < 2) throw DomainError("chi_square_uniform: need at least two bins");
    std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
    for (double s : samples) {
        int k = static_cast<int>(std::floor((s - lo) / (hi - lo) * bins));
        k = std::clamp(k, 0, bins - 1);
        count[static_cast<std::size_t>(k)] += 1.0;
    }
    const double expect = static_cast<double>(samples.size()) / bins;
    ChiSquareResult r;
    for (double c : count) r.statistic += (c - expect) * (c - expect) / expect;
    r.dof = bins - 1;
    r.p_value = gamma_q(0.5 * r.dof, 0.5 * r.statistic);
    r.passed = r.p_value > alpha;
    return r;
}

} // namespace fgeo
