#pragma once

#include "fgeo/charts.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fgeo {

// Counter-based generator: draw i of stream s is a pure function of (seed, s, i),
// so any partition of the work over threads reproduces the serial batch.
// Mixing is SplitMix64 (increment 0x9E3779B97F4A7C15, Stafford variant 13).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed = 0, std::uint64_t stream = 0);

    std::uint64_t bits(std::uint64_t counter) const;
    // Uniform on (0, 1]: ((bits >> 11) + 1) 2^-53.
    double uniform(std::uint64_t counter) const;
    CounterRng split(std::uint64_t stream) const { return CounterRng(seed_, stream); }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct SampleBatch {
    std::string family;
    std::string chart;
    std::uint64_t seed = 0;
    ControlParams theta;
    std::vector<Point> points;

    std::size_t size() const { return points.size(); }
};

// x = mu + sigma sqrt(-2 log z1) cos(2 pi z2)
double box_muller(double mu, double sigma, double z1, double z2);

SampleBatch box_muller_sample(double mu, double sigma, std::size_t count, std::uint64_t seed);

// Standard normal draw number i of a generator (uses counters 2i and 2i + 1).
double standard_normal(const CounterRng& rng, std::uint64_t i);

// x' = nu + gamma tan(pi/2 erf((x - mu) / (sqrt 2 sigma)))
double gauss_to_cauchy(double x, double mu, double sigma, double nu, double gamma);

double cauchy_cdf(double x, double nu, double gamma);

// CDF of a 1-D family by adaptive quadrature, with quantiles by monotone
// bracketing plus safeguarded Newton.
class QuadratureCdf {
public:
    QuadratureCdf(const DensityFamily& family, const ControlParams& theta);

    double cdf(double x) const;
    double quantile(double u) const;
    double total_mass() const { return total_; }

private:
    double mass_from_center(double x) const;
    DensityFamily family_;
    ControlParams theta_;
    double center_ = 0.0;
    double below_center_ = 0.0;
    double total_ = 1.0;
};

SampleBatch inverse_transform_sample(const DensityFamily& family, const ControlParams& theta, std::size_t count,
                                     std::uint64_t seed);

// ---- goodness of fit --------------------------------------------------------

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool passed = true;
    std::size_t n = 0;
};

// One-sample Kolmogorov-Smirnov test with Stephens' small-sample correction.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf, double alpha = 0.01);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    bool passed = true;
};

// Equal-probability bins on [lo, hi) against the uniform law.
ChiSquareResult chi_square_uniform(const std::vector<double>& samples, double lo, double hi, int bins,
                                   double alpha = 0.01);

} // namespace fgeo
