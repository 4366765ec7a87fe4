#pragma once

#include "fgeo/families.hpp"
#include "fgeo/gaussrep.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fgeo {

struct TheoremReport {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double theoretical = 0.0;
    double z = 0.0;  // (estimate - theoretical) / std_error
    std::size_t n = 0;
};

// Raised when some |z| exceeds the suite threshold; carries every report.
class SuiteFailure : public Error {
public:
    SuiteFailure(const std::string& what, std::vector<TheoremReport> reports)
        : Error(what), reports(std::move(reports)) {}
    std::vector<TheoremReport> reports;
};

// Non-finite integrand at a batch point.
class ExpectationError : public Error {
public:
    ExpectationError(const std::string& what, std::size_t index) : Error(what), index(index) {}
    std::size_t index;
};

SampleBatch sample_family(const FamilySpec& spec, const ControlParams& theta, std::size_t count, std::uint64_t seed);

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // s / sqrt(N)
    std::size_t n = 0;
};

MeanEstimate mc_expectation(const SampleBatch& batch, const std::function<double(const Point&)>& f);
MeanEstimate mean_estimate(const std::vector<double>& values);

// Standard error of the mean from overlapping batch means of length b.
double overlapping_batch_se(const std::vector<double>& values, std::size_t b);

using VectorField = std::function<Vec(const Vec&)>;

// D_i w^i as d_i w^i + Gamma^i_ik w^k, cross-checked against
// |g|^-1/2 d_i(|g|^1/2 w^i). ConsistencyError if they differ by more than tol.
double covariant_divergence(const MetricField& g, const VectorField& w, const Point& x, const ControlParams& theta,
                            double tol = 1e-5);

struct FluctuationOptions {
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    int s_max = 4;
    VectorField test_field;      // default: (x - xbar) + c
    double z_fail = 4.0;
    int ell_crosscheck = 20;     // points where a closed-form l is compared with shooting
};

// <eta^2> = nk, <l^2> = nk, <dS> = -nk/2, <(eta^2)^s> = (2k)^s Gamma(s + n/2) / Gamma(n/2),
// the ratios of consecutive moments and <k D_i w^i + eta_i w^i> = 0.
// k is taken from theta. Throws SuiteFailure when any |z| > z_fail.
std::vector<TheoremReport> fluctuation_suite(const FamilySpec& spec, const ControlParams& theta,
                                             const FluctuationOptions& opts = {});

double moment_theory(int n, double k, int s);

} // namespace fgeo
